"""Command line: ``tafm solve | audit | decompose | gen | version``.

Reports go to stdout as text, or as JSON with ``--format structured``.
Exit codes: 0 success, 1 a violation witness was found (audit only),
2 bad input, variant mismatch or any other error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .audit import MECHANISMS, AuditReport, GridSpec, audit_grid, audit_instance, audit_strategyproofness, get_mechanism
from .core import (
    Assignment,
    EdgeSet,
    FractionalAssignment,
    Instance,
    InstanceError,
    OutcomeLottery,
    Variant,
    VariantError,
    canonical_edge_order,
    check_instance,
    format_rational,
    parse_rational,
    welfare,
)
from .fileformat import FormatError, emit_instance, encode_rational, read_fractional, read_instance
from .mech_frac import dual_certificate, sigap_greedy_trace, verify_2approx
from .rounding import decompose_scaled

EXIT_OK, EXIT_WITNESS, EXIT_ERROR = 0, 1, 2

NAMED_GRIDS = {
    "tiny": dict(max_jobs=2, max_machines=2, edge_set_budget=256),
    "small": dict(edge_set_budget=512),
    "default": dict(),
}


class UsageError(ValueError):
    pass


def _q(x: Fraction) -> str:
    return format_rational(x)


def _assignment_text(a: Assignment) -> list[str]:
    return [f"  job {i + 1} -> " + ("*" if j is None else f"machine {j + 1}") for i, j in enumerate(a.jobs)]


def _assignment_doc(a: Assignment) -> list:
    return [None if j is None else j + 1 for j in a.jobs]


def _matrix_doc(x: FractionalAssignment) -> list:
    return [[encode_rational(v) for v in row] for row in x.x]


def _lottery_doc(lot: OutcomeLottery) -> list:
    return [{"probability": _q(p), "assignment": _assignment_doc(a)} for a, p in lot]


# ---------------------------------------------------------------------------
# solve

def _as_emit(outcome, emit: str, inst: Instance, E: EdgeSet, seed: Optional[int]):
    if emit == "fractional":
        if isinstance(outcome, Assignment):
            return outcome.to_fractional()
        if isinstance(outcome, OutcomeLottery):
            return outcome.expectation()
        return outcome
    if emit == "lottery":
        if isinstance(outcome, Assignment):
            return OutcomeLottery.point(outcome)
        if isinstance(outcome, FractionalAssignment):
            return decompose_scaled(outcome, inst, E).to_lottery()
        return outcome
    if isinstance(outcome, FractionalAssignment):
        outcome = decompose_scaled(outcome, inst, E).to_lottery()
    if isinstance(outcome, OutcomeLottery):
        return outcome.sample(seed)
    return outcome


_NATURAL_EMIT = {"deterministic": "assignment", "fractional": "fractional", "lottery": "lottery"}


def cmd_solve(args) -> tuple[int, dict, list[str]]:
    inst, E = read_instance(args.instance)
    mech = get_mechanism(args.mechanism)
    outcome = mech(inst, E)
    emit = args.emit or _NATURAL_EMIT[mech.mode]
    shown = _as_emit(outcome, emit, inst, E, args.seed)
    w = welfare(shown, inst, E)
    doc = {"mechanism": mech.name, "variant": inst.variant.value, "emit": emit, "welfare": _q(w)}
    lines = [f"mechanism: {mech.name}", f"emit: {emit}"]
    if isinstance(shown, Assignment):
        doc["assignment"] = _assignment_doc(shown)
        lines += ["assignment:"] + _assignment_text(shown)
    elif isinstance(shown, OutcomeLottery):
        doc["lottery"] = _lottery_doc(shown)
        lines.append(f"lottery ({len(shown)} outcomes):")
        for a, p in shown:
            lines.append(f"  p={_q(p)}: " + ", ".join(_fmt_pairs(a)))
    else:
        doc["x"] = _matrix_doc(shown)
        lines.append("x:")
        lines += ["  " + " ".join(_q(v) for v in row) for row in shown.x]
    lines.append(f"welfare: {_q(w)}")
    if Variant(inst.variant) is Variant.SIGAP or (mech.name == "sigap_fractional_greedy"):
        trace = sigap_greedy_trace(inst, E)
        cert = dual_certificate(trace)
        verdict = verify_2approx(cert, trace.x, inst, E)
        doc["dual_certificate"] = {
            "u": [_q(u) for u in cert.u],
            "z": [_q(z) for z in cert.z],
            "value": _q(cert.value(inst)),
            "greedy_welfare": _q(welfare(trace.x, inst, E)),
            "valid": bool(verdict),
        }
        lines.append("dual certificate (greedy run):")
        lines.append("  u = " + " ".join(_q(u) for u in cert.u))
        lines.append("  z = " + " ".join(_q(z) for z in cert.z))
        lines.append(f"  value {_q(cert.value(inst))}, greedy welfare {_q(welfare(trace.x, inst, E))}, "
                     + ("certifies ratio <= 2" if verdict else f"INVALID: {verdict.reason}"))
    return EXIT_OK, doc, lines


def _fmt_pairs(a: Assignment) -> list[str]:
    pairs = a.edges()
    return [f"({i + 1},{j + 1})" for i, j in pairs] or ["(empty)"]


# ---------------------------------------------------------------------------
# audit

def parse_grid(text: str, variant: Variant) -> GridSpec:
    """A named grid (``tiny``, ``small``, ``default``) or ``key=value`` pairs.

    Keys: ``n``, ``m``, ``budget``, ``seed``, ``max_runs``, and the alphabets
    ``values``, ``sizes``, ``capacities`` with symbols separated by ``|``,
    e.g. ``n=2,m=3,budget=1024,values=1|2``.
    """
    if text in NAMED_GRIDS:
        return GridSpec(variant, **NAMED_GRIDS[text])
    opts: dict = {}
    keys = {"n": "max_jobs", "m": "max_machines", "budget": "edge_set_budget", "seed": "seed", "max_runs": "max_runs"}
    for part in filter(None, text.split(",")):
        if "=" not in part:
            raise UsageError(f"grid option {part!r} is not key=value (named grids: {', '.join(NAMED_GRIDS)})")
        k, v = (s.strip() for s in part.split("=", 1))
        if k in keys:
            try:
                opts[keys[k]] = int(v)
            except ValueError:
                raise UsageError(f"grid option {k} needs an integer") from None
        elif k in ("values", "sizes", "capacities"):
            opts[k] = tuple(parse_rational(t) for t in v.split("|"))
        else:
            raise UsageError(f"unknown grid option {k!r}")
    return GridSpec(variant, **opts)


def _report_doc(rep: AuditReport, limit: int) -> dict:
    r = rep.ratios
    return {
        "mechanism": rep.mechanism,
        "instance": rep.instance_id,
        "verdict": rep.verdict,
        "complete": rep.complete,
        "instances": rep.instances_checked,
        "edge_sets": rep.edge_sets_checked,
        "deviations": rep.deviations_checked,
        "witness_count": len(rep.witnesses),
        "witnesses": [
            {
                "instance": w.instance_id,
                "job": w.job + 1,
                "true_edges": [[i + 1, j + 1] for i, j in w.true_edges],
                "misreport": sorted(j + 1 for j in w.misreport),
                "honest_utility": _q(w.honest_utility),
                "deviant_utility": _q(w.deviant_utility),
            }
            for w in rep.witnesses[:limit]
        ],
        "ratio": {
            "count": r.count,
            "min": None if r.min_ratio is None else _q(r.min_ratio),
            "max": None if r.max_ratio is None else _q(r.max_ratio),
            "unbounded": r.unbounded,
            "worst_case": r.worst_case,
        },
    }


def cmd_audit(args) -> tuple[int, dict, list[str]]:
    mech = get_mechanism(args.mechanism)
    if (args.instance is None) == (args.grid is None):
        raise UsageError("give exactly one of an instance file or --grid")
    if args.grid is not None:
        rep = audit_grid(mech, parse_grid(args.grid, mech.variant), workers=args.workers)
    else:
        inst, E = read_instance(args.instance)
        if args.all_edge_sets:
            rep = audit_instance(mech, inst, instance_id=str(args.instance))
        else:
            rep = audit_strategyproofness(mech, inst, E, instance_id=str(args.instance))
    doc = _report_doc(rep, args.max_witnesses)
    lines = [
        f"mechanism: {rep.mechanism}",
        f"scope: {rep.instance_id} ({rep.instances_checked} instances, {rep.edge_sets_checked} true edge sets, "
        f"{rep.deviations_checked} misreports)" + ("" if rep.complete else " PARTIAL: run budget exhausted"),
        f"verdict: {rep.verdict}",
    ]
    r = rep.ratios
    if r.count:
        lines.append(f"OPT/welfare: min {_q(r.min_ratio) if r.min_ratio is not None else '-'}, "
                     f"max {_q(r.max_ratio) if r.max_ratio is not None else '-'}"
                     + (f", {r.unbounded} with zero welfare" if r.unbounded else "")
                     + (f" (worst: {r.worst_case})" if r.worst_case else ""))
    for w in rep.witnesses[: args.max_witnesses]:
        lines.append("witness: " + w.describe())
    if len(rep.witnesses) > args.max_witnesses:
        lines.append(f"... {len(rep.witnesses) - args.max_witnesses} more witnesses")
    return (EXIT_WITNESS if rep.witnesses else EXIT_OK), doc, lines


# ---------------------------------------------------------------------------
# decompose

def cmd_decompose(args) -> tuple[int, dict, list[str]]:
    inst, E = read_instance(args.instance)
    x = read_fractional(args.fractional)
    if (x.n, x.m) != (inst.n, inst.m):
        raise UsageError(f"fractional assignment is {x.n}x{x.m}, instance is {inst.n}x{inst.m}")
    dec = decompose_scaled(x, inst, E)
    exact = dec.resum() == dec.target and dec.weights_total() == 1
    doc = {
        "support": [{"weight": _q(lam), "assignment": _assignment_doc(a)} for a, lam in dec.support],
        "weights_total": _q(dec.weights_total()),
        "target": _matrix_doc(dec.target),
        "resum": _matrix_doc(dec.resum()),
        "exact": exact,
    }
    lines = [f"x/2 as a lottery over {len(dec.support)} integral assignments:"]
    for a, lam in dec.support:
        lines.append(f"  {_q(lam)}: " + ", ".join(_fmt_pairs(a)))
    lines.append(f"sum of weights: {_q(dec.weights_total())}")
    lines.append("re-summation equals x/2: " + ("yes" if exact else "NO"))
    return (EXIT_OK if exact else EXIT_ERROR), doc, lines


# ---------------------------------------------------------------------------
# gen

DEFAULT_ALPHABET = "values=1,2,3;sizes=1,2;capacities=1,2,3"


def parse_alphabet(text: str) -> dict[str, tuple[Fraction, ...]]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        if "=" not in part:
            raise UsageError(f"alphabet entry {part!r} is not name=v1,v2,...")
        k, v = (s.strip() for s in part.split("=", 1))
        if k not in ("values", "sizes", "capacities"):
            raise UsageError(f"unknown alphabet {k!r}")
        symbols = tuple(parse_rational(t) for t in v.split(",") if t.strip())
        if not symbols:
            raise UsageError(f"alphabet {k} is empty")
        out[k] = symbols
    return out


def generate(variant: Variant, n: int, m: int, seed: int, alphabet: dict) -> tuple[Instance, EdgeSet]:
    """Random instance of ``variant`` and a random edge set, driven by ``seed`` alone."""
    variant = Variant(variant)
    if variant is Variant.KP and m != 1:
        raise UsageError("KP instances have exactly one machine")
    rng = random.Random(seed)
    vals = alphabet.get("values", (Fraction(1),))
    szs = alphabet.get("sizes", (Fraction(1),))
    caps = alphabet.get("capacities", (Fraction(1),))
    row_values = variant in (Variant.VIGAP, Variant.MKP, Variant.KP)
    row_sizes = variant in (Variant.SIGAP, Variant.MKP, Variant.KP)
    unit = variant in (Variant.MWBM, Variant.MBM)

    def grid(symbols, per_row):
        rows = []
        for _ in range(n):
            if per_row:
                rows.append([rng.choice(symbols)] * m)
            else:
                rows.append([rng.choice(symbols) for _ in range(m)])
        return rows

    values = [[1] * m for _ in range(n)] if variant is Variant.MBM else grid(vals, row_values)
    sizes = [[1] * m for _ in range(n)] if unit else grid(szs, row_sizes)
    capacities = [1] * m if unit else [rng.choice(caps) for _ in range(m)]
    inst = check_instance(Instance.create(values, sizes, capacities, variant))
    edges = [e for e in canonical_edge_order(n, m) if rng.random() < 0.5]
    return inst, EdgeSet(n, m, frozenset(edges))


def cmd_gen(args):
    alphabet = parse_alphabet(args.alphabet)
    inst, E = generate(Variant(args.variant), args.n, args.m, args.seed, alphabet)
    text = emit_instance(inst, E)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        return EXIT_OK, {"written": args.output}, [f"wrote {args.output}"]
    return EXIT_OK, None, [text.rstrip("\n")]


def cmd_version(args):
    return EXIT_OK, {"version": __version__, "format_version": "tafm-1"}, [f"tafm {__version__} (format tafm-1)"]


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tafm", description="Truthful assignment mechanisms on private bipartite graphs.")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run a mechanism on an instance file")
    s.add_argument("instance")
    s.add_argument("--mechanism", required=True, choices=sorted(MECHANISMS))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--emit", choices=("assignment", "lottery", "fractional"))
    s.set_defaults(func=cmd_solve)

    a = sub.add_parser("audit", help="exhaustive strategyproofness audit")
    a.add_argument("instance", nargs="?")
    a.add_argument("--grid", help=f"named grid ({', '.join(NAMED_GRIDS)}) or key=value list")
    a.add_argument("--mechanism", required=True, choices=sorted(MECHANISMS))
    a.add_argument("--all-edge-sets", action="store_true", help="audit the instance under every true edge set")
    a.add_argument("--workers", type=int, default=1)
    a.add_argument("--max-witnesses", type=int, default=10)
    a.set_defaults(func=cmd_audit)

    d = sub.add_parser("decompose", help="write x/2 as a lottery over integral assignments")
    d.add_argument("instance")
    d.add_argument("fractional")
    d.set_defaults(func=cmd_decompose)

    g = sub.add_parser("gen", help="generate a random instance file")
    g.add_argument("--variant", required=True, choices=[v.value for v in Variant])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--alphabet", default=DEFAULT_ALPHABET)
    g.add_argument("--output", "-o")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("version")
    v.set_defaults(func=cmd_version)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen" and (args.n < 1 or args.m < 1):
        print("error: n and m must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        code, doc, lines = args.func(args)
    except (FormatError, InstanceError, VariantError, UsageError, ValueError, OSError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        if args.format == "structured":
            print(json.dumps({"error": str(msg)}, sort_keys=True))
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR
    if args.format == "structured" and doc is not None:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
