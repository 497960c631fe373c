"""Exact strategyproofness audits and brute-force welfare oracles.

An audit fixes the public instance and a true edge set, lets each job in
turn report every subset of machines (fabricated edges included), and
compares the job's exact utility on its true edges against the honest
outcome.  Lottery outcomes are expanded in full; nothing is sampled.
"""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Iterator, Optional, Union

from .core import (
    Assignment,
    EdgeSet,
    FractionalAssignment,
    Instance,
    OutcomeLottery,
    Variant,
    canonical_edge_order,
    utility,
    welfare,
)
from .mech_frac import mkp_fractional, sigap_fractional_greedy, vigap_fractional_greedy
from .mech_match import mbm_mechanism, mwbm_greedy, mwbm_optimal_baseline
from .rounding import compose_mechanism, gap_mechanism

ZERO = Fraction(0)

DETERMINISTIC = "deterministic"
FRACTIONAL = "fractional"
LOTTERY = "lottery"

_OUTCOME_TYPES = {
    DETERMINISTIC: Assignment,
    FRACTIONAL: FractionalAssignment,
    LOTTERY: OutcomeLottery,
}


class GuardError(ValueError):
    """A brute-force routine was asked to enumerate more than its guard allows."""


# ---------------------------------------------------------------------------
# brute force

def _search(inst: Instance, E: EdgeSet):
    """Yield every feasible integral assignment using edges of ``E``."""
    n, m = inst.n, inst.m
    options = [[None] + sorted(E.machines_of(i)) for i in range(n)]
    load = [ZERO] * m
    jobs: list = [None] * n

    def rec(i):
        if i == n:
            yield tuple(jobs)
            return
        for j in options[i]:
            if j is None:
                jobs[i] = None
                yield from rec(i + 1)
            elif load[j] + inst.sizes[i][j] <= inst.capacities[j]:
                load[j] += inst.sizes[i][j]
                jobs[i] = j
                yield from rec(i + 1)
                load[j] -= inst.sizes[i][j]
                jobs[i] = None

    yield from rec(0)


def brute_force_optimal(inst: Instance, E: EdgeSet, guard: int = 16) -> tuple[Assignment, Fraction]:
    """Welfare-maximizing integral assignment by exhaustive search.

    Among optimal assignments the one with the lexicographically least 0/1
    vector in canonical edge order is returned.
    """
    if len(E) > guard:
        raise GuardError(f"{len(E)} decision variables exceed the guard of {guard}")
    best, best_key = None, None
    for jobs in _search(inst, E):
        a = Assignment(jobs, inst.m)
        w = sum((inst.values[i][j] for i, j in a.edges()), ZERO)
        key = (-w, a.vector())
        if best_key is None or key < best_key:
            best, best_key = a, key
    return best, -best_key[0]


def brute_force_mechanism(inst: Instance, E: EdgeSet) -> Assignment:
    """Exact integral optimum with report-independent tie-breaking.

    Exponential time.  Strategyproof whenever each job values all of its
    machines equally (MBM, MKP, VIGAP).
    """
    return brute_force_optimal(inst, E)[0]


# ---------------------------------------------------------------------------
# mechanisms

@dataclass(frozen=True)
class Mechanism:
    name: str
    run: Callable[[Instance, EdgeSet], object]
    variant: Variant
    mode: str
    truthful: bool = True  # what theory predicts; audits check it

    def __call__(self, inst: Instance, E: EdgeSet):
        return self.run(inst, E)


MECHANISMS: dict[str, Mechanism] = {
    m.name: m
    for m in [
        Mechanism("mbm", mbm_mechanism, Variant.MBM, DETERMINISTIC),
        Mechanism("mwbm_greedy", mwbm_greedy, Variant.MWBM, DETERMINISTIC),
        Mechanism("mwbm_optimal_baseline", mwbm_optimal_baseline, Variant.MWBM, DETERMINISTIC, truthful=False),
        Mechanism("mkp_fractional", mkp_fractional, Variant.MKP, FRACTIONAL),
        Mechanism("sigap_fractional_greedy", sigap_fractional_greedy, Variant.SIGAP, FRACTIONAL),
        Mechanism("vigap_fractional_greedy", vigap_fractional_greedy, Variant.VIGAP, FRACTIONAL),
        Mechanism("compose_mkp", partial(compose_mechanism, mkp_fractional), Variant.MKP, LOTTERY),
        Mechanism("compose_sigap", partial(compose_mechanism, sigap_fractional_greedy), Variant.SIGAP, LOTTERY),
        Mechanism("compose_vigap", partial(compose_mechanism, vigap_fractional_greedy), Variant.VIGAP, LOTTERY),
        Mechanism("gap_mechanism", gap_mechanism, Variant.GAP, LOTTERY),
        Mechanism("mkp_optimal_integral", brute_force_mechanism, Variant.MKP, DETERMINISTIC),
        Mechanism("vigap_optimal_integral", brute_force_mechanism, Variant.VIGAP, DETERMINISTIC),
    ]
}


def get_mechanism(name: Union[str, Mechanism]) -> Mechanism:
    if isinstance(name, Mechanism):
        return name
    try:
        return MECHANISMS[name]
    except KeyError:
        raise KeyError(f"unknown mechanism {name!r}; choose from {', '.join(MECHANISMS)}") from None


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class Witness:
    instance_id: str
    job: int
    true_edges: EdgeSet
    misreport: frozenset  # machines reported by the job
    honest_utility: Fraction
    deviant_utility: Fraction

    def describe(self) -> str:
        true_m = sorted(j + 1 for j in self.true_edges.machines_of(self.job))
        lie = sorted(j + 1 for j in self.misreport)
        return (
            f"{self.instance_id}: job {self.job + 1} with true machines {true_m} reports {lie}; "
            f"utility {self.honest_utility} -> {self.deviant_utility}"
        )


@dataclass
class RatioStats:
    """OPT / mechanism welfare over audited (instance, true edge set) pairs.

    ``worst_case`` names the pair achieving the maximum.  Infinite ratios
    (zero welfare against positive OPT) are counted separately.
    """

    count: int = 0
    min_ratio: Optional[Fraction] = None
    max_ratio: Optional[Fraction] = None
    unbounded: int = 0
    worst_case: Optional[str] = None

    def add(self, opt: Fraction, got: Fraction, label: str = "") -> None:
        self.count += 1
        if got == 0:
            if opt == 0:
                ratio = Fraction(1)
            else:
                self.unbounded += 1
                self.worst_case = label
                return
        else:
            ratio = opt / got
        if self.min_ratio is None or ratio < self.min_ratio:
            self.min_ratio = ratio
        if self.max_ratio is None or ratio > self.max_ratio:
            self.max_ratio = ratio
            if not self.unbounded:
                self.worst_case = label

    def merge(self, other: "RatioStats") -> None:
        if other.count == 0:
            return
        if other.unbounded and not self.unbounded:
            self.worst_case = other.worst_case
        self.count += other.count
        self.unbounded += other.unbounded
        if other.min_ratio is not None and (self.min_ratio is None or other.min_ratio < self.min_ratio):
            self.min_ratio = other.min_ratio
        if other.max_ratio is not None and (self.max_ratio is None or other.max_ratio > self.max_ratio):
            self.max_ratio = other.max_ratio
            if not self.unbounded:
                self.worst_case = other.worst_case


@dataclass
class AuditReport:
    mechanism: str
    instance_id: str
    witnesses: list[Witness] = field(default_factory=list)
    ratios: RatioStats = field(default_factory=RatioStats)
    instances_checked: int = 0
    edge_sets_checked: int = 0
    deviations_checked: int = 0
    complete: bool = True

    @property
    def verdict(self) -> str:
        return "violated" if self.witnesses else "truthful"

    @property
    def truthful(self) -> bool:
        return not self.witnesses

    def absorb(self, other: "AuditReport") -> None:
        self.witnesses.extend(other.witnesses)
        self.ratios.merge(other.ratios)
        self.instances_checked += other.instances_checked
        self.edge_sets_checked += other.edge_sets_checked
        self.deviations_checked += other.deviations_checked
        self.complete = self.complete and other.complete


class OutcomeCache:
    """Mechanism outcomes for one public instance, keyed by reported edge set."""

    def __init__(self, mechanism: Mechanism, inst: Instance):
        self.mechanism = mechanism
        self.inst = inst
        self._memo: dict[frozenset, object] = {}
        self.runs = 0

    def __call__(self, E: EdgeSet):
        key = E.edges
        out = self._memo.get(key)
        if out is None:
            out = self.mechanism.run(self.inst, E)
            expected = _OUTCOME_TYPES[self.mechanism.mode]
            if not isinstance(out, expected):
                raise TypeError(f"{self.mechanism.name} returned {type(out).__name__}, expected {expected.__name__}")
            self._memo[key] = out
            self.runs += 1
        return out


def audit_strategyproofness(
    mechanism,
    inst: Instance,
    true_edges: EdgeSet,
    mode: Optional[str] = None,
    instance_id: str = "instance",
    cache: Optional[OutcomeCache] = None,
    max_machines: int = 6,
) -> AuditReport:
    """Try every unilateral misreport of every job against the honest outcome.

    A witness is recorded only when the deviant utility is strictly larger.
    """
    mech = get_mechanism(mechanism)
    if mode is not None and mode != mech.mode:
        mech = Mechanism(mech.name, mech.run, mech.variant, mode, mech.truthful)
    if inst.m > max_machines:
        raise GuardError(f"{inst.m} machines exceed the misreport guard of {max_machines}")
    outcome = cache if cache is not None else OutcomeCache(mech, inst)
    report = AuditReport(mech.name, instance_id, instances_checked=1, edge_sets_checked=1)
    honest = outcome(true_edges)
    for i in range(inst.n):
        base = utility(i, honest, true_edges, inst)
        truth = true_edges.machines_of(i)
        for size in range(inst.m + 1):
            for machines in itertools.combinations(range(inst.m), size):
                lie = frozenset(machines)
                if lie == truth:
                    continue
                report.deviations_checked += 1
                got = utility(i, outcome(true_edges.with_report(i, lie)), true_edges, inst)
                if got > base:
                    report.witnesses.append(Witness(instance_id, i, true_edges, lie, base, got))
    opt = brute_force_optimal(inst, true_edges)[1]
    report.ratios.add(opt, welfare(honest, inst, true_edges), _label(instance_id, true_edges))
    return report


def _label(instance_id: str, E: EdgeSet) -> str:
    return f"{instance_id} E={sorted((i + 1, j + 1) for i, j in E.edges)}"


def all_edge_sets(n: int, m: int) -> Iterator[EdgeSet]:
    """Every subset of [n]x[m], by bitmask over canonical edge order."""
    pairs = canonical_edge_order(n, m)
    for mask in range(1 << len(pairs)):
        yield EdgeSet(n, m, frozenset(e for k, e in enumerate(pairs) if mask >> k & 1))


def audit_instance(mechanism, inst: Instance, instance_id: str = "instance") -> AuditReport:
    """Audit ``inst`` under every true edge set, sharing outcomes between them."""
    mech = get_mechanism(mechanism)
    cache = OutcomeCache(mech, inst)
    report = AuditReport(mech.name, instance_id, instances_checked=1)
    for E in all_edge_sets(inst.n, inst.m):
        sub = audit_strategyproofness(mech, inst, E, instance_id=instance_id, cache=cache)
        sub.instances_checked = 0
        report.absorb(sub)
    return report


# ---------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class GridSpec:
    """Public instances of one variant over small alphabets.

    Every admissible shape ``n x m`` (``n <= max_jobs``, ``m <= max_machines``)
    contributes instances.  A shape whose full enumeration exceeds
    ``edge_set_budget // 2**(n*m)`` instances is represented by a seeded
    uniform sample of that size; each instance is audited under all of its
    ``2**(n*m)`` true edge sets.  ``max_runs`` caps total mechanism calls.
    """

    variant: Variant
    max_jobs: int = 3
    max_machines: int = 3
    values: tuple = (1, 2, 3)
    sizes: tuple = (1, 2)
    capacities: tuple = (1, 2, 3)
    edge_set_budget: int = 4096
    seed: int = 0
    max_runs: Optional[int] = None

    def shapes(self) -> list[tuple[int, int]]:
        shapes = [(n, m) for n in range(1, self.max_jobs + 1) for m in range(1, self.max_machines + 1)]
        if Variant(self.variant) is Variant.KP:
            shapes = [(n, m) for n, m in shapes if m == 1]
        return shapes


def _free_slots(variant: Variant, n: int, m: int) -> list[tuple[str, int]]:
    """(alphabet name, count) of the independent entries of an instance."""
    v = Variant(variant)
    if v is Variant.MBM:
        return []
    if v is Variant.MWBM:
        return [("values", n * m)]
    per_row_values = v in (Variant.VIGAP, Variant.MKP, Variant.KP)
    per_row_sizes = v in (Variant.SIGAP, Variant.MKP, Variant.KP)
    return [
        ("values", n if per_row_values else n * m),
        ("sizes", n if per_row_sizes else n * m),
        ("capacities", m),
    ]


def _decode(grid: GridSpec, n: int, m: int, index: int) -> Instance:
    v = Variant(grid.variant)
    slots = _free_slots(v, n, m)
    picked: dict[str, list] = {}
    for name, count in reversed(slots):
        alphabet = getattr(grid, name)
        digits = []
        for _ in range(count):
            index, d = divmod(index, len(alphabet))
            digits.append(alphabet[d])
        picked[name] = digits[::-1]

    def grid_of(name, default):
        if name not in picked:
            return [[default] * m for _ in range(n)]
        flat = picked[name]
        if len(flat) == n:
            return [[flat[i]] * m for i in range(n)]
        return [flat[i * m:(i + 1) * m] for i in range(n)]

    caps = picked.get("capacities", [1] * m)
    return Instance.create(grid_of("values", 1), grid_of("sizes", 1), caps, v)


def shape_population(grid: GridSpec, n: int, m: int) -> int:
    return math.prod(len(getattr(grid, name)) ** count for name, count in _free_slots(grid.variant, n, m))


def iter_grid(grid: GridSpec) -> Iterator[tuple[str, Instance]]:
    """Deterministic (instance id, instance) stream for ``grid``."""
    rng = random.Random(grid.seed)
    for n, m in grid.shapes():
        total = shape_population(grid, n, m)
        cap = max(1, grid.edge_set_budget >> (n * m))
        indices = range(total) if total <= cap else sorted(rng.sample(range(total), cap))
        for idx in indices:
            yield f"{Variant(grid.variant).value}-{n}x{m}-{idx}", _decode(grid, n, m, idx)


def _audit_one(name: str, item: tuple[str, Instance]) -> AuditReport:
    instance_id, inst = item
    return audit_instance(name, inst, instance_id)


def audit_grid(mechanism, grid: GridSpec, workers: int = 1) -> AuditReport:
    """Audit every grid instance under every true edge set and misreport.

    With ``workers > 1`` instances are audited in separate processes; the
    reduction is always in grid order, so results do not depend on it.
    """
    mech = get_mechanism(mechanism)
    total = AuditReport(mech.name, f"grid:{Variant(grid.variant).value}")
    items = list(iter_grid(grid))
    runs = 0
    if workers > 1 and mech.name in MECHANISMS:
        with ProcessPoolExecutor(workers) as pool:
            reports = pool.map(partial(_audit_one, mech.name), items)
            for rep in reports:
                total.absorb(rep)
        return total
    for instance_id, inst in items:
        cost = 1 << (inst.n * inst.m)
        if grid.max_runs is not None and runs + cost > grid.max_runs:
            total.complete = False
            break
        total.absorb(audit_instance(mech, inst, instance_id))
        runs += cost
    return total


def default_grid(variant: Variant, **overrides) -> GridSpec:
    """The grid used by the acceptance suite for ``variant``."""
    return GridSpec(Variant(variant), **overrides)
