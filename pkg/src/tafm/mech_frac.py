"""Fractional strategyproof mechanisms for MKP, SIGAP and VIGAP, and the dual
certificate that proves the greedy ones are 2-approximate."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (
    Edge,
    EdgeSet,
    FractionalAssignment,
    Instance,
    Variant,
    canonical_edge_order,
    require_variant,
    welfare,
)
from .lpsolve import build_gap_lp, lex_refine, to_assignment

ZERO = Fraction(0)
ONE = Fraction(1)


def mkp_fractional(inst: Instance, E: EdgeSet) -> FractionalAssignment:
    """Optimal solution of MKP[E] LP, lexicographically least in canonical edge order."""
    require_variant(inst, Variant.MKP)
    lp = build_gap_lp(inst, E)
    sol = lex_refine(lp, canonical_edge_order(inst.n, inst.m), "minimal")
    return to_assignment(lp, sol, inst.n, inst.m)


@dataclass(frozen=True)
class GreedyStep:
    edge: Edge
    amount: Fraction  # fraction of the job placed on the machine
    job_exhausted: bool
    machine_filled: bool


@dataclass(frozen=True)
class GreedyTrace:
    instance: Instance
    edges: EdgeSet
    order: tuple[Edge, ...]
    steps: tuple[GreedyStep, ...]
    x: FractionalAssignment


def density_order(inst: Instance, density) -> list[Edge]:
    """All pairs by decreasing density, ties in canonical order (public data only)."""
    return sorted(canonical_edge_order(inst.n, inst.m), key=lambda e: -density(e))


def _greedy(inst: Instance, E: EdgeSet, order: list[Edge]) -> GreedyTrace:
    left = [ONE] * inst.n
    room = list(inst.capacities)
    x = [[ZERO] * inst.m for _ in range(inst.n)]
    steps = []
    for i, j in order:
        if (i, j) not in E or not inst.fits((i, j)):
            continue
        if not left[i] or not room[j]:
            continue
        s = inst.sizes[i][j]
        amount = min(left[i], room[j] / s)
        x[i][j] += amount
        left[i] -= amount
        room[j] -= amount * s
        steps.append(GreedyStep((i, j), amount, left[i] == 0, room[j] == 0))
    return GreedyTrace(
        inst, E, tuple(order), tuple(steps), FractionalAssignment(tuple(tuple(r) for r in x))
    )


def sigap_greedy_trace(inst: Instance, E: EdgeSet) -> GreedyTrace:
    require_variant(inst, Variant.SIGAP)
    order = density_order(inst, lambda e: inst.value(e) / inst.sizes[e[0]][0])
    return _greedy(inst, E, order)


def vigap_greedy_trace(inst: Instance, E: EdgeSet) -> GreedyTrace:
    require_variant(inst, Variant.VIGAP)
    order = density_order(inst, lambda e: inst.values[e[0]][0] / inst.size(e))
    return _greedy(inst, E, order)


def sigap_fractional_greedy(inst: Instance, E: EdgeSet) -> FractionalAssignment:
    """Walk the pairs by decreasing ``v_ij / s_i``; on each reported edge place as
    much of the job as fits, until the job is exhausted or the machine is full."""
    return sigap_greedy_trace(inst, E).x


def vigap_fractional_greedy(inst: Instance, E: EdgeSet) -> FractionalAssignment:
    """Same greedy walk with density ``v_i / s_ij``.

    A fraction ``phi`` of job ``i`` on machine ``j`` consumes ``phi`` of the
    job and ``phi * s_ij`` of the machine.
    """
    return vigap_greedy_trace(inst, E).x


@dataclass(frozen=True)
class DualCertificate:
    u: tuple[Fraction, ...]
    z: tuple[Fraction, ...]

    def value(self, inst: Instance) -> Fraction:
        return sum(self.u, ZERO) + sum((c * zj for c, zj in zip(inst.capacities, self.z)), ZERO)


def dual_certificate(trace: GreedyTrace) -> DualCertificate:
    """Dual solution built alongside the greedy run.

    When a step exhausts job ``i``, ``u_i`` becomes that edge's value; when it
    fills machine ``j``, ``z_j`` becomes that edge's density ``v_ij / s_ij``.
    """
    inst = trace.instance
    u = [ZERO] * inst.n
    z = [ZERO] * inst.m
    for step in trace.steps:
        i, j = step.edge
        if step.job_exhausted:
            u[i] = inst.values[i][j]
        if step.machine_filled:
            z[j] = inst.values[i][j] / inst.sizes[i][j]
    return DualCertificate(tuple(u), tuple(z))


def sigap_dual_certificate(trace: GreedyTrace) -> DualCertificate:
    return dual_certificate(trace)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_2approx(cert: DualCertificate, x: FractionalAssignment, inst: Instance, E: EdgeSet) -> Verdict:
    """Check the certificate is dual feasible for GAP[E] LP and worth at most
    twice the welfare of ``x``; by weak duality ``x`` is then within 2 of the LP."""
    if len(cert.u) != inst.n or len(cert.z) != inst.m:
        return Verdict(False, "certificate dimensions do not match the instance")
    for i, ui in enumerate(cert.u):
        if ui < 0:
            return Verdict(False, f"u[{i + 1}] = {ui} < 0")
    for j, zj in enumerate(cert.z):
        if zj < 0:
            return Verdict(False, f"z[{j + 1}] = {zj} < 0")
    for i, j in sorted(E.usable(inst).edges):
        lhs = cert.u[i] + inst.sizes[i][j] * cert.z[j]
        if lhs < inst.values[i][j]:
            return Verdict(
                False,
                f"dual constraint ({i + 1},{j + 1}) violated: u + s*z = {lhs} < v = {inst.values[i][j]}",
            )
    bound = cert.value(inst)
    w = welfare(x, inst, E)
    if bound > 2 * w:
        return Verdict(False, f"dual value {bound} exceeds twice the welfare {w}")
    return Verdict(True)
