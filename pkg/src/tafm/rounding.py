"""From fractional to integral: randomized rounding without payments.

``st_round`` is a slot-based rounder that, for any objective, returns an
integral assignment worth at least half the LP optimum.  ``decompose_scaled``
uses it as a pricing oracle to write ``x / 2`` as an exact convex
combination of integral assignments.  Drawing from that combination turns a
fractional strategyproof mechanism into an integral one that is
strategyproof in expectation, with every job's expected utility exactly half
its fractional utility.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping, Optional

from .core import (
    Assignment,
    Edge,
    EdgeSet,
    FractionalAssignment,
    InfeasibleError,
    Instance,
    OutcomeLottery,
    Variant,
    check_feasible,
    feasibility_violations,
    require_variant,
)
from .lpsolve import LinearProgram, build_gap_lp, solve_lp
from .mech_frac import vigap_fractional_greedy

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

#: Integrality gap of the GAP LP, shown constructively by :func:`st_round`.
ALPHA = Fraction(2)

#: Safety valve for column generation; desk-scale runs need a handful of rounds.
MAX_PRICING_ROUNDS = 10_000


def max_weight_matching(weights: list[list[Optional[Fraction]]]) -> dict[int, int]:
    """Maximum-weight (not necessarily perfect) bipartite matching, exactly.

    ``weights[r][c]`` is the weight of pairing row ``r`` with column ``c``,
    or ``None`` when they may not be paired.  Hungarian method on the square
    padding of the matrix, with non-edges and nonpositive weights costed at
    zero and dropped from the result.
    """
    n = len(weights)
    m = len(weights[0]) if n else 0
    k = max(n, m)
    if k == 0:
        return {}
    cost = [[ZERO] * k for _ in range(k)]
    for r in range(n):
        for c in range(m):
            w = weights[r][c]
            if w is not None and w > 0:
                cost[r][c] = -w
    u = [ZERO] * (k + 1)
    v = [ZERO] * (k + 1)
    p = [0] * (k + 1)
    way = [0] * (k + 1)
    for i in range(1, k + 1):
        p[0] = i
        j0 = 0
        minv: list[Optional[Fraction]] = [None] * (k + 1)
        used = [False] * (k + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = None
            j1 = 0
            for j in range(1, k + 1):
                if not used[j]:
                    cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                    if minv[j] is None or cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if delta is None or minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(k + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    out = {}
    for c in range(1, k + 1):
        r = p[c]
        if r and r <= n and c <= m:
            w = weights[r - 1][c - 1]
            if w is not None and w > 0:
                out[r - 1] = c - 1
    return out


def st_round(inst: Instance, E: EdgeSet, c: Mapping[Edge, Fraction]) -> Assignment:
    """Integral assignment ``z`` with ``c.z >= (1/2) max{c.x : x in GAP[E] LP}``.

    Edges with nonpositive objective are dropped first (the polytope is
    downward closed, so this loses nothing).  The LP optimum ``x`` is spread
    over ``ceil(sum_i x_ij)`` unit slots per machine, jobs taken by
    decreasing size and split at slot boundaries.  A maximum-weight
    job-slot matching is worth at least ``c.x``.  On each machine the
    first-slot job fits alone and the jobs of the later slots fit together;
    keeping the better of the two halves the guarantee at worst.
    """
    edges = [e for e in sorted(E.edges) if inst.fits(e) and c.get(e, ZERO) > 0]
    if not edges:
        return Assignment.empty(inst.n, inst.m)
    lp = build_gap_lp(inst, EdgeSet.of(inst, edges), objective=c)
    sol = solve_lp(lp)
    x = {e: v for e, v in zip(lp.labels, sol.point) if v > 0}

    slots: list[tuple[int, int]] = []  # (machine, slot number)
    slot_jobs: dict[tuple[int, int], set[int]] = {}
    for j in range(inst.m):
        jobs = sorted((i for (i, jj) in x if jj == j), key=lambda i: (-inst.sizes[i][j], i))
        k, fill = 0, ZERO
        for i in jobs:
            mass = x[(i, j)]
            while mass > 0:
                take = min(mass, ONE - fill)
                slot_jobs.setdefault((j, k), set()).add(i)
                fill += take
                mass -= take
                if fill == ONE:
                    k, fill = k + 1, ZERO
        slots.extend(sorted(s for s in slot_jobs if s[0] == j))

    weights: list[list[Optional[Fraction]]] = [[None] * len(slots) for _ in range(inst.n)]
    for col, slot in enumerate(slots):
        j = slot[0]
        for i in slot_jobs[slot]:
            weights[i][col] = c[(i, j)]
    matched = max_weight_matching(weights)

    jobs: list[Optional[int]] = [None] * inst.n
    for j in range(inst.m):
        first = [i for i, col in matched.items() if slots[col] == (j, 0)]
        rest = [i for i, col in matched.items() if slots[col][0] == j and slots[col][1] > 0]
        keep = first
        if sum((c[(i, j)] for i in rest), ZERO) > sum((c[(i, j)] for i in first), ZERO):
            keep = rest
        for i in keep:
            jobs[i] = j
    z = Assignment(tuple(jobs), inst.m)
    check_feasible(z, inst, E)
    return z


@dataclass(frozen=True)
class ScaledDecomposition:
    target: FractionalAssignment
    support: tuple[tuple[Assignment, Fraction], ...]

    def weights_total(self) -> Fraction:
        return sum((lam for _, lam in self.support), ZERO)

    def resum(self) -> FractionalAssignment:
        """``sum_l lambda_l z^l`` as a matrix."""
        n, m = self.target.n, self.target.m
        rows = [[ZERO] * m for _ in range(n)]
        for a, lam in self.support:
            for i, j in a.edges():
                rows[i][j] += lam
        return FractionalAssignment(tuple(tuple(r) for r in rows))

    def to_lottery(self) -> OutcomeLottery:
        return OutcomeLottery(self.support)


def decompose_scaled(x: FractionalAssignment, inst: Instance, E: EdgeSet) -> ScaledDecomposition:
    """Exact convex decomposition of ``x / 2`` into feasible integral assignments.

    Column generation on ``min sum(lambda)`` subject to ``sum_l lambda_l z^l >= x/2``:
    the restricted dual ``max (x/2).w`` s.t. ``w.z^l <= 1`` is priced with
    :func:`st_round` on objective ``w``; since that rounder is within a factor
    of 2 of the LP, a round with no violated column certifies
    ``sum(lambda) <= 1``.  Over-coverage of an edge is then moved onto copies
    of support points with that job unassigned, and the leftover weight goes
    to the empty assignment, so coverage ends exactly equal to ``x / 2``.
    """
    problems = feasibility_violations(x, inst, E)
    if problems:
        raise InfeasibleError("; ".join(problems))
    for e in x.support():
        if not inst.fits(e):
            raise InfeasibleError(f"x uses ({e[0] + 1},{e[1] + 1}), which no integral assignment can")
    support = _decompose(inst.sizes, inst.capacities, x.x)
    return ScaledDecomposition(x.scaled(1 / ALPHA), support)


@functools.lru_cache(maxsize=1 << 16)
def _decompose(sizes, capacities, x) -> tuple[tuple[Assignment, Fraction], ...]:
    # Only sizes, capacities and x matter: pricing replaces the values and
    # reaches edges of x's support only.
    n, m = len(x), len(capacities)
    inst = Instance(tuple((ZERO,) * m for _ in range(n)), sizes, capacities, Variant.GAP)
    edges = [(i, j) for i in range(n) for j in range(m) if x[i][j]]
    empty = Assignment.empty(n, m)
    if not edges:
        return ((empty, ONE),)
    E = EdgeSet.of(inst, edges)
    target = {e: x[e[0]][e[1]] / ALPHA for e in edges}
    columns: list[frozenset[Edge]] = [frozenset({e}) for e in edges]

    for _ in range(MAX_PRICING_ROUNDS):
        lp = LinearProgram(
            tuple(target[e] for e in edges),
            tuple((tuple(ONE if e in col else ZERO for e in edges), ONE) for col in columns),
            (None,) * len(edges),
            tuple(edges),
        )
        sol = solve_lp(lp)
        w = dict(zip(edges, sol.point))
        z = st_round(inst, E, w)
        if sum((w[e] for e in z.edges()), ZERO) <= 1:
            break
        col = frozenset(z.edges())
        if col in columns:
            raise ArithmeticError("pricing returned an existing column")
        columns.append(col)
    else:
        raise ArithmeticError("column generation did not converge")

    lam = list(sol.row_duals)
    points = [Assignment.from_edges(n, m, col) for col in columns]
    for e in edges:
        covered = sum((lam[k] for k, a in enumerate(points) if a.jobs[e[0]] == e[1]), ZERO)
        excess = covered - target[e]
        k = 0
        while excess > 0:
            if lam[k] > 0 and points[k].jobs[e[0]] == e[1]:
                moved = min(lam[k], excess)
                lam[k] -= moved
                excess -= moved
                points.append(points[k].without_job(e[0]))
                lam.append(moved)
            k += 1
    total = sum(lam, ZERO)
    if total > 1:
        raise ArithmeticError(f"decomposition weights sum to {total} > 1")
    weighted = list(zip(points, lam))
    weighted.append((empty, ONE - total))
    return OutcomeLottery.merge(weighted).support


FractionalMechanism = Callable[[Instance, EdgeSet], FractionalAssignment]


def compose_mechanism(frac_mech: FractionalMechanism, inst: Instance, E: EdgeSet) -> OutcomeLottery:
    """Lottery over integral assignments whose mean is half the fractional outcome.

    A job's expected utility is exactly half its fractional utility, so a
    strategyproof fractional mechanism yields one strategyproof in
    expectation, losing a factor 2 in welfare.
    """
    x = frac_mech(inst, E)
    return decompose_scaled(x, inst, E).to_lottery()


def ladder_depth(n: int) -> int:
    """Number of halvings ``K`` below the top value: ``ceil(2 log2 n)``, and 1 for one job.

    The smallest threshold ``v_max / 2^K <= v_max / n^2`` keeps the value lost
    on discarded edges below ``v_max / n``.
    """
    if n <= 1:
        return 1
    return (n * n - 1).bit_length()


def max_value_edge(inst: Instance, E: EdgeSet) -> Optional[Edge]:
    """Most valuable usable reported edge; ties go to the earliest in canonical order."""
    best = None
    for e in sorted(E.edges):
        if inst.fits(e) and (best is None or inst.value(e) > inst.value(best)):
            best = e
    return best


def gap_mechanism(inst: Instance, E: EdgeSet, depth: Optional[int] = None) -> OutcomeLottery:
    """Strategyproof-in-expectation mechanism for general GAP, as an exact lottery.

    With probability 1/2 the owner of the most valuable reported edge gets
    that edge and nobody else is assigned.  Otherwise that job is removed, a
    threshold ``v`` is drawn uniformly from ``v_max / 2^k``, ``k = 0..depth``;
    every remaining edge worth at least ``v`` is kept with value exactly
    ``v`` (a VIGAP instance), solved by the composed VIGAP greedy, and each
    realized pair ``i -> j`` is then cancelled with probability
    ``1 - v / v_ij`` so that it is worth exactly ``v`` in expectation.
    """
    require_variant(inst, Variant.GAP)
    n, m = inst.n, inst.m
    empty = Assignment.empty(n, m)
    star = max_value_edge(inst, E)
    if star is None:
        return OutcomeLottery.point(empty)
    top_job, top_machine = star
    v_max = inst.value(star)
    K = ladder_depth(n) if depth is None else depth

    weighted = [(Assignment.from_edges(n, m, [star]), HALF)]
    rest = E.usable(inst).without_job(top_job)
    per_threshold = HALF / (K + 1)
    for k in range(K + 1):
        v = v_max / 2**k
        flat = Instance(tuple((v,) * m for _ in range(n)), inst.sizes, inst.capacities, Variant.VIGAP)
        kept = rest.restrict(lambda e: inst.value(e) >= v)
        for a, p in compose_mechanism(vigap_fractional_greedy, flat, kept):
            for outcome, q in _cancellations(a, inst, v):
                weighted.append((outcome, per_threshold * p * q))
    return OutcomeLottery.merge(weighted)


def _cancellations(a: Assignment, inst: Instance, v: Fraction):
    """Every cancel/keep pattern over the assigned pairs, with its probability."""
    pairs = a.edges()
    options = []
    for i, j in pairs:
        keep = ONE if inst.values[i][j] == v else v / inst.values[i][j]
        options.append([(True, keep), (False, ONE - keep)])
    for pattern in product(*options):
        prob = ONE
        for _, q in pattern:
            prob *= q
        if not prob:
            continue
        jobs = list(a.jobs)
        for (i, _), (kept, _) in zip(pairs, pattern):
            if not kept:
                jobs[i] = None
        yield Assignment(tuple(jobs), a.m), prob
