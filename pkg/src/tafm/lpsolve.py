"""Exact simplex over the rationals, the GAP[E] LP family, and lexicographic
refinement of optimal solutions.

All LPs are in the form::

    maximize    c . x
    subject to  A x <= b
                0 <= x <= upper      (upper may be None: unbounded above)

The solver is a dense two-phase tableau simplex with Bland's least-index rule,
so it terminates without perturbation and is deterministic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence

from .core import EdgeSet, FractionalAssignment, Instance

ZERO = Fraction(0)
ONE = Fraction(1)


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


class UnboundedError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LinearProgram:
    objective: tuple[Fraction, ...]
    rows: tuple[tuple[tuple[Fraction, ...], Fraction], ...]
    upper: tuple[Optional[Fraction], ...]
    labels: tuple[Hashable, ...] = ()

    def __post_init__(self):
        k = len(self.objective)
        if len(self.upper) != k:
            raise ValueError("one upper bound per variable is required")
        if any(len(a) != k for a, _ in self.rows):
            raise ValueError("constraint width differs from objective width")
        if self.labels and len(self.labels) != k:
            raise ValueError("one label per variable is required")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(k)))

    @classmethod
    def create(cls, objective, rows=(), upper=None, labels=()) -> "LinearProgram":
        objective = tuple(Fraction(v) for v in objective)
        rows = tuple((tuple(Fraction(v) for v in a), Fraction(b)) for a, b in rows)
        if upper is None:
            upper = (None,) * len(objective)
        upper = tuple(None if u is None else Fraction(u) for u in upper)
        return cls(objective, rows, upper, tuple(labels))

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def value(self, point: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, point)), ZERO)

    def is_feasible(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.num_vars:
            return False
        for v, u in zip(point, self.upper):
            if v < 0 or (u is not None and v > u):
                return False
        return all(sum((a * v for a, v in zip(row, point)), ZERO) <= b for row, b in self.rows)


@dataclass(frozen=True)
class LPSolution:
    status: Status
    point: tuple[Fraction, ...] = ()
    value: Optional[Fraction] = None
    # Multipliers for each row, then for each upper bound (0 where unbounded).
    row_duals: tuple[Fraction, ...] = ()
    upper_duals: tuple[Fraction, ...] = ()

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def by_label(self, lp: LinearProgram) -> dict:
        return dict(zip(lp.labels, self.point))


def _implied_upper(lp: LinearProgram, k: int) -> bool:
    """An explicit bound x_k <= u is redundant when some row with nonnegative
    coefficients already forces it."""
    u = lp.upper[k]
    for a, b in lp.rows:
        if a[k] > 0 and b >= 0 and all(v >= 0 for v in a) and b / a[k] <= u:
            return True
    return False


def _pivot(T: list[list[Fraction]], z: list[Fraction], r: int, k: int) -> None:
    row = T[r]
    piv = row[k]
    if piv != ONE:
        inv = ONE / piv
        T[r] = row = [v * inv if v else v for v in row]
    nz = [(idx, v) for idx, v in enumerate(row) if v]
    for i, other in enumerate(T):
        if i != r:
            f = other[k]
            if f:
                for idx, v in nz:
                    other[idx] -= f * v
    f = z[k]
    if f:
        for idx, v in nz:
            z[idx] -= f * v


def _run(T, z, basis, allowed) -> None:
    rhs = len(z) - 1
    while True:
        k = next((j for j in allowed if z[j] < 0), None)
        if k is None:
            return
        best = None
        for i, row in enumerate(T):
            a = row[k]
            if a > 0:
                ratio = row[rhs] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise UnboundedError("LP is unbounded")
        r = best[1]
        _pivot(T, z, r, k)
        basis[r] = k


def _simplex(A: list[list[Fraction]], b: list[Fraction], c: list[Fraction]):
    """max c.x, A x <= b, x >= 0.  Returns (x, y) or None when infeasible."""
    nrow, nvar = len(A), len(c)
    slack0 = nvar
    flipped = [bi < 0 for bi in b]
    arts = [i for i in range(nrow) if flipped[i]]
    art0 = nvar + nrow
    ncol = nvar + nrow + len(arts)
    rhs = ncol

    T: list[list[Fraction]] = []
    basis: list[int] = []
    art_of_row = {r: art0 + t for t, r in enumerate(arts)}
    for i in range(nrow):
        sign = -1 if flipped[i] else 1
        row = [ZERO] * (ncol + 1)
        for j, a in enumerate(A[i]):
            if a:
                row[j] = sign * a
        row[slack0 + i] = Fraction(sign)
        row[rhs] = sign * b[i]
        if flipped[i]:
            row[art_of_row[i]] = ONE
            basis.append(art_of_row[i])
        else:
            basis.append(slack0 + i)
        T.append(row)

    if arts:
        # Phase 1: maximize -(sum of artificials).
        z = [ZERO] * (ncol + 1)
        for i in arts:
            for idx, v in enumerate(T[i]):
                if v:
                    z[idx] -= v
        for t in range(len(arts)):
            z[art0 + t] = ZERO
        _run(T, z, basis, range(ncol))
        if z[rhs] != 0:
            return None
        for i in range(nrow):
            if basis[i] >= art0:
                k = next((j for j in range(art0) if T[i][j]), None)
                if k is not None:
                    _pivot(T, z, i, k)
                    basis[i] = k

    cost = list(c) + [ZERO] * (ncol - nvar)
    z = [-v for v in cost] + [ZERO]
    for i in range(nrow):
        cb = cost[basis[i]]
        if cb:
            for idx, v in enumerate(T[i]):
                if v:
                    z[idx] += cb * v
    _run(T, z, basis, range(art0))

    x = [ZERO] * nvar
    for i, j in enumerate(basis):
        if j < nvar:
            x[j] = T[i][rhs]
    y = [z[slack0 + i] for i in range(nrow)]
    return x, y


def solve_lp(lp: LinearProgram) -> LPSolution:
    """Exact optimum of ``lp`` together with an optimal dual solution.

    The dual of ``max c.x, Ax <= b, x <= u, x >= 0`` is
    ``min b.y + u.w, A^T y + w >= c, y, w >= 0``; both multiplier vectors
    are returned so callers can verify strong duality exactly.
    """
    k = lp.num_vars
    A = [list(a) for a, _ in lp.rows]
    b = [bi for _, bi in lp.rows]
    bound_rows = []
    for j, u in enumerate(lp.upper):
        if u is not None and not _implied_upper(lp, j):
            row = [ZERO] * k
            row[j] = ONE
            A.append(row)
            b.append(u)
            bound_rows.append(j)
    if k == 0:
        if all(bi >= 0 for bi in b):
            return LPSolution(Status.OPTIMAL, (), ZERO, (ZERO,) * len(lp.rows), ())
        return LPSolution(Status.INFEASIBLE)
    result = _simplex(A, b, list(lp.objective))
    if result is None:
        return LPSolution(Status.INFEASIBLE)
    x, y = result
    nrows = len(lp.rows)
    upper_duals = [ZERO] * k
    for t, j in enumerate(bound_rows):
        upper_duals[j] = y[nrows + t]
    return LPSolution(
        Status.OPTIMAL,
        tuple(x),
        lp.value(x),
        tuple(y[:nrows]),
        tuple(upper_duals),
    )


def dual_violations(lp: LinearProgram, sol: LPSolution) -> list[str]:
    """Exact strong-duality check of an optimal solution; empty when it holds."""
    problems = []
    if not lp.is_feasible(sol.point):
        problems.append("primal point infeasible")
    y, w = sol.row_duals, sol.upper_duals
    if any(v < 0 for v in y) or any(v < 0 for v in w):
        problems.append("negative dual multiplier")
    for j in range(lp.num_vars):
        lhs = sum((a[j] * yi for (a, _), yi in zip(lp.rows, y)), ZERO) + w[j]
        if lhs < lp.objective[j]:
            problems.append(f"dual constraint for variable {j} violated")
    dual_value = sum((bi * yi for (_, bi), yi in zip(lp.rows, y)), ZERO)
    dual_value += sum((u * wj for u, wj in zip(lp.upper, w) if u is not None), ZERO)
    if dual_value != sol.value:
        problems.append(f"dual value {dual_value} != primal value {sol.value}")
    return problems


def _substitute(lp: LinearProgram, fixed: dict[int, Fraction], objective) -> tuple[LinearProgram, list[int]]:
    """Drop pinned variables from ``lp`` and replace its objective."""
    free = [j for j in range(lp.num_vars) if j not in fixed]
    rows = []
    for a, b in lp.rows:
        shift = sum((a[j] * v for j, v in fixed.items() if a[j]), ZERO)
        coeffs = tuple(a[j] for j in free)
        if any(coeffs):
            rows.append((coeffs, b - shift))
        elif b - shift < 0:
            rows.append((coeffs, b - shift))  # keeps the infeasibility visible
    sub = LinearProgram(
        tuple(objective[j] for j in free),
        tuple(rows),
        tuple(lp.upper[j] for j in free),
        tuple(lp.labels[j] for j in free),
    )
    return sub, free


def lex_refine(lp: LinearProgram, order: Iterable[Hashable], sense: str = "minimal") -> LPSolution:
    """Lexicographically extremal optimal solution of ``lp``.

    The objective is pinned to its optimum ``W*`` (as two inequalities), then
    each variable, taken in ``order`` (a sequence of labels), is driven to
    its least (``"minimal"``) or greatest (``"maximal"``) value over the
    remaining optimal face and fixed there.  Labels absent from the LP are
    skipped.
    """
    if sense not in ("minimal", "maximal"):
        raise ValueError(f"unknown sense {sense!r}")
    base = solve_lp(lp)
    if not base.optimal:
        return base
    W = base.value
    c = lp.objective
    face = LinearProgram(
        c,
        lp.rows + ((c, W), (tuple(-v for v in c), -W)),
        lp.upper,
        lp.labels,
    )
    index = {label: j for j, label in enumerate(lp.labels)}
    sequence = [index[label] for label in order if label in index]

    fixed: dict[int, Fraction] = {}
    current = list(base.point)  # always a point of the current face
    pos = 0
    while pos < len(sequence):
        j = sequence[pos]
        if j in fixed:
            pos += 1
            continue
        if sense == "minimal" and current[j] == 0:
            fixed[j] = ZERO
            pos += 1
            continue
        unit = [ZERO] * lp.num_vars
        unit[j] = -ONE if sense == "minimal" else ONE
        sub, free = _substitute(face, fixed, unit)
        sol = solve_lp(sub)
        if not sol.optimal:
            raise ArithmeticError("optimal face became empty during refinement")
        for t, v in zip(free, sol.point):
            current[t] = v
        fixed[j] = current[j]
        pos += 1

    if len(fixed) < lp.num_vars:
        sub, free = _substitute(face, fixed, c)
        sol = solve_lp(sub)
        for t, v in zip(free, sol.point):
            current[t] = v
    point = tuple(fixed.get(j, current[j]) for j in range(lp.num_vars))
    return LPSolution(Status.OPTIMAL, point, lp.value(point), base.row_duals, base.upper_duals)


def build_gap_lp(inst: Instance, E: EdgeSet, objective=None) -> LinearProgram:
    """The GAP[E] LP: one variable per usable edge of ``E`` in canonical order.

    ``objective`` (a mapping edge -> rational) replaces the welfare objective
    ``v_ij``; the rounding pricing step uses this.  Edges whose size exceeds
    the machine capacity are dropped, as no integral solution can use them.
    Rows without variables are omitted.
    """
    edges = [e for e in sorted(E.edges) if inst.fits(e)]
    col = {e: k for k, e in enumerate(edges)}
    k = len(edges)
    if objective is None:
        c = tuple(inst.value(e) for e in edges)
    else:
        c = tuple(Fraction(objective.get(e, 0)) for e in edges)
    rows = []
    for i in range(inst.n):
        a = [ZERO] * k
        for j in range(inst.m):
            if (i, j) in col:
                a[col[(i, j)]] = ONE
        if any(a):
            rows.append((tuple(a), ONE))
    for j in range(inst.m):
        a = [ZERO] * k
        for i in range(inst.n):
            if (i, j) in col:
                a[col[(i, j)]] = inst.sizes[i][j]
        if any(a):
            rows.append((tuple(a), inst.capacities[j]))
    return LinearProgram(c, tuple(rows), (ONE,) * k, tuple(edges))


def to_assignment(lp: LinearProgram, sol: LPSolution, n: int, m: int) -> FractionalAssignment:
    """Scatter an LP point over edge-labelled variables back into an n x m matrix."""
    return FractionalAssignment.from_dict(n, m, dict(zip(lp.labels, sol.point)))
