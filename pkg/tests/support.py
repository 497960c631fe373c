"""Independent oracles and hypothesis strategies shared by the test modules.

Nothing here calls the package's solvers: LP optima come from scipy's HiGHS
(float, compared with a tolerance) or from exact vertex enumeration, and
matchings from plain enumeration.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st
from scipy.optimize import linprog

from tafm.core import Assignment, EdgeSet, Instance, Variant, canonical_edge_order

VALUES = (1, 2, 3)
SIZES = (1, 2)
CAPS = (1, 2, 3)


# ---------------------------------------------------------------------------
# LP oracles

def gap_lp_float(inst: Instance, E: EdgeSet, objective=None) -> float:
    """max c.x over GAP[E] LP (edges that cannot fit dropped), via HiGHS."""
    edges = [e for e in sorted(E.edges) if inst.fits(e)]
    if not edges:
        return 0.0
    c = [float(objective[e] if objective is not None else inst.value(e)) for e in edges]
    A, b = [], []
    for i in range(inst.n):
        A.append([1.0 if e[0] == i else 0.0 for e in edges])
        b.append(1.0)
    for j in range(inst.m):
        A.append([float(inst.size(e)) if e[1] == j else 0.0 for e in edges])
        b.append(float(inst.capacities[j]))
    res = linprog(-np.array(c), A_ub=np.array(A), b_ub=np.array(b), bounds=[(0, 1)] * len(edges), method="highs")
    assert res.status == 0
    return -res.fun


def _solve_exact(rows, rhs):
    """Gauss-Jordan over Fractions; None if singular."""
    k = len(rows)
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(k):
        piv = next((r for r in range(col, k) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(k):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[r][k] for r in range(k)]


def lp_vertices(A, b, d):
    """All vertices of {x >= 0 : A x <= b} in dimension d, exactly."""
    cons = [(list(r), Fraction(v)) for r, v in zip(A, b)]
    cons += [([Fraction(-1) if t == k else Fraction(0) for t in range(d)], Fraction(0)) for k in range(d)]
    seen = set()
    for tight in itertools.combinations(range(len(cons)), d):
        x = _solve_exact([cons[t][0] for t in tight], [cons[t][1] for t in tight])
        if x is None:
            continue
        if all(sum(a * v for a, v in zip(r, x)) <= rhs for r, rhs in cons):
            t = tuple(x)
            if t not in seen:
                seen.add(t)
                yield t


def gap_lp_vertices(inst: Instance, E: EdgeSet):
    """(edge list, vertex list) of GAP[E] LP, including the x <= 1 box."""
    edges = [e for e in sorted(E.edges) if inst.fits(e)]
    d = len(edges)
    A, b = [], []
    for i in range(inst.n):
        A.append([Fraction(1 if e[0] == i else 0) for e in edges])
        b.append(1)
    for j in range(inst.m):
        A.append([inst.size(e) if e[1] == j else Fraction(0) for e in edges])
        b.append(inst.capacities[j])
    for k in range(d):
        A.append([Fraction(1 if t == k else 0) for t in range(d)])
        b.append(1)
    return edges, list(lp_vertices(A, b, d))


def gap_lp_exact(inst: Instance, E: EdgeSet, objective=None) -> Fraction:
    edges, verts = gap_lp_vertices(inst, E)
    if not edges:
        return Fraction(0)
    c = [objective[e] if objective is not None else inst.value(e) for e in edges]
    return max(sum((ci * v for ci, v in zip(c, x)), Fraction(0)) for x in verts)


# ---------------------------------------------------------------------------
# combinatorial oracles

def all_matchings(n, m, edges):
    edges = sorted(edges)
    out = []
    for r in range(min(n, m) + 1):
        for combo in itertools.combinations(edges, r):
            if len({i for i, _ in combo}) == r and len({j for _, j in combo}) == r:
                out.append(frozenset(combo))
    return out


def indicator(n, m, edges):
    return tuple(int(e in edges) for e in canonical_edge_order(n, m))


def all_integral(inst: Instance, E: EdgeSet):
    """Every feasible integral assignment on E (plain product enumeration)."""
    choices = [[None] + sorted(E.machines_of(i)) for i in range(inst.n)]
    for jobs in itertools.product(*choices):
        load = [Fraction(0)] * inst.m
        for i, j in enumerate(jobs):
            if j is not None:
                load[j] += inst.sizes[i][j]
        if all(l <= c for l, c in zip(load, inst.capacities)):
            yield Assignment(tuple(jobs), inst.m)


def integral_opt(inst: Instance, E: EdgeSet) -> Fraction:
    return max(sum((inst.values[i][j] for i, j in a.edges()), Fraction(0)) for a in all_integral(inst, E))


# ---------------------------------------------------------------------------
# strategies

@st.composite
def instances(draw, variant: Variant, max_n=3, max_m=3):
    variant = Variant(variant)
    n = draw(st.integers(1, max_n))
    m = 1 if variant is Variant.KP else draw(st.integers(1, max_m))
    val = st.sampled_from(VALUES)
    siz = st.sampled_from(SIZES)
    row_v = variant in (Variant.VIGAP, Variant.MKP, Variant.KP)
    row_s = variant in (Variant.SIGAP, Variant.MKP, Variant.KP)

    def matrix(elem, per_row):
        if per_row:
            return [[x] * m for x in draw(st.lists(elem, min_size=n, max_size=n))]
        return [draw(st.lists(elem, min_size=m, max_size=m)) for _ in range(n)]

    if variant is Variant.MBM:
        values, sizes, caps = [[1] * m] * n, [[1] * m] * n, [1] * m
    elif variant is Variant.MWBM:
        values, sizes, caps = matrix(val, False), [[1] * m] * n, [1] * m
    else:
        values = matrix(val, row_v)
        sizes = matrix(siz, row_s)
        caps = draw(st.lists(st.sampled_from(CAPS), min_size=m, max_size=m))
    return Instance.create(values, sizes, caps, variant)


@st.composite
def edge_sets(draw, inst: Instance):
    pairs = canonical_edge_order(inst.n, inst.m)
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return EdgeSet(inst.n, inst.m, frozenset(e for e, keep in zip(pairs, mask) if keep))


@st.composite
def instance_and_edges(draw, variant: Variant, max_n=3, max_m=3):
    inst = draw(instances(variant, max_n, max_m))
    return inst, draw(edge_sets(inst))


# ---------------------------------------------------------------------------
# acceptance report lines, printed in the terminal summary

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {title} | {detail}")
