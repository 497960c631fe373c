"""Strategyproof matching mechanisms and the manipulable optimal baseline."""

from __future__ import annotations

from typing import Iterable

from .core import Assignment, Edge, EdgeSet, Instance, Variant, canonical_edge_order, require_variant
from .lpsolve import build_gap_lp, lex_refine


def max_matching(n: int, m: int, edges: Iterable[Edge]) -> dict[int, int]:
    """Maximum-cardinality bipartite matching by augmenting paths (Kuhn).

    Returns job -> machine.  Jobs are scanned in index order and each job's
    machines in index order, so the result is deterministic.
    """
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in sorted(edges):
        adj[i].append(j)
    owner: list = [None] * m

    def augment(i: int, visited: list[bool]) -> bool:
        for j in adj[i]:
            if not visited[j]:
                visited[j] = True
                if owner[j] is None or augment(owner[j], visited):
                    owner[j] = i
                    return True
        return False

    for i in range(n):
        augment(i, [False] * m)
    return {i: j for j, i in enumerate(owner) if i is not None}


def matching_size(n: int, m: int, edges: Iterable[Edge]) -> int:
    return len(max_matching(n, m, edges))


def mbm_mechanism(inst: Instance, E: EdgeSet) -> Assignment:
    """The lexicographically least maximum matching of ``E``.

    Matchings are compared as 0/1 vectors in canonical edge order.  Starting
    from ``X = E``, each edge in that order is discarded whenever ``X``
    without it still has a matching of maximum size.  What survives is a
    matching (each remaining edge belongs to every maximum matching of X).
    """
    require_variant(inst, Variant.MBM)
    X = set(E.edges)
    best = matching_size(inst.n, inst.m, X)
    for e in canonical_edge_order(inst.n, inst.m):
        if e in X:
            X.discard(e)
            if matching_size(inst.n, inst.m, X) < best:
                X.add(e)
    return Assignment.from_edges(inst.n, inst.m, X)


def greedy_order(inst: Instance) -> list[Edge]:
    """All pairs of [n]x[m] by decreasing value; ties in canonical order.

    Built from public values only, never from reports.
    """
    return sorted(canonical_edge_order(inst.n, inst.m), key=lambda e: -inst.value(e))


def mwbm_greedy(inst: Instance, E: EdgeSet) -> Assignment:
    """Greedy matching over a report-independent value order; 2-approximate."""
    require_variant(inst, Variant.MWBM)
    jobs_used, machines_used = set(), set()
    chosen = []
    for i, j in greedy_order(inst):
        if (i, j) in E and i not in jobs_used and j not in machines_used:
            chosen.append((i, j))
            jobs_used.add(i)
            machines_used.add(j)
    return Assignment.from_edges(inst.n, inst.m, chosen)


def mwbm_optimal_baseline(inst: Instance, E: EdgeSet) -> Assignment:
    """A maximum-weight matching of the reports: optimal but manipulable.

    Solved as the (integral) matching LP, with ties resolved towards the
    lexicographically least optimal vertex.
    """
    require_variant(inst, Variant.MWBM)
    lp = build_gap_lp(inst, E)
    sol = lex_refine(lp, canonical_edge_order(inst.n, inst.m), "minimal")
    chosen = [e for e, v in zip(lp.labels, sol.point) if v == 1]
    if any(v not in (0, 1) for v in sol.point):
        raise ArithmeticError("matching LP returned a fractional vertex")
    return Assignment.from_edges(inst.n, inst.m, chosen)
