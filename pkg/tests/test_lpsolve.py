from fractions import Fraction as F

import pytest
from hypothesis import given

from support import gap_lp_exact, gap_lp_float, gap_lp_vertices, instance_and_edges
from tafm.core import EdgeSet, Instance, Variant, canonical_edge_order
from tafm.lpsolve import LinearProgram, Status, build_gap_lp, dual_violations, lex_refine, solve_lp


def kp_example():
    return Instance.create([[3], [1]], [[F(3, 5)], [F(3, 5)]], [1], Variant.KP), EdgeSet.full(2, 1)


def test_two_variable_lp():
    lp = LinearProgram.create([2, 1], [([1, 1], 1)], upper=[1, 1])
    sol = solve_lp(lp)
    assert sol.status is Status.OPTIMAL
    assert sol.point == (1, 0) and sol.value == 2
    assert dual_violations(lp, sol) == []


def test_empty_edge_set_lp():
    inst, _ = kp_example()
    lp = build_gap_lp(inst, EdgeSet.empty(2, 1))
    sol = solve_lp(lp)
    assert sol.value == 0 and sol.point == ()


def test_kp_example():
    inst, E = kp_example()
    lp = build_gap_lp(inst, E)
    sol = solve_lp(lp)
    assert sol.point == (1, F(2, 3)) and sol.value == F(11, 3)
    assert dual_violations(lp, sol) == []
    assert lex_refine(lp, canonical_edge_order(2, 1)).point == (1, F(2, 3))


def test_infeasible_lp_detected():
    lp = LinearProgram.create([1], [([-1], -2)], upper=[1])
    assert solve_lp(lp).status is Status.INFEASIBLE


def test_structure_1x1():
    inst = Instance.create([[1]], [[1]], [1])
    lp = build_gap_lp(inst, EdgeSet.full(1, 1))
    assert lp.num_vars == 1 and len(lp.rows) == 2


def test_mwbm_machine_rows_have_unit_coefficients():
    inst = Instance.create([[1, 2], [3, 1]], [[1, 1], [1, 1]], [1, 1], Variant.MWBM)
    lp = build_gap_lp(inst, EdgeSet.full(2, 2))
    assert all(set(coeffs) <= {0, 1} for coeffs, _ in lp.rows)


def test_oversized_edge_dropped():
    inst = Instance.create([[5, 1]], [[2, 1]], [1, 1])
    lp = build_gap_lp(inst, EdgeSet.full(1, 2))
    assert lp.labels == ((0, 1),)


def test_lex_refine_symmetric_matchings():
    inst = Instance.create([[1, 1], [1, 1]], [[1, 1], [1, 1]], [1, 1], Variant.MBM)
    lp = build_gap_lp(inst, EdgeSet.full(2, 2))
    low = lex_refine(lp, canonical_edge_order(2, 2), "minimal")
    high = lex_refine(lp, canonical_edge_order(2, 2), "maximal")
    assert low.point == (0, 1, 1, 0)
    assert high.point == (1, 0, 0, 1)
    assert low.value == high.value == 2


def test_lex_refine_identical_jobs():
    inst = Instance.create([[1], [1]], [[1], [1]], [1], Variant.KP)
    lp = build_gap_lp(inst, EdgeSet.full(2, 1))
    assert lex_refine(lp, canonical_edge_order(2, 1), "minimal").point == (0, 1)
    assert lex_refine(lp, canonical_edge_order(2, 1), "maximal").point == (1, 0)


@given(instance_and_edges(Variant.GAP))
def test_optimum_matches_highs_and_duality(pair):
    inst, E = pair
    lp = build_gap_lp(inst, E)
    sol = solve_lp(lp)
    assert sol.optimal
    assert lp.is_feasible(sol.point) and lp.value(sol.point) == sol.value
    assert dual_violations(lp, sol) == []
    assert abs(float(sol.value) - gap_lp_float(inst, E)) < 1e-7


@given(instance_and_edges(Variant.GAP, 2, 2))
def test_optimum_matches_vertex_enumeration(pair):
    inst, E = pair
    assert solve_lp(build_gap_lp(inst, E)).value == gap_lp_exact(inst, E)


@given(instance_and_edges(Variant.GAP, 2, 2))
def test_lex_refine_is_extremal_among_optimal_vertices(pair):
    # Lexicographic order over a polytope is attained at a vertex; compare
    # against every optimal vertex from exact enumeration.
    inst, E = pair
    lp = build_gap_lp(inst, E)
    edges, verts = gap_lp_vertices(inst, E)
    assert list(lp.labels) == edges
    if not edges:
        return
    opt = max(sum(inst.value(e) * v for e, v in zip(edges, x)) for x in verts)
    optimal = [x for x in verts if sum(inst.value(e) * v for e, v in zip(edges, x)) == opt]
    order = canonical_edge_order(inst.n, inst.m)
    low = lex_refine(lp, order, "minimal")
    high = lex_refine(lp, order, "maximal")
    assert low.value == high.value == opt
    assert low.point == min(optimal)
    assert high.point == max(optimal)


def test_lex_refine_is_deterministic():
    inst, E = kp_example()
    lp = build_gap_lp(inst, E)
    assert lex_refine(lp, [(1, 0), (0, 0)]) == lex_refine(lp, [(1, 0), (0, 0)])


def test_bad_sense():
    inst, E = kp_example()
    with pytest.raises(ValueError):
        lex_refine(build_gap_lp(inst, E), [(0, 0)], "sideways")
