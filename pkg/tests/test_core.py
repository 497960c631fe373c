from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from support import instance_and_edges
from tafm.core import (
    Assignment,
    EdgeSet,
    FractionalAssignment,
    InfeasibleError,
    Instance,
    OutcomeLottery,
    Variant,
    as_rational,
    canonical_edge_order,
    format_rational,
    parse_rational,
    specializes,
    utility,
    validate,
    welfare,
)
from tafm.fixtures import fig2_b, intro_instance


def test_mkp_with_row_varying_values_is_rejected():
    inst = Instance.create([[2, 3]], [[1, 1]], [1, 1], Variant.MKP)
    problems = validate(inst)
    assert problems and problems[0].field == "values" and problems[0].index == (0, 1)


def test_unit_mwbm_is_valid():
    inst = Instance.create([[1, 5], [2, 2]], [[1, 1], [1, 1]], [1, 1], Variant.MWBM)
    assert validate(inst) == []


def test_zero_capacity_is_rejected():
    inst = Instance.create([[1, 1]], [[1, 1]], [1, 0], Variant.GAP)
    assert [(v.field, v.index) for v in validate(inst)] == [("capacities", (1,))]


def test_negative_value_and_nonpositive_size():
    inst = Instance.create([[-1]], [[0]], [1])
    assert {v.field for v in validate(inst)} == {"values", "sizes"}


def test_kp_needs_one_machine():
    inst = Instance.create([[1, 1]], [[1, 1]], [1, 1], Variant.KP)
    assert any("one machine" in v.constraint for v in validate(inst))


def test_variant_lattice():
    assert specializes(Variant.MBM, Variant.MWBM)
    assert specializes(Variant.MBM, Variant.MKP)
    assert specializes(Variant.KP, Variant.MKP)
    assert specializes(Variant.MKP, Variant.SIGAP) and specializes(Variant.MKP, Variant.VIGAP)
    assert specializes(Variant.MWBM, Variant.SIGAP)
    assert not specializes(Variant.MWBM, Variant.VIGAP)
    assert all(specializes(v, Variant.GAP) for v in Variant)


def test_floats_refused():
    with pytest.raises(TypeError):
        as_rational(0.5)
    with pytest.raises(ValueError):
        parse_rational("0.5")
    with pytest.raises(ValueError):
        parse_rational("1e3")


@given(st.fractions())
def test_rational_round_trip(q):
    assert parse_rational(format_rational(q)) == q


def test_welfare_of_empty():
    fx = intro_instance()
    assert welfare(FractionalAssignment.zeros(2, 2), fx.instance, EdgeSet.empty(2, 2)) == 0


def test_intro_welfare_values():
    fx = intro_instance("1/4")
    a = Assignment.from_edges(2, 2, [(0, 0)])
    assert welfare(a, fx.instance, fx.edges) == F(5, 4)
    b = Assignment.from_edges(2, 2, [(0, 1), (1, 0)])
    assert welfare(b, fx.instance, fx.edges) == 2


def test_welfare_rejects_infeasible():
    fx = intro_instance()
    over = FractionalAssignment.from_dict(2, 2, {(0, 0): 1, (1, 0): F(1, 2)})
    with pytest.raises(InfeasibleError):
        welfare(over, fx.instance, fx.edges)
    off_graph = Assignment.from_edges(2, 2, [(1, 1)])
    with pytest.raises(InfeasibleError):
        welfare(off_graph, fx.instance, fx.edges)


def test_utility_counts_true_edges_only():
    fx = fig2_b(2)
    # Job 2 placed on machine b, an edge it did not truly have.
    a = Assignment.from_edges(2, 2, [(1, 1)])
    assert utility(1, a, fx.edges, fx.instance) == 0
    assert utility(1, Assignment.from_edges(2, 2, [(1, 0)]), fx.edges, fx.instance) == 2


def test_lottery_utility_is_expectation():
    inst = Instance.create([[4]], [[1]], [1])
    E = EdgeSet.full(1, 1)
    lot = OutcomeLottery(((Assignment.from_edges(1, 1, [(0, 0)]), F(1, 2)), (Assignment.empty(1, 1), F(1, 2))))
    assert utility(0, lot, E, inst) == 2


def test_lottery_validation():
    a = Assignment.empty(1, 1)
    with pytest.raises(ValueError):
        OutcomeLottery(((a, F(1, 2)),))
    with pytest.raises(ValueError):
        OutcomeLottery(((a, F(0)), (a, F(1))))


def test_lottery_sample_is_seeded_and_in_support():
    a, b = Assignment.empty(1, 1), Assignment.from_edges(1, 1, [(0, 0)])
    lot = OutcomeLottery.merge([(a, F(1, 3)), (b, F(2, 3))])
    draws = [lot.sample(s) for s in range(50)]
    assert draws == [lot.sample(s) for s in range(50)]
    assert set(draws) == {a, b}


def test_canonical_order():
    assert canonical_edge_order(1, 1) == [(0, 0)]
    assert canonical_edge_order(2, 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]


@given(instance_and_edges(Variant.GAP))
def test_canonical_order_ignores_data(pair):
    inst, E = pair
    assert canonical_edge_order(inst.n, inst.m) == sorted(canonical_edge_order(inst.n, inst.m))
    assert len(canonical_edge_order(inst.n, inst.m)) == inst.n * inst.m


@given(instance_and_edges(Variant.GAP, 2, 2), st.fractions(0, 1))
def test_welfare_linear_and_lottery_expansion(pair, lam):
    inst, E = pair
    xs = [a for a in _some_feasible(inst, E)]
    x, y = xs[0].to_fractional(), xs[-1].to_fractional()
    mix = FractionalAssignment(
        tuple(tuple(lam * a + (1 - lam) * b for a, b in zip(r1, r2)) for r1, r2 in zip(x.x, y.x))
    )
    assert welfare(mix, inst, E) == lam * welfare(x, inst, E) + (1 - lam) * welfare(y, inst, E)
    if 0 < lam < 1 and xs[0] != xs[-1]:
        lot = OutcomeLottery(((xs[0], lam), (xs[-1], 1 - lam)))
        for i in range(inst.n):
            direct = lam * utility(i, xs[0], E, inst) + (1 - lam) * utility(i, xs[-1], E, inst)
            assert utility(i, lot, E, inst) == direct
        assert lot.expectation() == mix


def _some_feasible(inst, E):
    from support import all_integral

    return list(all_integral(inst, E))


def test_edge_set_slices():
    E = EdgeSet(2, 3, frozenset({(0, 0), (0, 2), (1, 1)}))
    assert E.job_edges(0) == {(0, 0), (0, 2)}
    assert E.without_job(0).edges == {(1, 1)}
    assert E.with_report(0, [1]).edges == {(0, 1), (1, 1)}
    assert E.job_edges(0) | E.job_edges(1) == E.edges
    with pytest.raises(ValueError):
        EdgeSet(1, 1, frozenset({(1, 0)}))
