import json
from fractions import Fraction as F

import pytest
from hypothesis import given

from support import instance_and_edges
from tafm.cli import generate, main, parse_alphabet, parse_grid
from tafm.core import EdgeSet, FractionalAssignment, Instance, Variant, validate
from tafm.fileformat import (
    FormatError,
    dumps,
    emit_instance,
    fractional_from_dict,
    fractional_to_dict,
    parse_instance,
)
from tafm.fixtures import empty, fig2_a, intro_instance, single


@pytest.fixture
def files(tmp_path):
    def write(name, inst, E):
        p = tmp_path / name
        p.write_text(emit_instance(inst, E))
        return str(p)

    out = {
        "intro": write("intro.json", *intro_instance("1/4")[1:]),
        "fig2": write("fig2.json", *fig2_a(2)[1:]),
        "empty": write("empty.json", *empty()[1:]),
        "one": write("one.json", *single()[1:]),
        "kp2": write(
            "kp2.json",
            Instance.create([[3], [1]], [[F(3, 5)], [F(3, 5)]], [1], Variant.KP),
            EdgeSet.full(2, 1),
        ),
        "sigap": write(
            "sigap.json",
            Instance.create([[5, 3], [4, 0]], [[1, 1], [1, 1]], [1, 1], Variant.SIGAP),
            EdgeSet(2, 2, frozenset({(0, 0), (0, 1), (1, 0)})),
        ),
    }
    for name, x in (("one_x", {(0, 0): 1}), ("zero_x", {})):
        p = tmp_path / f"{name}.json"
        p.write_text(dumps(fractional_to_dict(FractionalAssignment.from_dict(1, 1, x))))
        out[name] = str(p)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def structured(capsys, *argv):
    code, out = run(capsys, "--format", "structured", *argv)
    return code, json.loads(out.out)


@given(instance_and_edges(Variant.GAP))
def test_file_round_trip(pair):
    inst, E = pair
    assert parse_instance(emit_instance(inst, E)) == (inst, E)


def test_rationals_written_as_strings():
    inst = Instance.create([[F(5, 4)]], [[F(3, 5)]], [1], Variant.KP)
    doc = json.loads(emit_instance(inst, EdgeSet.full(1, 1)))
    assert doc["values"] == [["5/4"]] and doc["sizes"] == [["3/5"]] and doc["capacities"] == [1]
    assert doc["edges"] == [[1, 1]] and doc["format_version"] == "tafm-1"


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(format_version="tafm-0"),
        lambda d: d.update(values=[[0.5]]),
        lambda d: d.update(values=[["1.5"]]),
        lambda d: d.update(edges=[[0, 1]]),
        lambda d: d.update(edges=[[2, 1]]),
        lambda d: d.update(variant="LP"),
        lambda d: d.update(capacities=[0]),
        lambda d: d.update(n=2),
    ],
)
def test_parse_rejects(mutate):
    doc = json.loads(emit_instance(*single()[1:]))
    mutate(doc)
    with pytest.raises(FormatError):
        parse_instance(json.dumps(doc))


def test_fractional_round_trip():
    x = FractionalAssignment.from_dict(2, 2, {(0, 1): F(1, 3), (1, 0): 1})
    assert fractional_from_dict(json.loads(dumps(fractional_to_dict(x)))) == x


def test_solve_intro_greedy(capsys, files):
    code, doc = structured(capsys, "solve", files["intro"], "--mechanism", "mwbm_greedy")
    assert code == 0 and doc["assignment"] == [1, None] and doc["welfare"] == "5/4"
    code, out = run(capsys, "solve", files["intro"], "--mechanism", "mwbm_greedy")
    assert "job 1 -> machine 1" in out.out and "welfare: 5/4" in out.out


def test_solve_empty_mbm(capsys, files):
    code, doc = structured(capsys, "solve", files["empty"], "--mechanism", "mbm")
    assert code == 0 and doc["assignment"] == [None, None] and doc["welfare"] == "0"


def test_solve_kp_fractional(capsys, files):
    code, doc = structured(capsys, "solve", files["kp2"], "--mechanism", "mkp_fractional")
    assert code == 0 and doc["x"] == [[1], ["2/3"]] and doc["welfare"] == "11/3"


def test_solve_sigap_prints_certificate(capsys, files):
    code, doc = structured(capsys, "solve", files["sigap"], "--mechanism", "sigap_fractional_greedy")
    cert = doc["dual_certificate"]
    assert code == 0 and cert["u"] == ["5", "0"] and cert["z"] == ["5", "0"] and cert["valid"]
    code, out = run(capsys, "solve", files["sigap"], "--mechanism", "sigap_fractional_greedy")
    assert "certifies ratio <= 2" in out.out


def test_solve_emit_modes_and_seed(capsys, files):
    code, doc = structured(capsys, "solve", files["kp2"], "--mechanism", "compose_mkp")
    assert sum(F(o["probability"]) for o in doc["lottery"]) == 1
    probs = [F(o["probability"]) for o in doc["lottery"]]
    assert probs == sorted(probs, reverse=True)
    a = structured(capsys, "solve", files["kp2"], "--mechanism", "compose_mkp", "--emit", "assignment", "--seed", "7")
    b = structured(capsys, "solve", files["kp2"], "--mechanism", "compose_mkp", "--emit", "assignment", "--seed", "7")
    assert a == b
    _, doc = structured(capsys, "solve", files["kp2"], "--mechanism", "mkp_fractional", "--emit", "lottery")
    assert doc["welfare"] == "11/6"


def test_solve_variant_mismatch(capsys, files):
    code, out = run(capsys, "solve", files["kp2"], "--mechanism", "mbm")
    assert code == 2 and "MBM" in out.err


def test_solve_parse_failure(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out = run(capsys, "solve", str(bad), "--mechanism", "mbm")
    assert code == 2 and "error" in out.err


def test_audit_exit_codes(capsys, files):
    code, out = run(capsys, "audit", files["fig2"], "--mechanism", "mwbm_optimal_baseline")
    assert code == 1 and "witness:" in out.out
    code, doc = structured(capsys, "audit", files["intro"], "--mechanism", "mwbm_optimal_baseline")
    assert code == 1 and doc["verdict"] == "violated"
    assert {"job": 1, "misreport": [1], "honest_utility": "1", "deviant_utility": "5/4"}.items() <= doc["witnesses"][0].items()
    code, _ = run(capsys, "audit", files["fig2"], "--mechanism", "mwbm_greedy")
    assert code == 0
    code, _ = run(capsys, "audit", files["fig2"], "--mechanism", "mwbm_greedy", "--all-edge-sets")
    assert code == 0
    code, _ = run(capsys, "audit", "--mechanism", "mwbm_greedy")
    assert code == 2
    code, _ = run(capsys, "audit", "--grid", "n=oops", "--mechanism", "mwbm_greedy")
    assert code == 2


def test_audit_small_grid(capsys):
    code, doc = structured(capsys, "audit", "--grid", "small", "--mechanism", "mwbm_greedy")
    assert code == 0 and doc["verdict"] == "truthful" and F(doc["ratio"]["max"]) <= 2
    code, doc = structured(capsys, "audit", "--grid", "small", "--mechanism", "gap_mechanism")
    assert code == 0 and doc["witness_count"] == 0


def test_parse_grid():
    g = parse_grid("n=2,m=1,budget=64,values=1|5/2", Variant.GAP)
    assert (g.max_jobs, g.max_machines, g.edge_set_budget, g.values) == (2, 1, 64, (1, F(5, 2)))
    assert parse_grid("tiny", Variant.MBM).max_jobs == 2


def test_decompose(capsys, files):
    code, doc = structured(capsys, "decompose", files["one"], files["one_x"])
    assert code == 0 and doc["exact"] and sorted(s["weight"] for s in doc["support"]) == ["1/2", "1/2"]
    code, doc = structured(capsys, "decompose", files["one"], files["zero_x"])
    assert doc["support"] == [{"weight": "1", "assignment": [None]}]
    code, out = run(capsys, "decompose", files["one"], files["one_x"])
    assert "re-summation equals x/2: yes" in out.out


def test_gen_deterministic_and_valid(capsys, tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"g{k}.json"
        assert main(["gen", "--variant", "MBM", "--n", "3", "--m", "3", "--seed", "11", "-o", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    for v in Variant:
        m = 1 if v is Variant.KP else 3
        inst, E = generate(v, 3, m, 5, parse_alphabet("values=1,2,3;sizes=1,2;capacities=1,2,3"))
        assert validate(inst) == [] and inst.variant is v
    capsys.readouterr()
    code, _ = run(capsys, "gen", "--variant", "KP", "--n", "2", "--m", "2")
    assert code == 2


def test_version(capsys):
    code, out = run(capsys, "version")
    assert code == 0 and "tafm-1" in out.out
