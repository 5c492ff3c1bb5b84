"""Smoke tests for the python bindings: one pass over every exposed surface."""

import math

import pytest

import vnnarena as va

IDENTITY_1 = "inputs 1\noutputs 1\ndense 1 1\n1\n0\n"
RELU_222 = (
    "inputs 2\noutputs 2\n"
    "dense 2 2\n1 -1\n1 1\n0 -1\n"
    "relu\n"
    "dense 2 2\n1 0.5\n-1 1\n0.25 -0.25\n"
)
PROP = (
    "(declare-const X_0 Real)(declare-const Y_0 Real)"
    "(assert (>= X_0 0.0))(assert (<= X_0 1.0))(assert (>= Y_0 0.5))"
)


def test_parse_and_print_round_trip():
    q = va.parse_vnnlib(PROP)
    assert q.num_inputs == 1
    assert q.num_outputs == 1
    assert len(q.disjuncts) == 1
    assert q.disjuncts[0].box.lower == [0.0]
    back = va.parse_vnnlib(va.print_vnnlib(q))
    assert back == q


def test_robustness_builder():
    q = va.make_robustness_query([0.5, 0.5], 0.1, 0, 3)
    assert len(q.disjuncts) == 2
    assert q.disjuncts[0].box.lower == [0.4, 0.4]


def test_network_evaluation_and_gradient():
    net = va.load_network_text(RELU_222)
    assert net.d_in == 2
    assert net.d_out == 2
    assert va.evaluate(net, [1.0, 1.0]) == [0.75, 0.75]
    grad = va.input_gradient(net, [1.0, 1.25], 0)
    assert len(grad) == 2
    for g in grad:
        assert math.isfinite(g)


def test_unsupported_operator_raises():
    with pytest.raises(va.HarnessError):
        va.parse_vnnlib("(assert (< X_0 1.0))")


def test_ibp_bounds():
    net = va.load_network_text(IDENTITY_1)
    lower, upper = va.ibp_bounds(net, va.InputBox([0.0], [1.0]))
    assert lower == [0.0]
    assert upper == [1.0]


def test_verify_sat_and_unsat():
    net = va.load_network_text(IDENTITY_1)
    out = va.verify(net, va.parse_vnnlib(PROP))
    assert out.status == "sat"
    assert out.witness is not None
    report = va.validate_witness(out.witness, va.parse_vnnlib(PROP), net)
    assert report.verdict == va.Verdict.Valid

    unsat_prop = PROP.replace("0.5", "2.0")
    out2 = va.verify(net, va.parse_vnnlib(unsat_prop))
    assert out2.status == "unsat"


def test_witness_parse_and_print():
    w = va.parse_witness("((X_0 0.25) (X_1 0.5))")
    assert w.x == [0.25, 0.5]
    assert "X_1" in va.print_witness(w)


def test_scoring_surface():
    rules = va.RuleSet.r2021()
    records = [
        va.VerdictRecord("a", "b", 0, va.RunStatus.Sat, 1.0),
        va.VerdictRecord("b", "b", 0, va.RunStatus.Sat, 1.5),
        va.VerdictRecord("c", "b", 0, va.RunStatus.Unsat, 2.0),
    ]
    truth = va.derive_ground_truth(records, rules)
    assert truth.label == va.TruthLabel.Sat
    assert va.score_instance(records[0], truth, rules) == 10

    # base: a +10, b +10, c -100; bonuses: a +2 (fastest), b +1
    table = va.build_score_table(records, [truth], rules)
    assert table["ranking"][0] == "a"
    assert table["points"][("a", "b")] == 12.0
    assert table["points"][("b", "b")] == 11.0
    assert table["percent"][("a", "b")] == 100.0
    assert abs(table["totals"]["c"] - 100.0 * -100 / 12) < 1e-9
