import itertools

import numpy as np
import pytest

from sensemaking import oracle
from sensemaking.bayesnet import (
    Cpt,
    Variable,
    build_network,
    elimination_order,
    evidence_probability,
    posterior,
    posteriors,
    prior_marginals,
)
from sensemaking.errors import (
    CycleDetected,
    DuplicateVariable,
    ImpossibleEvidence,
    MissingCpt,
    RowNotNormalized,
    UnknownParent,
    UnknownState,
    UnknownVariable,
    ValidationError,
)

B = ("1", "0")


def chain():
    v = [Variable(n, B) for n in ("Traffic_Accident", "Explosion", "Injury")]
    c = [
        Cpt("Traffic_Accident", (), {(): (0.7, 0.3)}),
        Cpt("Explosion", ("Traffic_Accident",), {("1",): (0.8, 0.2), ("0",): (0.3, 0.7)}),
        Cpt("Injury", ("Explosion",), {("1",): (0.9, 0.1), ("0",): (0.4, 0.6)}),
    ]
    return build_network(v, c)


def test_chain_builds_with_two_edges():
    net = chain()
    assert set(net.edges) == {("Traffic_Accident", "Explosion"), ("Explosion", "Injury")}
    assert net.names == ("Explosion", "Injury", "Traffic_Accident")


def test_single_node():
    net = build_network([Variable("X", B)], [Cpt("X", (), {(): (0.5, 0.5)})])
    assert prior_marginals(net)["X"].probs == (0.5, 0.5)


def test_two_cycle_rejected():
    v = [Variable("A", B), Variable("B", B)]
    rows = {("1",): (0.5, 0.5), ("0",): (0.5, 0.5)}
    with pytest.raises(CycleDetected):
        build_network(v, [Cpt("A", ("B",), rows), Cpt("B", ("A",), rows)])


@pytest.mark.parametrize(
    "variables,cpts,err",
    [
        ([Variable("A", B)], [], MissingCpt),
        ([Variable("A", B), Variable("A", B)], [Cpt("A", (), {(): (1, 0)})], DuplicateVariable),
        ([Variable("A", B)], [Cpt("A", ("Z",), {("1",): (1, 0), ("0",): (1, 0)})], UnknownParent),
        ([Variable("A", B)], [Cpt("A", (), {(): (0.6, 0.3)})], RowNotNormalized),
        ([Variable("A", B)], [Cpt("A", (), {(): (1.2, -0.2)})], RowNotNormalized),
        ([Variable("A", B)], [Cpt("A", ("A",), {("1",): (1, 0), ("0",): (1, 0)})], CycleDetected),
        ([], [], ValidationError),
    ],
)
def test_construction_errors(variables, cpts, err):
    with pytest.raises(err):
        build_network(variables, cpts)


def test_row_not_normalized_reports_row_and_sum():
    v = [Variable("A", B), Variable("C", B)]
    c = [Cpt("A", (), {(): (0.5, 0.5)}), Cpt("C", ("A",), {("1",): (0.5, 0.4), ("0",): (0.5, 0.5)})]
    with pytest.raises(RowNotNormalized) as info:
        build_network(v, c)
    assert info.value.path == "cpts[1].rows[['1']]"
    assert info.value.total == pytest.approx(0.9)


def test_single_state_variable_rejected():
    with pytest.raises(ValidationError):
        Variable("X", ("only",))


def test_prior_marginals_match_enumeration():
    net = chain()
    pm = prior_marginals(net)
    for name, d in pm.items():
        ref = oracle.enumerate_joint(net, {}, name)
        assert np.allclose(d.probs, ref.probs, atol=1e-12)
    assert pm["Explosion"]["1"] == pytest.approx(0.65, abs=1e-12)
    assert pm["Injury"]["1"] == pytest.approx(0.725, abs=1e-12)
    assert pm["Traffic_Accident"].probs == (0.7, 0.3)


def test_posterior_examples():
    net = chain()
    p = posterior(net, {"Traffic_Accident": "1"}, "Injury")
    assert p["1"] == pytest.approx(oracle.enumerate_joint(net, {"Traffic_Accident": "1"}, "Injury")["1"], abs=1e-12)
    assert p["1"] == pytest.approx(0.80, abs=1e-12)
    q = posterior(net, {"Traffic_Accident": "1", "Explosion": "0"}, "Injury")
    assert q["1"] == pytest.approx(0.4, abs=1e-12)


def test_query_in_evidence_is_degenerate():
    net = chain()
    d = posterior(net, {"Explosion": "0"}, "Explosion")
    assert d.probs == (0.0, 1.0)


def test_impossible_evidence_raises():
    v = [Variable("A", B), Variable("C", B)]
    c = [Cpt("A", (), {(): (1.0, 0.0)}), Cpt("C", ("A",), {("1",): (0.5, 0.5), ("0",): (0.5, 0.5)})]
    net = build_network(v, c)
    with pytest.raises(ImpossibleEvidence):
        posterior(net, {"A": "0"}, "C")
    with pytest.raises(ImpossibleEvidence):
        posterior(net, {"A": "0"}, "A")
    assert evidence_probability(net, {"A": "0"}) == 0.0


def test_unknown_names():
    net = chain()
    with pytest.raises(UnknownVariable):
        posterior(net, {}, "Nope")
    with pytest.raises(UnknownVariable):
        posterior(net, {"Nope": "1"}, "Injury")
    with pytest.raises(UnknownState):
        posterior(net, {"Explosion": "maybe"}, "Injury")


def test_elimination_order_definitional():
    v = [Variable(n, B) for n in "ABC"]
    r = {("1",): (0.6, 0.4), ("0",): (0.2, 0.8)}
    net = build_network(v, [Cpt("A", (), {(): (0.5, 0.5)}), Cpt("B", ("A",), r), Cpt("C", ("B",), r)])
    order = elimination_order(net, "C")
    assert "C" not in order and set(order) == {"A", "B"}
    assert elimination_order(net, "C", {"A": "1", "B": "0"}) == []


def test_appendix_order_deterministic_and_all_orders_agree():
    net = chain()
    order = elimination_order(net, "Injury")
    assert order == ["Traffic_Accident", "Explosion"]
    assert all(elimination_order(net, "Injury") == order for _ in range(5))
    ref = oracle.enumerate_joint(net, {}, "Injury").probs
    for perm in itertools.permutations(order):
        assert np.allclose(posterior(net, {}, "Injury", order=list(perm)).probs, ref, atol=1e-12)


def test_bad_custom_order_rejected():
    net = chain()
    with pytest.raises(ValidationError):
        posterior(net, {}, "Injury", order=["Explosion"])


def test_posteriors_cover_all_variables():
    net = chain()
    ps = posteriors(net, {"Injury": "1"})
    assert set(ps) == set(net.names)
    for d in ps.values():
        assert sum(d.probs) == pytest.approx(1.0, abs=1e-12)


def test_higher_cardinality():
    v = [Variable("W", ("sun", "rain", "snow")), Variable("G", ("wet", "dry"))]
    c = [
        Cpt("W", (), {(): (0.5, 0.3, 0.2)}),
        Cpt("G", ("W",), {("sun",): (0.1, 0.9), ("rain",): (0.9, 0.1), ("snow",): (0.6, 0.4)}),
    ]
    net = build_network(v, c)
    for ev in ({}, {"G": "wet"}, {"G": "dry"}):
        assert np.allclose(posterior(net, ev, "W").probs, oracle.enumerate_joint(net, ev, "W").probs, atol=1e-12)
