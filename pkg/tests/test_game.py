from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from netcreate.game import (
    PaymentMatrix,
    StrategyError,
    UnilateralStrategy,
    format_strategy,
    normalize_payments,
    parse_strategy,
    player_cost,
    realize_network,
    social_cost,
)
from netcreate.graphcore import Usage, build_host_graph, complete_host
from oracles import total_cost


def test_unilateral_realization():
    host = complete_host(3, 1)
    s = UnilateralStrategy.from_sets(host, [{1}, {2}, set()])
    assert realize_network(host, s).edges == ((0, 1), (1, 2))


def test_unilateral_rejects_non_host_edge():
    host = build_host_graph(3, [(0, 1), (1, 2)], 1)
    with pytest.raises(StrategyError, match=r"\(0, 2\)"):
        UnilateralStrategy.from_sets(host, [{2}, set(), set()])


@pytest.mark.parametrize("payments, present", [((1, 1), True), ((1, F(1, 2)), False)])
def test_cooperative_realization(payments, present):
    host = complete_host(2, 2)
    pm = PaymentMatrix({(0, 1): {0: payments[0], 1: payments[1]}})
    assert realize_network(host, pm).has_edge(0, 1) is present


def test_cooperative_rejects_non_host_edge():
    host = build_host_graph(3, [(0, 1)], 1)
    with pytest.raises(StrategyError, match=r"\(1, 2\)"):
        realize_network(host, PaymentMatrix({(1, 2): {1: 1}}))


def test_negative_payment_rejected():
    with pytest.raises(StrategyError):
        PaymentMatrix({(0, 1): {0: -1}})


@pytest.mark.parametrize(
    "raw, expected",
    [((2, 2), (1, 1)), ((3, 1), (F(3, 2), F(1, 2))), ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))],
)
def test_normalize_payments(raw, expected):
    host = complete_host(2, 2)
    pm = PaymentMatrix({(0, 1): {0: raw[0], 1: raw[1]}})
    out = normalize_payments(host, pm)
    assert (out.get(0, (0, 1)), out.get(1, (0, 1))) == expected
    assert realize_network(host, out).edges == realize_network(host, pm).edges


def test_unilateral_player_costs():
    host = complete_host(3, 1)
    s = UnilateralStrategy.from_sets(host, [{1}, {2}, set()])
    built = realize_network(host, s)
    costs = [player_cost(built, s, i).total for i in range(3)]
    assert costs == [Usage(0, 4), Usage(0, 3), Usage(0, 3)]
    assert social_cost(built, s).total == Usage(0, 10)
    assert total_cost(3, built.edges, 1) == (0, 10)


def star_payments(n, alpha):
    return PaymentMatrix({(0, i): {i: alpha} for i in range(1, n)})


def test_cooperative_star_costs():
    host = complete_host(4, 3)
    pm = star_payments(4, 3)
    built = realize_network(host, pm)
    assert player_cost(built, pm, 0).total == Usage(0, 3)
    assert social_cost(built, pm).total == Usage(0, 27)


def test_single_vertex_costs_nothing():
    host = build_host_graph(1, [], 5)
    for strategy in (UnilateralStrategy.empty(1), PaymentMatrix()):
        built = realize_network(host, strategy)
        assert player_cost(built, strategy, 0).total == Usage(0, 0)


def test_empty_strategy_disconnected():
    host = complete_host(4, 1)
    built = realize_network(host, PaymentMatrix())
    assert social_cost(built, PaymentMatrix()).usage.unreachable == 4 * 3


def test_unnormalized_payments_charged_after_scaling():
    host = complete_host(3, 2)
    pm = PaymentMatrix({(0, 1): {0: 3, 1: 1}})
    built = realize_network(host, pm)
    assert player_cost(built, pm, 0).creation == F(3, 2)
    assert social_cost(built, pm).creation == 2


def test_strategy_text_round_trip():
    host = complete_host(4, 3)
    s = UnilateralStrategy.from_sets(host, [{1, 2}, set(), {3}, set()])
    assert parse_strategy(format_strategy(s), 4) == s
    pm = PaymentMatrix({(0, 1): {0: F(3, 2), 1: F(3, 2)}, (2, 3): {2: 3}})
    text = format_strategy(pm)
    assert "edge 0 1: 0=3/2 1=3/2" in text
    assert parse_strategy(text, 4) == pm


@st.composite
def coop_instances(draw):
    n = draw(st.integers(2, 7))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    alpha = F(draw(st.integers(1, 12)), draw(st.integers(1, 4)))
    entries = {}
    for e in draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))):
        payers = draw(st.lists(st.integers(0, n - 1), unique=True, min_size=1, max_size=3))
        entries[e] = {i: F(draw(st.integers(0, 8)), draw(st.integers(1, 3))) for i in payers}
    return n, alpha, PaymentMatrix(entries)


@settings(max_examples=80, deadline=None)
@given(coop_instances())
def test_cooperative_creation_equals_alpha_per_edge(inst):
    n, alpha, pm = inst
    host = complete_host(n, alpha)
    norm = normalize_payments(host, pm)
    built = realize_network(host, norm)
    breakdown = social_cost(built, norm)
    assert breakdown.creation == alpha * built.graph.m
    assert breakdown.total == Usage(*total_cost(n, built.edges, alpha))


@settings(max_examples=60, deadline=None)
@given(coop_instances(), st.data())
def test_adding_payment_never_removes_edges(inst, data):
    n, alpha, pm = inst
    host = complete_host(n, alpha)
    e = data.draw(st.sampled_from(list(host.edges)))
    i = data.draw(st.integers(0, n - 1))
    extra = F(data.draw(st.integers(1, 10)), 2)
    row = pm.on(e)
    row[i] = row.get(i, 0) + extra
    assert set(realize_network(host, pm).edges) <= set(realize_network(host, pm.with_edge(e, row)).edges)


@settings(max_examples=60, deadline=None)
@given(coop_instances(), st.data())
def test_cost_ignores_splits_on_unpaid_edges(inst, data):
    n, alpha, pm = inst
    host = complete_host(n, alpha)
    norm = normalize_payments(host, pm)
    i = data.draw(st.integers(0, n - 1))
    # reshuffle the split on every present edge player i does not pay for
    entries = {}
    for e, row in norm.items():
        total = sum(row.values())
        if i not in row and total == alpha and len(row) >= 1:
            j = data.draw(st.sampled_from([v for v in range(n) if v != i]))
            entries[e] = {j: total}
        else:
            entries[e] = row
    other = PaymentMatrix(entries)
    b1, b2 = realize_network(host, norm), realize_network(host, other)
    assert b1.edges == b2.edges
    assert player_cost(b1, norm, i) == player_cost(b2, other, i)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.data())
def test_unilateral_social_cost_is_sum_of_players(n, data):
    alpha = F(data.draw(st.integers(0, 10)), data.draw(st.integers(1, 3)))
    host = complete_host(n, alpha)
    sets = [set(data.draw(st.lists(st.sampled_from([j for j in range(n) if j != i]), unique=True)))
            if n > 1 else set() for i in range(n)]
    s = UnilateralStrategy.from_sets(host, sets)
    built = realize_network(host, s)
    rows = [player_cost(built, s, i).total for i in range(n)]
    total = Usage(0, 0)
    for r in rows:
        total = total + r
    assert total == social_cost(built, s).total
