from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netcreate.graphcore import (
    UNREACHABLE,
    GraphError,
    all_pairs_distances,
    bfs_distances,
    build_host_graph,
    complete_host,
    format_edge_list,
    neighborhood_size,
    parse_edge_list,
)
from oracles import floyd_warshall


def cycle(n, alpha=1):
    return build_host_graph(n, [(i, (i + 1) % n) for i in range(n)], alpha)


def test_build_complete_graph():
    g = build_host_graph(3, [(0, 1), (1, 2), (0, 2)], 1)
    assert g.edges == ((0, 1), (0, 2), (1, 2))
    assert g.alpha == 1


def test_build_single_edge_and_canonical_order():
    g = build_host_graph(2, [(1, 0)], 5)
    assert g.edges == ((0, 1),)
    assert g.alpha == Fraction(5)


@pytest.mark.parametrize(
    "edges, match",
    [([(0, 3)], r"\(0, 3\).*out of range"), ([(1, 1)], "self-loop"), ([(0, 1), (1, 0)], "duplicate")],
)
def test_build_rejects_bad_edges(edges, match):
    with pytest.raises(GraphError, match=match):
        build_host_graph(3, edges, 1)


def test_negative_alpha_rejected():
    with pytest.raises(GraphError):
        build_host_graph(2, [(0, 1)], -1)


def test_path_distances():
    m = all_pairs_distances(build_host_graph(3, [(0, 1), (1, 2)]))
    assert m.dist(0, 2) == 2
    assert m.diameter == 2


def test_isolated_vertices_unreachable():
    m = all_pairs_distances(build_host_graph(2, []))
    assert m.dist(0, 1) is UNREACHABLE
    assert m.usage(0) == (1, 0)
    assert m.total_usage() == (2, 0)


def test_cycle_distances():
    m = all_pairs_distances(cycle(20))
    assert m.dist(0, 7) == 7
    assert m.dist(0, 13) == 7
    for j in range(20):
        assert m.dist(0, j) == min(j, 20 - j)


def test_neighborhood_examples():
    star = build_host_graph(5, [(0, i) for i in range(1, 5)])
    assert neighborhood_size(all_pairs_distances(star), 0, 1) == 5
    path = build_host_graph(4, [(0, 1), (1, 2), (2, 3)])
    assert neighborhood_size(all_pairs_distances(path), 0, 1) == 2
    c20 = all_pairs_distances(cycle(20))
    assert neighborhood_size(c20, 0, 7) == sum(1 for j in range(20) if min(j, 20 - j) <= 7) == 15


def test_bfs_with_removed_edge():
    g = cycle(6)
    assert bfs_distances(g, 0)[3] == 3
    assert bfs_distances(g, 0, removed=(0, 1))[1] == 5


def test_bridges():
    g = build_host_graph(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)])
    assert g.bridges() == {(2, 3), (3, 4)}
    assert cycle(5).bridges() == frozenset()


def test_edge_list_round_trip():
    g = build_host_graph(4, [(0, 1), (2, 3), (1, 2)], 2)
    text = format_edge_list(g, ["k=2 l=3 alpha=720"])
    n, edges, comments = parse_edge_list(text)
    assert (n, sorted(edges), comments) == (4, list(g.edges), ["k=2 l=3 alpha=720"])


@pytest.mark.parametrize("text", ["", "3 2\n0 1\n", "x y\n", "2 1\n0 1 2\n"])
def test_edge_list_rejects_malformed(text):
    with pytest.raises(GraphError):
        parse_edge_list(text)


@st.composite
def graphs(draw, max_n=64):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if not pairs:
        return n, []
    p = draw(st.floats(0, 0.3))
    seed = draw(st.integers(0, 2**31))
    rs = np.random.default_rng(seed)
    return n, [e for e in pairs if rs.random() < p]


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_bfs_matches_floyd_warshall(g):
    n, edges = g
    m = all_pairs_distances(build_host_graph(n, edges))
    fw = floyd_warshall(n, edges)
    expected = np.where(np.isfinite(fw), fw, -1).astype(int)
    assert np.array_equal(m.array, expected)
    # symmetric with zero diagonal
    assert np.array_equal(m.array, m.array.T)
    assert (np.diag(m.array) == 0).all()


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=30))
def test_neighborhoods_monotone_and_cover_component(g):
    n, edges = g
    m = all_pairs_distances(build_host_graph(n, edges))
    for u in range(n):
        sizes = [neighborhood_size(m, u, k) for k in range(m.diameter + 2)]
        assert sizes[0] == 1
        assert all(a <= b for a, b in zip(sizes, sizes[1:]))
        component = len(bfs_distances(build_host_graph(n, edges), u))
        assert neighborhood_size(m, u, m.diameter) == component


def test_complete_host():
    h = complete_host(5, Fraction(3, 2))
    assert h.m == 10 and h.alpha == Fraction(3, 2)
    assert all_pairs_distances(h).diameter == 1
