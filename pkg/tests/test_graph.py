import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charnet.graph import (
    GraphError,
    betweenness,
    build_graph,
    connected_components,
    degree,
    density,
    graph_metrics,
    largest_component,
    layout_fr,
    mean_degree,
    merge_graphs,
    rank_centrality,
    read_graphml,
    shortest_path_stats,
    undirected_density,
    write_graphml,
)

from oracles import brute_force_betweenness, random_connected_adjacency


def path(*names):
    return build_graph([(a, b, 1) for a, b in zip(names, names[1:])])


def complete(n):
    names = [f"k{i}" for i in range(n)]
    return build_graph([(a, b, 1) for a, b in itertools.combinations(names, 2)])


def star(leaves):
    return build_graph([("center", f"leaf{i}", 1) for i in range(leaves)])


def empty_with_nodes(n, m):
    """Graph with n nodes and m edges laid out greedily (only n and m matter)."""
    names = [f"v{i:03d}" for i in range(n)]
    pairs = itertools.islice(itertools.combinations(names, 2), m)
    return build_graph([(a, b, 1) for a, b in pairs], nodes=names)


def test_single_edge():
    g = build_graph([("A", "B", 3)])
    assert g.nodes == ("A", "B") and g.m == 1 and g.weight("A", "B") == g.weight("B", "A") == 3


def test_empty_graph():
    g = build_graph([])
    assert g.n == 0 and g.m == 0


def test_self_loop_rejected():
    with pytest.raises(GraphError):
        build_graph([("A", "A", 1)])


def test_merge():
    a, b = build_graph([("A", "B", 1)]), build_graph([("A", "B", 2)])
    assert merge_graphs([a, b]).weight("A", "B") == 3
    assert merge_graphs([a, build_graph([])]).edges() == a.edges()
    d = merge_graphs([a, build_graph([("C", "D", 1)])])
    assert d.n == 4 and len(connected_components(d)) == 2


def test_merge_commutative_associative():
    rng = np.random.default_rng(0)
    gs = [build_graph([(a, b, int(rng.integers(1, 4))) for a, b in itertools.combinations("ABCDE", 2)
                       if rng.random() < 0.5]) for _ in range(3)]
    x = merge_graphs([merge_graphs([gs[0], gs[1]]), gs[2]])
    y = merge_graphs([gs[2], merge_graphs([gs[1], gs[0]])])
    assert x.edges() == y.edges() and x.nodes == y.nodes


def test_density_published_shapes():
    assert round(density(empty_with_nodes(30, 119)), 4) == 0.1368
    assert round(density(empty_with_nodes(238, 1233)), 4) == 0.0219
    assert density(complete(3)) == 0.5
    assert undirected_density(complete(3)) == 1.0


def test_density_needs_two_nodes():
    with pytest.raises(ValueError):
        density(build_graph([], nodes=["A"]))


def test_degrees():
    assert round(mean_degree(empty_with_nodes(30, 119)), 2) == 7.93
    g = build_graph([("A", "B", 1)], nodes=["A", "B", "Z"])
    assert degree(g, "Z") == 0
    assert degree(star(5), "center") == 5
    with pytest.raises(KeyError):
        degree(g, "nobody")


def test_shortest_paths():
    s = shortest_path_stats(path("A", "B", "C"))
    assert s.diameter == 2 and s.average == pytest.approx(4 / 3) and not s.largest_component_only
    k = shortest_path_stats(complete(5))
    assert k.diameter == 1 and k.average == 1.0
    with pytest.raises(ValueError):
        shortest_path_stats(build_graph([]))


def test_disconnected_paths_flagged():
    g = build_graph([("A", "B", 1), ("B", "C", 1), ("X", "Y", 1)])
    with pytest.warns(UserWarning):
        s = shortest_path_stats(g)
    assert s.largest_component_only and s.diameter == 2


def test_betweenness_examples():
    assert betweenness(path("A", "B", "C")) == {"A": 0.0, "B": 1.0, "C": 0.0}
    assert set(betweenness(complete(5)).values()) == {0.0}
    bc = betweenness(star(4))
    assert bc["center"] == 6.0
    assert betweenness(star(4), normalized=True)["center"] == 1.0


def test_betweenness_matches_brute_force():
    rng = np.random.default_rng(42)
    for _ in range(100):
        adj = random_connected_adjacency(rng, int(rng.integers(2, 9)), float(rng.uniform(0.0, 0.6)))
        g = build_graph([(u, v, 1) for u in adj for v in adj[u] if u < v], nodes=list(adj))
        fast, slow = betweenness(g), brute_force_betweenness(adj)
        assert all(abs(fast[v] - slow[v]) < 1e-9 for v in adj)


def test_rank_centrality():
    assert rank_centrality(star(4), "degree", 1) == ["center"]
    assert rank_centrality(star(4), "betweenness", 1) == ["center"]
    cycle = build_graph([("d", "a", 1), ("a", "b", 1), ("b", "c", 1), ("c", "d", 1)])
    assert rank_centrality(cycle, "degree", 4) == ["a", "b", "c", "d"]
    assert rank_centrality(cycle, "betweenness", 4) == ["a", "b", "c", "d"]


def test_largest_component():
    g = build_graph([("A", "B", 1), ("B", "C", 1), ("A", "C", 1), ("X", "Y", 1)])
    assert largest_component(g).nodes == ("A", "B", "C")
    assert largest_component(complete(4)).edges() == complete(4).edges()
    tie = build_graph([("C", "D", 1), ("A", "B", 1)])
    assert largest_component(tie).nodes == ("A", "B")


def test_layout():
    assert layout_fr(build_graph([], nodes=["solo"]), seed=1) == {"solo": (0.0, 0.0)}
    g = build_graph([("A", "B", 1)])
    pos = layout_fr(g, iterations=200, seed=0)
    k = math.sqrt(1.0 / 2)
    dist = math.dist(pos["A"], pos["B"])
    assert 0.5 * k <= dist <= 2 * k
    big = complete(6)
    assert layout_fr(big, seed=3) == layout_fr(big, seed=3)
    assert all(math.isfinite(c) for xy in layout_fr(big, seed=3).values() for c in xy)


def test_graphml_roundtrip(tmp_path):
    g = build_graph([("A", "B", 2), ("B", "C", 1)], attributes={"A": {"label": "x"}})
    write_graphml(g, tmp_path / "g.graphml")
    h = read_graphml(tmp_path / "g.graphml")
    assert h.edges() == g.edges() and h.node_attributes == {"A": {"label": "x"}}


def test_fixture_metrics_match_gold(fixture_mentions, gold_dir):
    import json
    from fractions import Fraction

    from charnet.cooccur import sentence_cooccurrences

    gold = json.loads((gold_dir / "fixture_metrics.json").read_text())
    m = graph_metrics(build_graph(sentence_cooccurrences(fixture_mentions).entries))
    assert (m["nodes"], m["edges"], m["diameter"]) == (gold["nodes"], gold["edges"], gold["diameter"])
    assert m["density"] == float(Fraction(gold["density"]))
    assert m["mean_degree"] == float(Fraction(gold["mean_degree"]))


edge_sets = st.sets(st.tuples(st.integers(0, 7), st.integers(0, 7)).filter(lambda e: e[0] < e[1]), max_size=20)


@settings(max_examples=100, deadline=None)
@given(edge_sets)
def test_graph_invariants(edges):
    g = build_graph([(f"n{a}", f"n{b}", 1 + (a + b) % 3) for a, b in edges], nodes=[f"n{i}" for i in range(8)])
    A = g.adjacency_matrix(weighted=True)
    assert np.array_equal(A, A.T) and np.all(np.diag(A) == 0)
    assert density(g) == g.m / (g.n * (g.n - 1))
    assert mean_degree(g) == 2 * g.m / g.n
    if g.m and len(connected_components(g)) == 1:
        s = shortest_path_stats(g)
        assert s.diameter >= s.average >= 1
