import itertools
import random

import networkx as nx
import numpy as np
import pytest

import oracles
from sparsegraphs.errors import DomainError
from sparsegraphs.graph import (
    Graph,
    automorphism_count,
    complete_graph,
    cycle_graph,
    emb_count,
    hom_count,
    parse_edgelist,
    path_graph,
    read_edgelist,
    star_graph,
    write_edgelist,
)
from sparsegraphs.rooted import RootedGraph, RootedTree, ball_key, bfs_ball, parse_code, tree_code


# --- rooted trees ----------------------------------------------------------


def test_tree_code_ignores_child_order():
    a = tree_code([[1, 2], [3], [], []])
    b = tree_code([[2, 1], [], [3], []])
    c = tree_code([[1, 2], [], [3], []])
    assert a == b == c


def test_parse_code_round_trip_and_sizes():
    for code in ["()", "(())", "(()())", "((())())", "(()(()))"]:
        t = RootedTree(code)
        parent, _ = parse_code(code)
        assert t.size == len(parent) and t.edges == t.size - 1
        assert RootedTree.from_parents(parent).code == t.code


def test_restriction_examples():
    path3 = RootedTree.from_parents([-1, 0, 1, 2])
    assert path3.height == 3
    assert path3.restrict(1).code == "(())"
    assert path3.restrict(5) == path3
    # K_{1,3} with one edge subdivided
    t = RootedTree.from_parents([-1, 0, 0, 0, 3])
    assert t.restrict(1) == RootedTree("(()()())")


def test_labelled_codes_distinguish_labels():
    a = tree_code([[1], []], 0, ["x", "y"])
    b = tree_code([[1], []], 0, ["x", "x"])
    assert a != b


def _random_tree_parents(n, rng):
    return [-1] + [rng.randrange(i) for i in range(1, n)]


def test_tree_codes_match_rooted_isomorphism_oracle():
    rng = random.Random(0)
    trees = [_random_tree_parents(rng.randint(1, 8), rng) for _ in range(60)]
    for pa, pb in itertools.combinations(trees[:30], 2):
        ta = nx.Graph([(v, p) for v, p in enumerate(pa) if p >= 0]) if len(pa) > 1 else nx.empty_graph(1)
        tb = nx.Graph([(v, p) for v, p in enumerate(pb) if p >= 0]) if len(pb) > 1 else nx.empty_graph(1)
        nx.set_node_attributes(ta, {v: v == 0 for v in ta}, "root")
        nx.set_node_attributes(tb, {v: v == 0 for v in tb}, "root")
        iso = nx.is_isomorphic(ta, tb, node_match=lambda x, y: x["root"] == y["root"])
        assert (RootedTree.from_parents(pa) == RootedTree.from_parents(pb)) == iso


# --- balls and canonical keys --------------------------------------------


def _rooted_iso(G, u, ru, H, v, rv, mark_u=None, mark_v=None):
    """networkx oracle: are the radius balls rooted (and marked) isomorphic?"""
    A = nx.ego_graph(G, u, radius=ru)
    B = nx.ego_graph(H, v, radius=rv)
    for X, r, m in ((A, u, mark_u), (B, v, mark_v)):
        nx.set_node_attributes(X, {w: (w == r, w == m) for w in X}, "tag")
    return nx.is_isomorphic(A, B, node_match=lambda a, b: a["tag"] == b["tag"])


def test_ball_keys_match_networkx_on_random_graphs():
    rng = random.Random(4)
    graphs = [oracles.random_graph(9, 0.3, rng) for _ in range(6)]
    items = [(gi, v) for gi in range(len(graphs)) for v in range(9)]
    sample = rng.sample(items, 30)
    for r in (1, 2):
        keys = {(gi, v): ball_key(graphs[gi].adj, v, r) for gi, v in sample}
        for (a, b) in itertools.combinations(sample, 2):
            Ga, Gb = oracles.to_nx(graphs[a[0]]), oracles.to_nx(graphs[b[0]])
            assert (keys[a] == keys[b]) == _rooted_iso(Ga, a[1], r, Gb, b[1], r)


def test_marked_ball_keys_match_networkx():
    rng = random.Random(6)
    G = oracles.random_graph(10, 0.35, rng)
    H = oracles.to_nx(G)
    pairs = [(x, y) for x, y in G.edges.tolist()] + [(y, x) for x, y in G.edges.tolist()]
    pairs = rng.sample(pairs, min(20, len(pairs)))
    keys = {p: ball_key(G.adj, p[0], 1, marked=p[1]) for p in pairs}
    for a, b in itertools.combinations(pairs, 2):
        assert (keys[a] == keys[b]) == _rooted_iso(H, a[0], 1, H, b[0], 1, a[1], b[1])


def test_cycle_ball_is_a_path_and_triangle_ball_is_not_a_tree():
    C = cycle_graph(12)
    keys = {ball_key(C.adj, v, 3) for v in range(12)}
    assert keys == {ball_key(path_graph(7).adj, 3, 3)}
    k = ball_key(complete_graph(3).adj, 0, 1)
    assert k.startswith("G[")


def test_bfs_ball_distances():
    order, dist = bfs_ball(path_graph(6).adj, 0, 2)
    assert order[:1] == [0] and sorted(order) == [0, 1, 2]
    assert dist[2] == 2


def test_rooted_graph_key_is_relabelling_invariant():
    rng = random.Random(1)
    G = oracles.random_graph(8, 0.4, rng)
    perm = list(range(8))
    rng.shuffle(perm)
    Gp = G.relabel(perm)
    for v in range(8):
        assert ball_key(G.adj, v, 2) == ball_key(Gp.adj, perm[v], 2)
    rg = RootedGraph(G.adj)
    assert rg.n == 8 and rg.edge_count() == G.m


# --- graph basics ----------------------------------------------------------


def test_graph_validation_and_dedupe():
    G = Graph(3, [(0, 1), (1, 0), (1, 2)])
    assert G.m == 2
    with pytest.raises(DomainError):
        Graph(3, [(1, 1)])
    with pytest.raises(DomainError):
        Graph(3, [(0, 3)])


def test_edgelist_round_trip(tmp_path):
    G = Graph(5, [(0, 1), (3, 4)], types=[0, 1, 0, 1, 1])
    path = tmp_path / "g.el"
    write_edgelist(G, path)
    H = read_edgelist(path)
    assert H == G and H.types.tolist() == [0, 1, 0, 1, 1]
    assert parse_edgelist("3\n0 1\n\n# note\n1 2\n").m == 2


def test_components_and_union():
    G = path_graph(3).disjoint_union(complete_graph(4))
    assert G.n == 7 and G.m == 2 + 6
    assert G.largest_component_fraction() == pytest.approx(4 / 7)
    assert not G.is_connected() and path_graph(4).is_tree()


def test_counts_small_examples():
    K2, P3, K3 = complete_graph(2), path_graph(3), complete_graph(3)
    assert hom_count(P3, K3) == 12 and emb_count(P3, K3) == 6
    rng = random.Random(2)
    G = oracles.random_graph(12, 0.3, rng)
    assert emb_count(K2, G) == 2 * G.m
    assert automorphism_count(cycle_graph(5)) == 10
    assert automorphism_count(star_graph(3)) == 6


def test_counts_against_brute_force():
    rng = random.Random(9)
    patterns = [path_graph(3), star_graph(3), complete_graph(3), cycle_graph(4), path_graph(4)]
    for _ in range(6):
        G = oracles.random_graph(6, 0.45, rng)
        for F in patterns:
            assert hom_count(F, G) == oracles.brute_hom(F, G)
            assert emb_count(F, G) == oracles.brute_hom(F, G, injective=True)


def test_adjacency_matrix_symmetric():
    G = cycle_graph(5)
    A = G.adjacency_matrix()
    assert np.array_equal(A, A.T) and A.sum() == 10
