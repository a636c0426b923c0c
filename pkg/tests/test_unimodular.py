import json
import random
from fractions import Fraction as F

import networkx as nx
import pytest

from sparsegraphs.errors import DomainError, InsufficientDepthError, UnsupportedLawError
from sparsegraphs.graph import Graph, cycle_graph
from sparsegraphs.graph_models import sample_gnp, sample_triangle_config
from sparsegraphs.rooted import RootedGraph, bfs_ball
from sparsegraphs.unimodular import (
    BallEntry,
    FiniteSupportLaw,
    LocalRule,
    QTEntry,
    QuasiTransitiveSpec,
    build_qt_tree,
    constant_rule,
    degree_rule,
    detailed_balance_weights,
    edge_balance_sigma,
    grandmother_graph,
    grandmother_parent_rule,
    involution_check,
    law_from_graph,
    laws_equal,
    scan_violations,
    shift_invariant_weights,
    size_biased_shift,
)

ET234 = QuasiTransitiveSpec(((0, 1, 1), (2, 0, 1), (1, 3, 0)))
ET234_WEIGHTS = [F(9, 20), F(7, 20), F(4, 20)]


def rooted_at(adj, v):
    order, _ = bfs_ball(adj, v, len(adj))
    idx = {u: i for i, u in enumerate(order)}
    return RootedGraph([[idx[u] for u in adj[x]] for x in order])


def uniform_rooting(adj):
    n = len(adj)
    return FiniteSupportLaw([BallEntry(rooted_at(adj, v)) for v in range(n)], [F(1, n)] * n)


# --- specs and trees -----------------------------------------------------------


def test_spec_validation():
    with pytest.raises(DomainError):
        QuasiTransitiveSpec(((0, 1), (0, 0)))
    with pytest.raises(DomainError):
        QuasiTransitiveSpec(((0, -1), (-1, 0)))
    with pytest.raises(DomainError):
        QuasiTransitiveSpec(((0, 1, 1), (1, 0)))
    assert ET234.types == 3 and [ET234.degree(i) for i in range(3)] == [2, 3, 4]


def test_qt_tree_degrees():
    t = build_qt_tree(ET234, 0, 3)
    types, depth = t.annotations["types"], t.annotations["depth"]
    for v in range(t.n):
        if depth[v] < 3:
            assert t.degree(v) == ET234.degree(types[v])
            got = sorted(types[u] for u in t.adj[v])
            want = sorted(j for j in range(3) for _ in range(ET234.matrix[types[v]][j]))
            assert got == want


def test_collapse_merges_identical_types():
    assert len(set(QuasiTransitiveSpec(((0, 3), (3, 0))).collapse())) == 1
    assert len(set(ET234.collapse())) == 3


# --- shift -----------------------------------------------------------------------


def test_et234_size_biasing_and_shift():
    pi = FiniteSupportLaw.qt(ET234, ET234_WEIGHTS)
    biased, shifted = size_biased_shift(pi)
    assert biased.type_weights(ET234) == [F(18, 55), F(21, 55), F(16, 55)]
    assert shifted.type_weights(ET234) == [F(18, 55), F(21, 55), F(16, 55)]
    assert laws_equal(biased, shifted)


def test_stationary_weights():
    assert shift_invariant_weights(ET234) == ET234_WEIGHTS
    assert shift_invariant_weights(QuasiTransitiveSpec(((0, 2), (3, 0)))) == [F(3, 5), F(2, 5)]
    assert detailed_balance_weights(ET234) is None
    assert detailed_balance_weights(QuasiTransitiveSpec(((0, 2), (3, 0)))) == [F(3, 5), F(2, 5)]


def test_nonstationary_weights_not_fixed():
    pi = FiniteSupportLaw.qt(ET234, [F(1, 3)] * 3)
    biased, shifted = size_biased_shift(pi)
    assert not laws_equal(biased, shifted)


def test_regular_tree_is_shift_fixed_and_clean():
    spec = QuasiTransitiveSpec(((3,),))
    pi = FiniteSupportLaw.point(QTEntry(spec, 0))
    biased, shifted = size_biased_shift(pi)
    assert laws_equal(pi, shifted)
    assert scan_violations(pi, 3) == []


def test_truncated_balls_cannot_be_shifted():
    law = law_from_graph(cycle_graph(6), 2)
    with pytest.raises(UnsupportedLawError):
        size_biased_shift(law)


# --- involution invariance -------------------------------------------------------


def test_et234_degree_rule_violates_invariance():
    pi = FiniteSupportLaw.qt(ET234, ET234_WEIGHTS)
    lhs, rhs, ok = involution_check(pi, degree_rule(2, 3))
    assert (lhs, rhs, ok) == (F(9, 20), F(7, 10), False)
    one = involution_check(pi, constant_rule())
    assert one.lhs == one.rhs == F(11, 4) and one.invariant
    assert len(scan_violations(pi, 1)) == 0
    assert len(scan_violations(pi, 2)) == 6


def test_grandmother_parent_rule():
    g = grandmother_graph(2)
    assert g.degree(0) == 8
    # the rule picks out the true parent at every vertex with a full radius-1 ball
    rule = grandmother_parent_rule()
    dist, parent = g.annotations["dist"], g.annotations["parent"]
    for v in range(g.n):
        if dist[v] < 2:
            chosen = [y for y in g.adj[v] if rule.evaluate(g.adj, v, y)]
            assert chosen == [parent[v]]
    lhs, rhs, ok = involution_check(FiniteSupportLaw.point(BallEntry(g, 2)), rule)
    assert (lhs, rhs, ok) == (1, 2, False)


def test_degree_rule_needs_radius_two():
    with pytest.raises(DomainError):
        degree_rule(1, 1, radius=1)
    law = law_from_graph(cycle_graph(5), 2)
    with pytest.raises(InsufficientDepthError):
        involution_check(law, degree_rule(2, 2))
    with pytest.raises(DomainError):
        scan_violations(law, 0)


def test_finite_trees_under_uniform_rooting_are_unimodular():
    for n in range(2, 8):
        for T in nx.nonisomorphic_trees(n):
            adj = [sorted(T[v]) for v in range(n)]
            pi = uniform_rooting(adj)
            assert scan_violations(pi, 3) == []
            biased, shifted = size_biased_shift(pi)
            assert laws_equal(biased, shifted)


def test_finite_graph_empirical_law_balanced_exactly():
    G = sample_gnp(300, 3, seed=0)
    law = law_from_graph(G, 2)
    assert scan_violations(law, 1) == []
    rng = random.Random(0)
    colours = [rng.randrange(2) for _ in range(G.n)]
    coloured = law_from_graph(G, 2, colours)
    assert scan_violations(coloured, 1) == []


def test_triangle_model_rule_balance():
    G = sample_triangle_config(600, 2, seed=3)
    law = law_from_graph(G, 2)
    in_triangle = LocalRule(1, lambda b, x, y: any(w in b.adj[y] for w in b.adj[x]), "triangle")
    lhs, rhs, ok = involution_check(law, in_triangle)
    assert ok and lhs > 0
    assert abs(lhs - rhs) <= 3 * edge_balance_sigma(G, in_triangle) + 1e-12


def test_indicator_rule_matches_tally():
    pi = FiniteSupportLaw.qt(ET234, ET234_WEIGHTS)
    for rule, a, b in scan_violations(pi, 2):
        assert involution_check(pi, rule).lhs == a
        assert involution_check(pi, rule).rhs == b


# --- serialisation ---------------------------------------------------------------


def test_law_json_round_trip():
    pi = FiniteSupportLaw.qt(ET234, ET234_WEIGHTS)
    d = json.loads(pi.to_json())
    back = FiniteSupportLaw.from_dict(d)
    assert back.weights == ET234_WEIGHTS and laws_equal(pi, back)
    trees = FiniteSupportLaw([BallEntry.from_tree("(())"), BallEntry.from_tree("(()())")], [F(1, 3), F(2, 3)])
    assert laws_equal(FiniteSupportLaw.from_dict(json.loads(trees.to_json())), trees)


def test_law_weight_validation():
    with pytest.raises(DomainError):
        FiniteSupportLaw.qt(ET234, [F(1, 2), F(1, 2), F(1, 2)])
    with pytest.raises(DomainError):
        FiniteSupportLaw.qt(ET234, [F(3, 2), F(-1, 2), 0])
