import itertools
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

import oracles
from sparsegraphs.errors import DomainError, SizeRefusal
from sparsegraphs.graph import Graph, cycle_graph, path_graph
from sparsegraphs.graph_models import graph_to_kernel, sample_gnp, sample_planted_bisection
from sparsegraphs.kernel_core import chessboard_kernel
from sparsegraphs.metrics import (
    count_balanced_partitions,
    density_bound,
    pair_density,
    partition_distance,
    partition_spectrum,
    set_distance,
)
from sparsegraphs.metrics.partition import (
    _search_spectrum,
    crisp_split,
    density_matrix,
    kernel_split_matrix,
    point_to_set,
    sample_kernel_splits,
)

TWO_K2 = Graph(4, [(0, 1), (2, 3)])


def test_pair_density_examples():
    G = Graph(2, [(0, 1)])
    assert pair_density(G, [0, 1], [0, 1], F(1, 2)) == pytest.approx(1)
    H = sample_gnp(200, 3, seed=0)
    V = range(200)
    assert pair_density(H, V, V) == pytest.approx(2 * H.m / 200)
    with pytest.raises(DomainError):
        pair_density(H, [], V)


def test_count_balanced_partitions_matches_enumeration():
    for n in range(1, 8):
        for k in range(1, 4):
            brute = sum(1 for lab in itertools.product(range(k), repeat=n)
                        if min(lab.count(i) for i in range(k)) > 0
                        and max(lab.count(i) for i in range(k)) - min(lab.count(i) for i in range(k)) <= 1)
            assert count_balanced_partitions(n, k) == brute


def test_c4_spectrum_exact():
    sp = partition_spectrum(cycle_graph(4), 2, F(1, 4), "exact")
    assert sp.as_set() == {(0.0, 4.0, 4.0, 0.0), (2.0, 2.0, 2.0, 2.0)}
    assert sp.total() == count_balanced_partitions(4, 2) == 6
    assert sp.provenance == "exact"


def test_two_k2_spectrum_exact():
    sp = partition_spectrum(TWO_K2, 2, F(1, 4), "exact")
    assert sp.as_set() == {(2.0, 0.0, 0.0, 2.0), (0.0, 2.0, 2.0, 0.0)}
    mult = {tuple(m.ravel()): int(c) for m, c in zip(sp.matrices, sp.multiplicity)}
    assert mult == {(2.0, 0.0, 0.0, 2.0): 2, (0.0, 2.0, 2.0, 0.0): 4}


def test_exact_spectrum_matches_brute_force():
    rng = random.Random(1)
    for _ in range(6):
        G = oracles.random_graph(7, 0.4, rng)
        for k in (2, 3):
            brute = oracles.brute_balanced_matrices(G, k, 1 / 7)
            sp = partition_spectrum(G, k, None, "exact")
            assert sp.total() == len(brute)
            assert sp.as_set() == {tuple(np.round(m, 9).ravel().tolist()) for m in brute}


def test_exact_spectrum_closed_under_part_permutation():
    G = sample_gnp(9, 3, seed=2)
    sp = partition_spectrum(G, 3, None, "exact")
    s = sp.as_set()
    for m in sp.matrices:
        for perm in itertools.permutations(range(3)):
            assert tuple(np.round(m[np.ix_(perm, perm)], 9).ravel().tolist()) in s


def test_empty_graph_and_k_larger_than_n():
    sp = partition_spectrum(Graph(6), 3, None, "exact")
    assert sp.as_set() == {(0.0,) * 9}
    assert partition_spectrum(Graph(2), 3, None, "exact").empty


def test_exact_refusal_over_budget():
    with pytest.raises(SizeRefusal):
        partition_spectrum(sample_gnp(30, 2, seed=0), 2, None, "exact", budget=1000)


def test_density_entries_bounded():
    G = sample_gnp(10, 4, seed=3)
    C = density_bound(G)
    for k in (2, 3):
        sp = partition_spectrum(G, k, None, "exact")
        assert np.all(sp.matrices <= (2 * k) ** 2 * C + 1e-9)


def test_search_spectrum_is_inner_and_deterministic():
    G = sample_gnp(12, 3, seed=4)
    exact = partition_spectrum(G, 2, None, "exact")
    a = partition_spectrum(G, 2, None, "search", budget=500, seed=9)
    b = partition_spectrum(G, 2, None, "search", budget=500, seed=9)
    assert a.provenance == "search"
    assert np.array_equal(a.matrices, b.matrices)
    ex = exact.as_set()
    assert a.as_set() <= ex


def test_search_beats_sampling_only_in_hausdorff():
    for seed in range(3):
        G = sample_gnp(14, 2.5, seed=seed)
        exact = partition_spectrum(G, 2, None, "exact")
        searched = _search_spectrum(G, 2, None, 300, np.random.default_rng(seed), climb=True)
        sampled = _search_spectrum(G, 2, None, 300, np.random.default_rng(seed), climb=False)
        assert sampled.as_set() <= searched.as_set()
        assert set_distance(searched, exact) <= set_distance(sampled, exact) + 1e-12


def test_planted_split_found_by_search():
    n = 2000
    G = sample_planted_bisection(n, 0, F(4, n), seed=1)
    sp = partition_spectrum(G, 2, None, "search", budget=4000, seed=1)
    m = sp.matrices
    ok = (m[:, 0, 0] <= 0.1) & (m[:, 1, 1] <= 0.1) & (m[:, 0, 1] >= 3.6)
    assert ok.any()


def test_set_distance_examples():
    a = np.array([[0, 4], [4, 0]], float)
    b = np.array([[2, 2], [2, 2]], float)
    c = np.array([[1, 3], [3, 1]], float)
    for kind in ("hausdorff", "matching", "weighted_matching"):
        assert set_distance([a, b], [a, b], kind) == 0
    assert set_distance([a], [b]) == 2
    assert set_distance([a], [a, c]) == pytest.approx(1)
    assert set_distance([a], [a, c], "matching") == pytest.approx(1)
    assert set_distance([a], [a, c], "weighted_matching") == pytest.approx(0.5)
    with pytest.raises(DomainError):
        set_distance([], [])
    assert set_distance([], [a], empty_value=7.0) == 7.0


def test_hausdorff_against_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        X = [rng.random((2, 2)) for _ in range(4)]
        Y = [rng.random((2, 2)) for _ in range(3)]
        X = [x + x.T for x in X]
        Y = [y + y.T for y in Y]
        assert set_distance(X, Y) == pytest.approx(oracles.hausdorff_linf(X, Y))


def test_matching_distance_against_brute_force_bijections():
    rng = np.random.default_rng(6)
    for _ in range(10):
        X = [np.diag(rng.random(2)) for _ in range(3)]
        Y = [np.diag(rng.random(2)) for _ in range(3)]
        brute = min(max(np.abs(X[i] - Y[p[i]]).max() for i in range(3)) for p in itertools.permutations(range(3)))
        assert set_distance(X, Y, "matching") == pytest.approx(brute)


def test_partition_distance_examples():
    G = cycle_graph(4)
    assert partition_distance(G, G, F(1, 4), kmax=3).value == 0
    d = partition_distance(G, TWO_K2, F(1, 4), kmax=2)
    # Hausdorff distance 2 at k=2, clamped to 1 and weighted by 1/4
    assert d.value == pytest.approx(0.25) and d.kind == "exact"


def test_partition_distance_search_is_estimate_and_reproducible():
    a, b = sample_gnp(40, 2, seed=0), sample_gnp(40, 2, seed=1)
    x = partition_distance(a, b, kmax=3, mode="search", budget=500, seed=5)
    y = partition_distance(a, b, kmax=3, mode="search", budget=500, seed=5)
    assert x.kind == "estimate" and x.value == y.value


def test_graph_partitions_are_kernel_splits():
    G = sample_gnp(30, 3, seed=6)
    k = graph_to_kernel(G)
    rng = np.random.default_rng(0)
    for _ in range(5):
        lab = rng.permutation(np.arange(30) % 3)
        assert np.allclose(kernel_split_matrix(k, crisp_split(lab, 3)), density_matrix(G, lab, 3))


def test_kernel_splits_of_chessboard():
    sp = sample_kernel_splits(chessboard_kernel(4, 0), 2, 10, seed=1)
    # every balanced split keeps the total integral 2 and symmetric entries
    for m in sp.matrices:
        assert np.allclose(m, m.T)
        assert m.sum() / 4 == pytest.approx(2)


def test_point_to_set():
    X = [np.array([[0, 4], [4, 0]], float), np.array([[2, 2], [2, 2]], float)]
    assert point_to_set([[1, 3], [3, 1]], X) == pytest.approx(1)
