"""Seeded samplers for the sparse random-graph models, and graph -> kernel conversion.

Every sampler accepts ``seed`` as an int, ``None`` or a ``numpy.random.Generator``
and is a deterministic function of its parameters and seed.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numbers import parse_number
from .errors import DomainError
from .graph import Graph, automorphism_count
from .kernel_core import FiniteKernel


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _decode_triangular(idx: np.ndarray):
    """Map ``k`` in ``[0, m(m-1)/2)`` to the pair ``i < j`` with ``k = j(j-1)/2 + i``."""
    j = np.floor((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) / 2).astype(np.int64)
    # guard against floating error at block boundaries
    j -= (j * (j - 1) // 2 > idx)
    j += ((j + 1) * j // 2 <= idx)
    i = idx - j * (j - 1) // 2
    return i, j


def _sample_pairs(rng, count: int, population: int) -> np.ndarray:
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    return np.sort(rng.choice(population, size=count, replace=False)).astype(np.int64)


def _block_sample(groups: Sequence[np.ndarray], prob, rng) -> np.ndarray:
    """Independent edges with probability ``prob[a][b]`` between vertex groups ``a`` and ``b``."""
    out = []
    for a in range(len(groups)):
        ga = groups[a]
        for b in range(a, len(groups)):
            q = float(prob[a][b])
            if q <= 0:
                continue
            gb = groups[b]
            if a == b:
                pop = len(ga) * (len(ga) - 1) // 2
            else:
                pop = len(ga) * len(gb)
            if pop == 0:
                continue
            cnt = int(rng.binomial(pop, min(q, 1.0)))
            idx = _sample_pairs(rng, cnt, pop)
            if a == b:
                i, j = _decode_triangular(idx)
                out.append(np.stack([ga[i], ga[j]], axis=1))
            else:
                out.append(np.stack([ga[idx // len(gb)], gb[idx % len(gb)]], axis=1))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.vstack(out)


def _normalising_density(p, n: int) -> float:
    if p is None:
        return 1.0 / n
    val = float(parse_number(p)) if isinstance(p, str) else float(p)
    if val <= 0:
        raise DomainError("normalising density must be positive")
    return val


def sample_inhomogeneous(k: FiniteKernel, n: int, p=None, seed=None) -> Graph:
    """Inhomogeneous random graph: iid types from ``mu``, edges w.p. ``min(p*kappa, 1)``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = _rng(seed)
    pp = _normalising_density(p, n)
    types = rng.choice(k.type_count, size=n, p=k.mu_array())
    groups = [np.flatnonzero(types == a) for a in range(k.type_count)]
    edges = _block_sample(groups, pp * k.kappa_array(), rng)
    return Graph(n, edges, types)


def sample_gnp(n: int, c, seed=None) -> Graph:
    """Erdős–Rényi ``G(n, c/n)``."""
    c = float(parse_number(c)) if isinstance(c, str) else float(c)
    rng = _rng(seed)
    edges = _block_sample([np.arange(n)], [[c / n]], rng)
    return Graph(n, edges)


def sample_planted_bisection(n: int, p_in, p_out, seed=None) -> Graph:
    """Random exact split into parts of sizes floor(n/2) and ceil(n/2)."""
    p_in, p_out = float(parse_number(p_in)), float(parse_number(p_out))
    if not (0 <= p_in <= 1 and 0 <= p_out <= 1):
        raise DomainError("edge probabilities must lie in [0, 1]")
    rng = _rng(seed)
    perm = rng.permutation(n)
    half = n // 2
    types = np.empty(n, dtype=np.int64)
    types[perm[:half]] = 0
    types[perm[half:]] = 1
    groups = [np.sort(perm[:half]), np.sort(perm[half:])]
    edges = _block_sample(groups, [[p_in, p_out], [p_out, p_in]], rng)
    return Graph(n, edges, types)


def _falling(n: int, f: int) -> int:
    out = 1
    for i in range(f):
        out *= n - i
    return out


def sample_clique_model(n: int, family: Sequence, seed=None) -> Graph:
    """Insert copies of small connected graphs ``F`` with weights ``w_F``.

    Each of the ``n_(f)/|Aut F|`` distinct copies of ``F`` on ``[n]`` is present
    independently with probability ``w_F / n^(f-1)``; duplicate edges collapse.
    """
    rng = _rng(seed)
    chunks = []
    for F, w in family:
        w = float(parse_number(w)) if isinstance(w, str) else float(w)
        if w < 0:
            raise DomainError("weights must be nonnegative")
        if F.n < 2 or not F.is_connected():
            raise DomainError("each inserted graph must be connected with at least 2 vertices")
        f = F.n
        if f > n or w == 0:
            continue
        copies = _falling(n, f) // automorphism_count(F)
        q = min(w / n ** (f - 1), 1.0)
        cnt = int(rng.binomial(copies, q)) if copies < 2 ** 62 else int(rng.poisson(copies * q))
        placed: set = set()
        rows = []
        fe = F.edges
        while len(rows) < cnt:
            need = cnt - len(rows)
            cand = rng.integers(0, n, size=(need + 8, f))
            srt = np.sort(cand, axis=1)
            ok = np.all(srt[:, 1:] != srt[:, :-1], axis=1)
            for row in cand[ok]:
                e = np.sort(row[fe], axis=1)
                key = tuple(map(tuple, e[np.lexsort(e.T[::-1])].tolist()))
                if key in placed:
                    continue
                placed.add(key)
                rows.append(e)
                if len(rows) == cnt:
                    break
        if rows:
            chunks.append(np.vstack(rows))
    edges = np.vstack(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    return Graph(n, edges)


class Multigraph:
    """Triangle-configuration intermediate: triplets of vertices, loops and repeats kept."""

    def __init__(self, n: int, triplets: np.ndarray):
        self.n = n
        self.triplets = triplets

    def edge_list(self) -> np.ndarray:
        t = self.triplets
        return np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [0, 2]]]) if len(t) else np.zeros((0, 2), dtype=np.int64)

    def is_simple(self) -> bool:
        e = np.sort(self.edge_list(), axis=1)
        if np.any(e[:, 0] == e[:, 1]):
            return False
        return len(np.unique(e, axis=0)) == len(e)

    def simplify(self) -> Graph:
        e = self.edge_list()
        e = e[e[:, 0] != e[:, 1]]
        return Graph(self.n, e)


def sample_triangle_config(n: int, d: int, simplify: bool = True, seed=None):
    """Uniform partition of ``n*d`` stubs into triplets, each forming a triangle."""
    if n < 0 or d < 0:
        raise DomainError("n and d must be nonnegative")
    if (n * d) % 3:
        raise DomainError("n*d must be divisible by 3")
    rng = _rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    rng.shuffle(stubs)
    mg = Multigraph(n, stubs.reshape(-1, 3))
    return mg.simplify() if simplify else mg


def graph_to_kernel(G: Graph, p=None) -> FiniteKernel:
    """Step kernel of ``G``: ``n`` types of mass ``1/n``, value ``1/p`` on edges."""
    if G.n < 1:
        raise DomainError("graph must have at least one vertex")
    p = Fraction(1, G.n) if p is None else parse_number(p)
    inv = 1 / p
    zero = 0 * inv
    rows = [[zero] * G.n for _ in range(G.n)]
    for u, v in G.edges.tolist():
        rows[u][v] = rows[v][u] = inv
    one = Fraction(1, G.n) if isinstance(inv, Fraction) else 1.0 / G.n
    return FiniteKernel(tuple([one] * G.n), tuple(tuple(r) for r in rows))


def kernel_to_edges(k: FiniteKernel, p) -> set:
    """Read the edge set back from a step kernel (entries equal to ``1/p``)."""
    inv = 1 / parse_number(p)
    return {(i, j) for i in range(k.type_count) for j in range(i + 1, k.type_count)
            if k.kappa[i][j] != 0 and abs(float(k.kappa[i][j]) - float(inv)) < 1e-9}


def giant_fixed_point(c: float, tol: float = 1e-12) -> float:
    """Largest solution of ``rho = 1 - exp(-c rho)``."""
    rho = 1.0
    for _ in range(100000):
        nxt = 1.0 - np.exp(-c * rho)
        if abs(nxt - rho) < tol:
            return float(nxt)
        rho = nxt
    return float(rho)
