"""Sets of coloured-neighbourhood laws over k-colourings, and the distance built on them.

Colourings here are unconstrained maps ``V -> {0..k-1}`` (classes may be
empty or unbalanced) with labelled colours.  Laws are compared in total
variation, half the l1 distance.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import DomainError, SizeRefusal
from ..graph import Graph
from ..rooted import bfs_ball, ball_key
from .local import NeighbourhoodLaw, law_tv, neighbourhood_law


@dataclass
class ColouredSpectrum:
    k: int
    t: int
    laws: list
    provenance: str
    evaluations: int = 0

    def __len__(self) -> int:
        return len(self.laws)


def _add(found: dict, law: NeighbourhoodLaw):
    key = law.frozen()
    if key not in found:
        found[key] = law


class _Recolouring:
    """Colouring with per-vertex ball keys, updated locally when one vertex changes colour."""

    def __init__(self, G: Graph, t: int, colouring):
        self.G, self.t = G, t
        self.col = [int(c) for c in colouring]
        adj = G.adj
        self.keys = [ball_key(adj, v, t, self.col) for v in range(G.n)]
        self.counts = Counter(self.keys)

    def law(self) -> NeighbourhoodLaw:
        n = self.G.n
        return NeighbourhoodLaw(self.t, {k: Fraction(c, n) for k, c in self.counts.items() if c}, None)

    def recolour(self, v: int, c: int):
        old = self.col[v]
        self.col[v] = c
        adj = self.G.adj
        affected, _ = bfs_ball(adj, v, self.t)
        for u in affected:
            self.counts[self.keys[u]] -= 1
            self.keys[u] = ball_key(adj, u, self.t, self.col)
            self.counts[self.keys[u]] += 1
        return old


def coloured_spectrum(G: Graph, k: int, t: int, mode: str = "exact", budget: int = 4096, seed=0) -> ColouredSpectrum:
    """Distinct coloured-neighbourhood laws over k-colourings of ``G``.

    Exact mode enumerates all ``k^n`` colourings (refused above ``budget``).
    Search mode, an inner approximation, combines uniform random colourings,
    colourings from balanced-partition starts, and recolouring hill climbs
    that push the law away (in total variation) from laws already found.
    """
    if k < 1:
        raise DomainError("k must be positive")
    n = G.n
    if k == 1:
        return ColouredSpectrum(k, t, [neighbourhood_law(G, t, [0] * n)], "exact", 1)
    found: dict = {}
    if mode == "exact":
        total = k ** n
        if total > budget:
            raise SizeRefusal(f"{total} colourings exceed the budget of {budget}")
        for col in itertools.product(range(k), repeat=n):
            _add(found, neighbourhood_law(G, t, col))
        return ColouredSpectrum(k, t, list(found.values()), "exact", total)
    if mode != "search":
        raise DomainError(f"unknown mode {mode!r}")
    from .partition import _contiguous_start, _two_colour_start
    rng = np.random.default_rng(seed)
    used = 0
    starts = [np.zeros(n, dtype=np.int64), _contiguous_start(G, k)]
    if k == 2:
        starts.append(_two_colour_start(G))
    for s in starts:
        _add(found, neighbourhood_law(G, t, s))
        used += 1
    n_random = max(1, budget // 4)
    for _ in range(n_random):
        _add(found, neighbourhood_law(G, t, rng.integers(0, k, size=n)))
        used += 1
    while used < budget:
        state = _Recolouring(G, t, rng.integers(0, k, size=n))
        target = list(found.values())[int(rng.integers(0, len(found)))]
        cur = law_tv(state.law().probs, target.probs)
        for _ in range(min(4 * n, budget - used)):
            v = int(rng.integers(0, n))
            c = int(rng.integers(0, k))
            if c == state.col[v]:
                continue
            old = state.recolour(v, c)
            used += 1
            val = law_tv(state.law().probs, target.probs)
            if val >= cur:
                cur = val
                _add(found, state.law())
            else:
                state.recolour(v, old)
            if used >= budget:
                break
    return ColouredSpectrum(k, t, list(found.values()), "search", used)


def hausdorff_tv(A: ColouredSpectrum, B: ColouredSpectrum) -> float:
    if not A.laws or not B.laws:
        raise DomainError("empty law set")
    d = np.array([[law_tv(a.probs, b.probs) for b in B.laws] for a in A.laws])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def coloured_distance(G1: Graph, G2: Graph, kmax: int = 2, tmax: int = 2, mode: str = "exact",
                      budget: int = 4096, seed=0):
    """``sum_{k=1..kmax} sum_{t=1..tmax} 2^(-k-t) d_H``; the truncation of the grid is the caller's choice."""
    from .common import Estimate
    total = 0.0
    for k in range(1, kmax + 1):
        for t in range(1, tmax + 1):
            a = coloured_spectrum(G1, k, t, mode, budget, seed)
            b = coloured_spectrum(G2, k, t, mode, budget, seed + 1)
            total += 2.0 ** (-k - t) * hausdorff_tv(a, b)
    exact = mode == "exact" or kmax == 1
    return Estimate(total, "exact" if exact else "estimate")


def colour_blind_key(G: Graph, t: int, colouring, k: int):
    """Key of the law of ``colouring`` that ignores the names of the colours."""
    best = None
    for perm in itertools.permutations(range(k)):
        col = [perm[c] for c in colouring]
        key = tuple(sorted((g, str(p)) for g, p in neighbourhood_law(G, t, col).probs.items()))
        if best is None or key < best:
            best = key
    return best
