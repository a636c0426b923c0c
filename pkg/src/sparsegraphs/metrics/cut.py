"""Cut norm of step kernels, cut distance and edit distance between graphs."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..errors import DomainError, SizeRefusal
from ..graph import Graph
from .common import Estimate

EXACT_CUT_LIMIT = 24
EXACT_PERM_LIMIT = 8


def _subset_matrix(bits: int) -> np.ndarray:
    """All 0/1 indicator rows of length ``bits``, row ``s`` encoding subset ``s``."""
    s = np.arange(1 << bits, dtype=np.int64)
    return ((s[:, None] >> np.arange(bits)) & 1).astype(np.float64)


def _exact_cut(w: np.ndarray) -> float:
    """max over S, T of |sum_{S x T} w|, for an already weighted square matrix.

    For fixed S the best T takes the columns of one sign, giving
    ``(sum_j |c_j| + |sum_j c_j|) / 2`` with ``c`` the column sums over S.
    """
    n = w.shape[0]
    if n == 0:
        return 0.0
    lo = n // 2
    hi = n - lo
    low_rows = _subset_matrix(lo) @ w[:lo] if lo else np.zeros((1, n))
    high_rows = _subset_matrix(hi) @ w[lo:]
    chunk = max(1, (1 << 20) // (len(low_rows) * n))
    best = 0.0
    for a in range(0, len(high_rows), chunk):
        col = low_rows[None, :, :] + high_rows[a:a + chunk, None, :]
        val = np.abs(col).sum(axis=2) + np.abs(col.sum(axis=2))
        best = max(best, float(val.max()) / 2)
    return best


def _ascent_cut(w: np.ndarray, restarts: int, rng) -> float:
    n = w.shape[0]
    best = 0.0
    for r in range(restarts):
        for sign in (1.0, -1.0):
            s = rng.random(n) < 0.5 if r else np.ones(n, dtype=bool)
            val = -1.0
            for _ in range(100):
                t = sign * (s.astype(float) @ w) > 0
                s = sign * (w @ t.astype(float)) > 0
                new = sign * float(s.astype(float) @ w @ t.astype(float))
                if new <= val + 1e-15:
                    break
                val = new
            best = max(best, val)
    return best


def cut_norm(matrix, block_weights=None, mode: str = "exact", restarts: int = 20, seed=0) -> Estimate:
    """Cut norm of the step kernel with entries ``matrix`` on blocks of measure ``block_weights``.

    ``block_weights`` defaults to ``1/n`` per block.  Exact mode enumerates
    one side and optimises the other column-wise; heuristic mode runs
    alternating ascent and gives a lower bound.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("cut norm needs a square matrix")
    n = m.shape[0]
    wts = np.full(n, 1.0 / max(n, 1)) if block_weights is None else np.asarray(block_weights, dtype=np.float64)
    if wts.shape != (n,) or np.any(wts < 0):
        raise DomainError("block weights must be a nonnegative vector matching the matrix")
    w = wts[:, None] * m * wts[None, :]
    if mode == "exact":
        if n > EXACT_CUT_LIMIT:
            raise SizeRefusal(f"exact cut norm is limited to {EXACT_CUT_LIMIT} blocks, got {n}")
        return Estimate(_exact_cut(w), "exact")
    if mode in ("heuristic", "search"):
        return Estimate(_ascent_cut(w, restarts, np.random.default_rng(seed)), "lower_bound")
    raise DomainError(f"unknown mode {mode!r}")


def _check_pair(G1: Graph, G2: Graph):
    if G1.n != G2.n:
        raise DomainError("graphs must have the same number of vertices")


def _norm(p, n):
    from .._numbers import parse_number
    if p is None:
        return 1.0 / n
    return float(parse_number(p)) if isinstance(p, str) else float(p)


def _all_perm_arrays(n: int, chunk: int = 5040):
    it = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64)


def cut_distance_graphs(G1: Graph, G2: Graph, p=None, mode: str = "exact", iterations: int = 2000, seed=0) -> Estimate:
    """``min`` over relabellings of ``max_{S,T} |e1(S,T) - e2(S,T)| / (p n^2)``, ordered-pair counts."""
    _check_pair(G1, G2)
    n = G1.n
    if n == 0:
        return Estimate(0.0, "exact")
    scale = _norm(p, n) * n * n
    a1 = G1.adjacency_matrix().astype(np.float64)
    a2 = G2.adjacency_matrix().astype(np.float64)
    if mode == "exact":
        if n > EXACT_PERM_LIMIT:
            raise SizeRefusal(f"exact cut distance is limited to {EXACT_PERM_LIMIT} vertices, got {n}")
        x = _subset_matrix(n)
        best = math.inf
        for perms in _all_perm_arrays(n):
            d = a1[None] - a2[perms[:, :, None], perms[:, None, :]]
            col = np.einsum("si,bij->bsj", x, d)
            val = (np.abs(col).sum(axis=2) + np.abs(col.sum(axis=2))).max(axis=1) / 2
            best = min(best, float(val.min()))
            if best == 0:
                break
        return Estimate(best / scale, "exact")
    if mode not in ("heuristic", "search"):
        raise DomainError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    exact_inner = n <= 12

    def cost(perm):
        d = a1 - a2[np.ix_(perm, perm)]
        if exact_inner:
            return _exact_cut(d)
        return _ascent_cut(d, 4, rng)

    perm = _degree_alignment(G1, G2)
    cur = cost(perm)
    best = cur
    temp = max(cur, 1.0) * 0.1
    for it in range(iterations):
        i, j = rng.integers(0, n, size=2)
        if i == j:
            continue
        cand = perm.copy()
        cand[i], cand[j] = cand[j], cand[i]
        c = cost(cand)
        if c <= cur or rng.random() < math.exp(-(c - cur) / max(temp, 1e-12)):
            perm, cur = cand, c
            best = min(best, cur)
        temp *= 0.998
    return Estimate(best / scale, "upper_bound" if exact_inner else "estimate")


def _degree_alignment(G1: Graph, G2: Graph) -> np.ndarray:
    """Permutation sending the r-th highest-degree vertex of G1 to that of G2."""
    o1 = np.argsort(-G1.degrees(), kind="stable")
    o2 = np.argsort(-G2.degrees(), kind="stable")
    perm = np.empty(G1.n, dtype=np.int64)
    perm[o1] = o2
    return perm


def edit_distance(G1: Graph, G2: Graph, p=None, mode: str = "exact", restarts: int = 5, seed=0) -> Estimate:
    """``min`` over relabellings of ``|E1 Δ E2'| / (p n^2)``."""
    _check_pair(G1, G2)
    n = G1.n
    if n == 0:
        return Estimate(0.0, "exact")
    scale = _norm(p, n) * n * n
    a1 = G1.adjacency_matrix()
    a2 = G2.adjacency_matrix()
    total = G1.m + G2.m
    if mode == "exact":
        if n > EXACT_PERM_LIMIT:
            raise SizeRefusal(f"exact edit distance is limited to {EXACT_PERM_LIMIT} vertices, got {n}")
        best = 0
        for perms in _all_perm_arrays(n):
            overlap = (a1[None] * a2[perms[:, :, None], perms[:, None, :]]).sum(axis=(1, 2)) // 2
            best = max(best, int(overlap.max()))
        return Estimate((total - 2 * best) / scale, "exact")
    if mode not in ("heuristic", "search"):
        raise DomainError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    best = -1
    for r in range(restarts):
        perm = _degree_alignment(G1, G2) if r == 0 else rng.permutation(n)
        best = max(best, _swap_climb(a1, a2, perm))
    return Estimate((total - 2 * best) / scale, "upper_bound")


def _swap_climb(a1, a2, perm) -> int:
    """Hill climb on edge overlap ``sum_{uv} a1[u,v] a2[perm u, perm v] / 2`` by transpositions."""
    n = len(perm)
    perm = perm.copy()
    b = a2[np.ix_(perm, perm)].astype(np.int64)
    a = a1.astype(np.int64)
    improved = True
    while improved:
        improved = False
        # gain of swapping the images of i and j, for all pairs at once
        ab = a @ b
        diag = np.diag(ab)
        gain = -(diag[:, None] + diag[None, :]) + ab + ab.T
        gain += 2 * a * b  # the pair i, j itself is unaffected by the swap
        np.fill_diagonal(gain, 0)
        i, j = np.unravel_index(np.argmax(gain), gain.shape)
        if gain[i, j] > 0:
            perm[[i, j]] = perm[[j, i]]
            b[[i, j]] = b[[j, i]]
            b[:, [i, j]] = b[:, [j, i]]
            improved = True
    return int((a * b).sum() // 2)
