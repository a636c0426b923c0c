"""Density matrices of balanced partitions, their spectra and set distances.

For a partition ``(P_1..P_k)`` the density matrix has entries
``d_p(P_i, P_j) = e(P_i, P_j) / (p |P_i| |P_j|)`` with ``e`` counting ordered
pairs.  A spectrum is the set of these matrices over balanced partitions
(part sizes differing by at most one, parts ordered).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow
from scipy.spatial import cKDTree

from .._numbers import parse_number
from ..errors import DomainError, SizeRefusal
from ..graph import Graph
from .common import Estimate


def _density(p, n):
    if p is None:
        return 1.0 / n
    return float(parse_number(p)) if isinstance(p, str) else float(p)


def pair_density(G: Graph, U, W, p=None) -> float:
    """``e(U, W) / (p |U| |W|)``, ordered pairs, so internal edges of ``U`` count twice in ``e(U, U)``."""
    U = np.unique(np.asarray(list(U), dtype=np.int64))
    W = np.unique(np.asarray(list(W), dtype=np.int64))
    if len(U) == 0 or len(W) == 0:
        raise DomainError("both vertex sets must be nonempty")
    in_u = np.zeros(G.n, dtype=bool)
    in_w = np.zeros(G.n, dtype=bool)
    in_u[U] = True
    in_w[W] = True
    e = G.edges
    count = 0
    if len(e):
        count = int(np.sum(in_u[e[:, 0]] & in_w[e[:, 1]]) + np.sum(in_u[e[:, 1]] & in_w[e[:, 0]]))
    return count / (_density(p, G.n) * len(U) * len(W))


def balanced_sizes(n: int, k: int) -> tuple:
    q, r = divmod(n, k)
    return tuple([q + 1] * r + [q] * (k - r))


def count_balanced_partitions(n: int, k: int) -> int:
    """Number of ordered partitions of ``[n]`` into ``k`` nonempty parts with sizes differing by <= 1."""
    if k > n or k < 1:
        return 0
    q, r = divmod(n, k)
    return math.comb(k, r) * math.factorial(n) // (math.factorial(q + 1) ** r * math.factorial(q) ** (k - r))


def _edge_counts(edges: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Ordered-pair counts between parts for a batch of labellings ``(B, n)``."""
    B = labels.shape[0]
    out = np.zeros((B, k * k), dtype=np.int64)
    if len(edges) == 0:
        return out.reshape(B, k, k)
    lu = labels[:, edges[:, 0]]
    lv = labels[:, edges[:, 1]]
    offs = (np.arange(B) * k * k)[:, None]
    idx = np.concatenate([lu * k + lv + offs, lv * k + lu + offs], axis=1).ravel()
    out = np.bincount(idx, minlength=B * k * k).reshape(B, k, k)
    return out


def density_matrices(G: Graph, labels, k: int, p=None) -> np.ndarray:
    labels = np.atleast_2d(np.asarray(labels, dtype=np.int64))
    E = _edge_counts(G.edges, labels, k).astype(np.float64)
    sizes = np.stack([np.bincount(row, minlength=k) for row in labels]).astype(np.float64)
    if np.any(sizes == 0):
        raise DomainError("every part must be nonempty")
    return E / (_density(p, G.n) * sizes[:, :, None] * sizes[:, None, :])


def density_matrix(G: Graph, labels, k: int, p=None) -> np.ndarray:
    return density_matrices(G, labels, k, p)[0]


def _enumerate_balanced(n: int, k: int):
    """Yield every ordered balanced k-partition of ``[n]`` as a label tuple."""
    q, r = divmod(n, k)
    for big in itertools.combinations(range(k), r):
        caps = [q + 1 if i in big else q for i in range(k)]
        lab = [0] * n

        def rec(v):
            if v == n:
                yield tuple(lab)
                return
            for part in range(k):
                if caps[part]:
                    caps[part] -= 1
                    lab[v] = part
                    yield from rec(v + 1)
                    caps[part] += 1

        yield from rec(0)


@dataclass
class PartitionSpectrum:
    """Distinct density matrices found for balanced k-partitions.

    ``provenance`` is ``exact`` (every balanced partition enumerated, with
    ``multiplicity`` per distinct matrix) or ``search`` (an inner
    approximation).
    """

    k: int
    matrices: np.ndarray
    provenance: str
    multiplicity: np.ndarray | None = None
    evaluations: int = 0

    def __len__(self) -> int:
        return len(self.matrices)

    @property
    def empty(self) -> bool:
        return len(self.matrices) == 0

    def total(self) -> int:
        return int(self.multiplicity.sum()) if self.multiplicity is not None else len(self)

    def contains(self, matrix, tol: float = 1e-9) -> bool:
        m = np.asarray(matrix, dtype=np.float64)
        return bool(np.any(np.all(np.abs(self.matrices - m[None]) <= tol, axis=(1, 2))))

    def as_set(self) -> set:
        return {tuple(np.round(m, 9).ravel().tolist()) for m in self.matrices}


def _dedupe(mats: np.ndarray, counts: np.ndarray | None = None):
    if len(mats) == 0:
        return mats, counts
    flat = np.round(mats.reshape(len(mats), -1), 10)
    uniq, first, inv = np.unique(flat, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first)
    out = mats[first[order]]
    if counts is None:
        return out, None
    agg = np.bincount(inv.ravel(), weights=counts, minlength=len(uniq))
    return out, agg[order].astype(np.int64)


def partition_spectrum(G: Graph, k: int, p=None, mode: str = "exact", budget: int = 10**6, seed=0) -> PartitionSpectrum:
    """All (exact) or search-found (inner approximation) balanced-partition density matrices."""
    n = G.n
    if k < 1:
        raise DomainError("k must be positive")
    if k > n:
        return PartitionSpectrum(k, np.zeros((0, k, k)), "exact", np.zeros(0, dtype=np.int64))
    if mode == "exact":
        total = count_balanced_partitions(n, k)
        if total > budget:
            raise SizeRefusal(f"{total} balanced partitions exceed the budget of {budget}")
        mats, counts = [], []
        gen = _enumerate_balanced(n, k)
        while True:
            block = list(itertools.islice(gen, 20000))
            if not block:
                break
            m, c = _dedupe(density_matrices(G, np.array(block), k, p), np.ones(len(block)))
            mats.append(m)
            counts.append(c)
        m, c = _dedupe(np.concatenate(mats), np.concatenate(counts).astype(np.float64))
        return PartitionSpectrum(k, m, "exact", c, total)
    if mode in ("search", "sample"):
        return _search_spectrum(G, k, p, budget, np.random.default_rng(seed), climb=(mode == "search"))
    raise DomainError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# search mode


class _SwapSearch:
    """Balanced partition with incremental neighbour-count bookkeeping.

    ``nb[v, a]`` is the number of neighbours of ``v`` in part ``a`` and ``E``
    the ordered-pair count matrix; swaps keep part sizes fixed.
    """

    def __init__(self, G: Graph, k: int, labels: np.ndarray, p: float):
        self.n, self.k = G.n, k
        self.indptr, self.indices = _csr(G)
        self.adjsets = None
        self.edges = G.edges
        self.lab = labels.astype(np.int64).copy()
        self.nb = np.zeros((self.n, k), dtype=np.float64)
        e = G.edges
        if len(e):
            np.add.at(self.nb, (e[:, 0], self.lab[e[:, 1]]), 1)
            np.add.at(self.nb, (e[:, 1], self.lab[e[:, 0]]), 1)
        self.E = _edge_counts(e, self.lab[None], k)[0].astype(np.float64)
        sizes = np.bincount(self.lab, minlength=k).astype(np.float64)
        self.scale = 1.0 / (p * np.outer(sizes, sizes))
        self.G = G

    def matrix(self) -> np.ndarray:
        return self.E * self.scale

    def _adjacent(self, x, y) -> bool:
        a, b = self.indptr[x], self.indptr[x + 1]
        return bool(np.any(self.indices[a:b] == y))

    def _move(self, x, b, H, Wp):
        a = self.lab[x]
        nbrs = self.indices[self.indptr[x]:self.indptr[x + 1]]
        if len(nbrs):
            self.nb[nbrs, a] -= 1
            self.nb[nbrs, b] += 1
            if H is not None:
                H[nbrs] += Wp[b] - Wp[a]
            cnt = np.bincount(self.lab[nbrs], minlength=self.k).astype(np.float64)
            self.E[a] -= cnt
            self.E[:, a] -= cnt
            self.E[b] += cnt
            self.E[:, b] += cnt
        self.lab[x] = b

    def swap(self, x, y, H=None, Wp=None):
        a, b = self.lab[x], self.lab[y]
        self._move(x, b, H, Wp)
        self._move(y, a, H, Wp)

    def climb(self, W: np.ndarray, max_steps: int, record: list, rng, top: int = 4) -> int:
        """Greedy swaps maximising ``sum(W * M)``; records every visited matrix."""
        Wp = W * self.scale
        Wp = (Wp + Wp.T) / 2
        H = self.nb @ Wp
        steps = 0
        k = self.k
        while steps < max_steps:
            best_gain, best = 1e-12, None
            for a in range(k):
                ia = np.flatnonzero(self.lab == a)
                for b in range(a + 1, k):
                    ib = np.flatnonzero(self.lab == b)
                    g1 = 2 * (H[ia, b] - H[ia, a])
                    g2 = 2 * (H[ib, a] - H[ib, b])
                    c1 = ia[np.argpartition(-g1, min(top, len(ia) - 1))[:top]] if len(ia) > top else ia
                    c2 = ib[np.argpartition(-g2, min(top, len(ib) - 1))[:top]] if len(ib) > top else ib
                    corr = 2 * (Wp[a, a] + Wp[b, b] - 2 * Wp[a, b])
                    for x in c1:
                        gx = 2 * (H[x, b] - H[x, a])
                        for y in c2:
                            g = gx + 2 * (H[y, a] - H[y, b])
                            if g > best_gain and self._adjacent(x, y):
                                g -= corr
                            if g > best_gain:
                                best_gain, best = g, (x, y)
            if best is None:
                break
            self.swap(best[0], best[1], H, Wp)
            steps += 1
            record.append(self.matrix())
        return steps


def _csr(G: Graph):
    n = G.n
    e = G.edges
    if len(e) == 0:
        return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return mat.indptr.astype(np.int64), mat.indices.astype(np.int64)


def _random_balanced(n: int, k: int, rng, count: int) -> np.ndarray:
    sizes = balanced_sizes(n, k)
    out = np.empty((count, n), dtype=np.int64)
    for i in range(count):
        parts = rng.permutation(k)
        base = np.repeat(parts, sizes)
        out[i] = rng.permutation(base)
    return out


def _bfs_order(G: Graph) -> np.ndarray:
    from scipy.sparse.csgraph import breadth_first_order
    indptr, indices = _csr(G)
    mat = csr_matrix((np.ones(len(indices)), indices, indptr), shape=(G.n, G.n))
    seen = np.zeros(G.n, dtype=bool)
    order = []
    for s in np.argsort(-G.degrees(), kind="stable"):
        if seen[s]:
            continue
        comp = breadth_first_order(mat, s, directed=False, return_predecessors=False)
        seen[comp] = True
        order.append(comp)
    return np.concatenate(order) if order else np.zeros(0, dtype=np.int64)


def _contiguous_start(G: Graph, k: int) -> np.ndarray:
    order = _bfs_order(G)
    lab = np.empty(G.n, dtype=np.int64)
    lab[order] = np.repeat(np.arange(k), balanced_sizes(G.n, k))
    return lab


def _two_colour_start(G: Graph) -> np.ndarray:
    """BFS parity colouring per component, flipped greedily towards balance, then evened out."""
    from scipy.sparse.csgraph import breadth_first_order
    n = G.n
    indptr, indices = _csr(G)
    mat = csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))
    colour = np.full(n, -1, dtype=np.int64)
    comps = []
    for s in range(n):
        if colour[s] >= 0:
            continue
        order, pred = breadth_first_order(mat, s, directed=False, return_predecessors=True)
        colour[s] = 0
        for v in order[1:]:
            colour[v] = 1 - colour[pred[v]]
        comps.append(order)
    # flip components, largest imbalance first, to bring part 0 near n/2
    comps.sort(key=lambda c: -abs(int(np.sum(colour[c] == 0)) * 2 - len(c)))
    count0 = 0
    for c in comps:
        z = int(np.sum(colour[c] == 0))
        o = len(c) - z
        if abs(count0 + o - n / 2) < abs(count0 + z - n / 2):
            colour[c] = 1 - colour[c]
            count0 += o
        else:
            count0 += z
    target = balanced_sizes(n, 2)[0]
    deg = G.degrees()
    while True:
        c0 = int(np.sum(colour == 0))
        if c0 == target or c0 == n - target:
            break
        src = 0 if c0 > target else 1
        cand = np.flatnonzero(colour == src)
        colour[cand[np.argmin(deg[cand])]] = 1 - src
    if int(np.sum(colour == 0)) != target:
        colour = 1 - colour
    return colour


def _search_spectrum(G: Graph, k: int, p, budget: int, rng, climb: bool = True) -> PartitionSpectrum:
    """Uniform samples, then (if ``climb``) swap searches on entry and direction objectives.

    The samples come first from the same stream, so the samples-only set is
    a subset of the full search set for the same seed.
    """
    n = G.n
    pp = _density(p, n)
    record: list = []
    used = 0
    n_samples = max(1, budget // 5)
    samples = _random_balanced(n, k, rng, n_samples)
    mats = [density_matrices(G, samples, k, pp)]
    used += n_samples
    if not climb:
        m, _ = _dedupe(mats[0])
        return PartitionSpectrum(k, m, "search", None, used)

    # objectives: each entry up and down, the trace up and down, random directions
    objectives = []
    for i in range(k):
        for j in range(i, k):
            w = np.zeros((k, k))
            w[i, j] = w[j, i] = 1.0
            objectives.extend([w, -w])
    objectives.extend([np.eye(k), -np.eye(k)])
    for _ in range(4):
        w = rng.normal(size=(k, k))
        objectives.append((w + w.T) / 2)

    starts = [_contiguous_start(G, k)]
    if k == 2:
        starts.append(_two_colour_start(G))
    # every structured start is itself a partition worth recording
    mats.append(density_matrices(G, np.array(starts), k, pp))
    used += len(starts)

    per_climb = max(10, n // 2)
    rounds = 0
    while used < budget:
        progressed = False
        for w in objectives:
            if used >= budget:
                break
            if rounds < len(starts):
                lab = starts[rounds]
            else:
                lab = _random_balanced(n, k, rng, 1)[0]
            s = _SwapSearch(G, k, lab, pp)
            steps = s.climb(w, min(per_climb, budget - used), record, rng)
            used += max(steps, 1)
            progressed = True
        rounds += 1
        if not progressed:
            break
    if record:
        mats.append(np.array(record))
    m, _ = _dedupe(np.concatenate(mats))
    return PartitionSpectrum(k, m, "search", None, used)


# ---------------------------------------------------------------------------
# distances between spectra


def _points(X):
    if isinstance(X, PartitionSpectrum):
        k = X.k
        mats, mult = X.matrices, X.multiplicity
    else:
        mats = np.asarray(X, dtype=np.float64)
        if mats.size == 0:
            return np.zeros((0, 0)), None
        if mats.ndim == 2:
            mats = mats[None]
        k = mats.shape[1]
        mult = None
    iu = np.triu_indices(k)
    pts = mats[:, iu[0], iu[1]] if len(mats) else np.zeros((0, len(iu[0])))
    return pts, mult


def _linf(a, b):
    return np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)


def set_distance(X, Y, kind: str = "hausdorff", empty_value: float | None = None, use_multiplicity: bool = True) -> float:
    """Distance between two finite sets (or multisets) of symmetric matrices, entrywise sup norm.

    ``hausdorff``: the Hausdorff distance; an empty set is at distance
    ``empty_value`` from any other set.  ``matching``: bottleneck distance over
    fractional bijections (each point of one multiset replicated by the size
    of the other).  ``weighted_matching``: the average-cost version.
    """
    px, mx = _points(X)
    py, my = _points(Y)
    ex, ey = len(px) == 0, len(py) == 0
    if ex and ey:
        if kind == "hausdorff":
            raise DomainError("Hausdorff distance between two empty sets is not defined here")
        return 0.0
    if ex or ey:
        if empty_value is None:
            raise DomainError("one set is empty; supply empty_value")
        return float(empty_value)
    if kind == "hausdorff":
        dx, _ = cKDTree(py).query(px, p=np.inf)
        dy, _ = cKDTree(px).query(py, p=np.inf)
        return float(max(dx.max(), dy.max()))
    wx = mx if (use_multiplicity and mx is not None) else np.ones(len(px), dtype=np.int64)
    wy = my if (use_multiplicity and my is not None) else np.ones(len(py), dtype=np.int64)
    wx, wy = np.asarray(wx, dtype=np.int64), np.asarray(wy, dtype=np.int64)
    tx, ty = int(wx.sum()), int(wy.sum())
    g = math.gcd(tx, ty)
    sx, sy = wx * (ty // g), wy * (tx // g)
    cost = _linf(px, py)
    if kind == "matching":
        return _bottleneck(cost, sx, sy)
    if kind == "weighted_matching":
        return _transport(cost, sx / sx.sum(), sy / sy.sum())
    raise DomainError(f"unknown set distance {kind!r}")


def _feasible(cost, sx, sy, thr) -> bool:
    a, b = cost.shape
    src, sink = a + b, a + b + 1
    ii, jj = np.nonzero(cost <= thr + 1e-12)
    big = int(sx.sum())
    rows = np.concatenate([np.full(a, src), ii, a + np.arange(b)])
    cols = np.concatenate([np.arange(a), a + jj, np.full(b, sink)])
    caps = np.concatenate([sx, np.full(len(ii), big), sy]).astype(np.int32)
    graph = csr_matrix((caps, (rows, cols)), shape=(a + b + 2, a + b + 2))
    return maximum_flow(graph, src, sink).flow_value == big


def _bottleneck(cost, sx, sy) -> float:
    if int(sx.sum()) >= 2 ** 31:
        raise SizeRefusal("multiset sizes too large for the bottleneck matching")
    vals = np.unique(cost)
    lo, hi = 0, len(vals) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(cost, sx, sy, vals[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(vals[lo])


def _transport(cost, px, py) -> float:
    a, b = cost.shape
    A_eq = []
    for i in range(a):
        row = np.zeros((a, b))
        row[i] = 1
        A_eq.append(row.ravel())
    for j in range(b):
        col = np.zeros((a, b))
        col[:, j] = 1
        A_eq.append(col.ravel())
    res = linprog(cost.ravel(), A_eq=np.array(A_eq), b_eq=np.concatenate([px, py]), bounds=(0, None), method="highs")
    if not res.success:
        raise DomainError(f"transport problem failed: {res.message}")
    return float(res.fun)


def density_bound(*graphs: Graph, p=None) -> float:
    """``C`` in ``e(G) <= C p n^2 / 2``: the largest ``2e(G)/(p n^2)`` over the inputs."""
    vals = []
    for G in graphs:
        if G.n:
            vals.append(2 * G.m / (_density(p, G.n) * G.n * G.n))
    return max(vals) if vals else 0.0


def partition_distance(G1: Graph, G2: Graph, p=None, kmax: int = 3, mode: str = "exact", budget: int = 10**6,
                       seed=0, kind: str = "hausdorff") -> Estimate:
    """``sum_{k=2..kmax} 2^-k min(d(M_k(G1), M_k(G2)), 1)``.

    In search mode both spectra are inner approximations and the value has
    no guaranteed direction, so it is reported as an estimate.
    """
    C = density_bound(G1, G2, p=p)
    total = 0.0
    for k in range(2, kmax + 1):
        s1 = partition_spectrum(G1, k, p, mode, budget, seed)
        s2 = partition_spectrum(G2, k, p, mode, budget, seed + 1 if mode == "search" else seed)
        if s1.empty and s2.empty:
            d = 0.0
        else:
            d = set_distance(s1, s2, kind, empty_value=(2 * k) ** 2 * C if C > 0 else 1.0)
        total += 2.0 ** (-k) * min(d, 1.0)
    return Estimate(total, "exact" if mode == "exact" else "estimate")


def point_to_set(matrix, X) -> float:
    """Sup-norm distance from one matrix to the nearest member of a spectrum."""
    px, _ = _points(X)
    if len(px) == 0:
        raise DomainError("empty spectrum")
    q, _ = _points(np.asarray(matrix, dtype=np.float64))
    d, _ = cKDTree(px).query(q, p=np.inf)
    return float(d[0])


# ---------------------------------------------------------------------------
# kernel side: fractional splits of a step kernel


def kernel_split_matrix(kernel, split) -> np.ndarray:
    """Density matrix of a fractional split of a step kernel.

    ``split[i, a]`` is the mass of type ``i`` placed in part ``a``; rows must
    sum to the type masses.  Entry ``(a, b)`` is the kernel integral over
    part ``a`` times part ``b`` divided by the two part masses, which for the
    kernel of a graph and a crisp split is exactly the graph density matrix.
    """
    S = np.asarray(split, dtype=np.float64)
    mu = kernel.mu_array()
    if S.ndim != 2 or S.shape[0] != len(mu) or np.any(S < -1e-12):
        raise DomainError("split must be a nonnegative (types x parts) matrix")
    if not np.allclose(S.sum(axis=1), mu, atol=1e-9):
        raise DomainError("split rows must sum to the type masses")
    mass = S.sum(axis=0)
    if np.any(mass <= 0):
        raise DomainError("every part needs positive mass")
    return S.T @ kernel.kappa_array() @ S / np.outer(mass, mass)


def crisp_split(labels, k: int) -> np.ndarray:
    """Split of ``n`` equal-mass types given by a vertex labelling."""
    labels = np.asarray(labels, dtype=np.int64)
    S = np.zeros((len(labels), k))
    S[np.arange(len(labels)), labels] = 1.0 / len(labels)
    return S


def sample_kernel_splits(kernel, k: int, count: int, seed=0, sweeps: int = 200) -> PartitionSpectrum:
    """Random balanced fractional splits (each part of mass ``1/k``), a sampled inner view of the kernel spectrum."""
    rng = np.random.default_rng(seed)
    mu = kernel.mu_array()
    mats = []
    for _ in range(count):
        S = rng.random((len(mu), k)) + 1e-12
        for _ in range(sweeps):
            S *= (mu / S.sum(axis=1))[:, None]
            S *= (1.0 / k) / S.sum(axis=0)[None, :]
        S *= (mu / S.sum(axis=1))[:, None]
        mats.append(kernel_split_matrix(kernel, S))
    arr = np.array(mats).reshape(-1, k, k)
    return PartitionSpectrum(k, arr, "sampled", np.ones(len(arr), dtype=np.int64), count)
