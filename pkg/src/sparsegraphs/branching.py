"""Multi-type Poisson Galton--Watson processes and their neighbourhood-tree laws.

A particle of type ``x`` has independent ``Poisson(kappa[x][y] * mu[y])``
children of each type ``y``.  This module samples such trees, computes the
law of the depth-``t`` truncation exactly (up to a size cap), builds the
nested expected-degree measures, and estimates root-type reconstruction.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._numbers import DEFAULT_TOL, close
from .errors import DomainError, InsufficientDepthError
from .kernel_core import FiniteKernel, expected_degree
from .rooted import RootedTree


def _root_law(k: FiniteKernel, root_law) -> np.ndarray:
    if root_law is None:
        return k.mu_array()
    if isinstance(root_law, (int, np.integer)) and not isinstance(root_law, bool):
        if not 0 <= root_law < k.type_count:
            raise DomainError("root type out of range")
        law = np.zeros(k.type_count)
        law[int(root_law)] = 1.0
        return law
    law = np.array([float(v) for v in root_law], dtype=np.float64)
    if law.shape != (k.type_count,) or np.any(law < 0) or abs(law.sum() - 1) > 1e-9:
        raise DomainError("root_law must be a probability vector over the kernel's types")
    return law


# ---------------------------------------------------------------------------
# sampling


def _sample_levels(rates: np.ndarray, root_types: np.ndarray, t: int, rng):
    """Grow a forest generation by generation.

    Returns a list of ``(types, parent)`` per level; ``parent`` indexes the
    previous level (``-1`` at level 0).  Children of a vertex are contiguous.
    """
    m = rates.shape[0]
    levels = [(root_types.astype(np.int64), np.full(len(root_types), -1, dtype=np.int64))]
    for _ in range(t):
        types = levels[-1][0]
        if len(types) == 0:
            levels.append((types, types.copy()))
            continue
        counts = rng.poisson(rates[types])
        child_types = np.repeat(np.tile(np.arange(m), len(types)), counts.ravel())
        parent = np.repeat(np.arange(len(types)), counts.sum(axis=1))
        levels.append((child_types, parent))
    return levels


@dataclass
class TypedTree:
    """A sampled tree: ``parent[v]`` (``-1`` at the root), ``types[v]``, ``depth[v]``."""

    parent: np.ndarray
    types: np.ndarray
    depth: np.ndarray
    t: int

    @property
    def size(self) -> int:
        return len(self.parent)

    def shape(self, s: int | None = None) -> RootedTree:
        """The untyped tree restricted to height ``s`` (default: full depth)."""
        return self._code(s, typed=False)

    def typed_shape(self, s: int | None = None) -> RootedTree:
        return self._code(s, typed=True)

    def _code(self, s, typed):
        s = self.t if s is None else s
        if s > self.t:
            raise InsufficientDepthError(f"tree generated to depth {self.t}, asked for {s}")
        keep = np.flatnonzero(self.depth <= s)
        index = {int(v): i for i, v in enumerate(keep)}
        par = [index[int(self.parent[v])] if self.parent[v] >= 0 else -1 for v in keep]
        labels = [str(int(self.types[v])) for v in keep] if typed else None
        return RootedTree.from_parents(par, labels)


def _levels_to_trees(levels, t) -> list[TypedTree]:
    n_roots = len(levels[0][0])
    # owner tree of each vertex, level by level
    owners = [np.arange(n_roots)]
    for types, parent in levels[1:]:
        owners.append(owners[-1][parent] if len(parent) else parent)
    per_tree: list[list] = [[] for _ in range(n_roots)]
    local_index = []
    for d, ((types, parent), own) in enumerate(zip(levels, owners)):
        idx = np.zeros(len(types), dtype=np.int64)
        for v in range(len(types)):
            r = int(own[v])
            lst = per_tree[r]
            idx[v] = len(lst)
            p = -1 if d == 0 else int(local_index[d - 1][parent[v]])
            lst.append((p, int(types[v]), d))
        local_index.append(idx)
    out = []
    for lst in per_tree:
        arr = np.array(lst, dtype=np.int64).reshape(-1, 3)
        out.append(TypedTree(arr[:, 0], arr[:, 1], arr[:, 2], t))
    return out


def sample_bp(k: FiniteKernel, root_law=None, t: int = 1, seed=None) -> TypedTree:
    """One branching-process tree generated to depth ``t``.

    ``root_law`` is a probability vector over types, or a single type index;
    it defaults to ``mu``.
    """
    return sample_bp_many(k, root_law, t, 1, seed)[0]


def sample_bp_many(k: FiniteKernel, root_law=None, t: int = 1, count: int = 1, seed=None) -> list[TypedTree]:
    if t < 0:
        raise DomainError("depth must be nonnegative")
    rng = np.random.default_rng(seed)
    law = _root_law(k, root_law)
    roots = rng.choice(k.type_count, size=count, p=law)
    return _levels_to_trees(_sample_levels(k.rate_matrix(), roots, t, rng), t)


def sample_shapes(k: FiniteKernel, root_law=None, t: int = 1, count: int = 1, seed=None) -> list[str]:
    """Canonical untyped codes of ``count`` independent depth-``t`` trees (fast path)."""
    if t < 0:
        raise DomainError("depth must be nonnegative")
    rng = np.random.default_rng(seed)
    law = _root_law(k, root_law)
    roots = rng.choice(k.type_count, size=count, p=law)
    levels = _sample_levels(k.rate_matrix(), roots, t, rng)
    codes = ["()"] * len(levels[-1][0])
    for d in range(len(levels) - 1, 0, -1):
        parent = levels[d][1]
        n_up = len(levels[d - 1][0])
        bounds = np.searchsorted(parent, np.arange(n_up + 1))
        up = []
        for v in range(n_up):
            a, b = bounds[v], bounds[v + 1]
            if a == b:
                up.append("()")
            else:
                up.append("(" + "".join(sorted(codes[a:b])) + ")")
        codes = up
    return codes


# ---------------------------------------------------------------------------
# nested expected-degree measures


@dataclass(frozen=True)
class NestedMeasure:
    """Level-1: a number.  Level k > 1: finite measure on level-(k-1) measures.

    ``value`` is the number at level 1, otherwise a tuple of
    ``(support_point, weight)`` pairs with distinct support points in a
    canonical order.
    """

    level: int
    value: object

    def total_mass(self):
        if self.level == 1:
            return self.value
        return sum(w for _, w in self.value)

    def sort_key(self):
        if self.level == 1:
            return (float(self.value),)
        return tuple((p.sort_key(), float(w)) for p, w in self.value)

    def equals(self, other: "NestedMeasure", tol: float = DEFAULT_TOL) -> bool:
        if self.level != other.level:
            return False
        if self.level == 1:
            return close(self.value, other.value, tol)
        if len(self.value) != len(other.value):
            return False
        unmatched = list(other.value)
        for p, w in self.value:
            for i, (q, u) in enumerate(unmatched):
                if close(w, u, tol) and p.equals(q, tol):
                    del unmatched[i]
                    break
            else:
                return False
        return True

    def as_plain(self):
        """Nested dict/number view, support points as their plain views (for display)."""
        if self.level == 1:
            return self.value
        return [(p.as_plain(), w) for p, w in self.value]

    def __repr__(self) -> str:
        if self.level == 1:
            return str(self.value)
        return "{" + ", ".join(f"{p!r} ↦ {w}" for p, w in self.value) + "}"


def _merge(points: Iterable, tol: float) -> NestedMeasure:
    groups: list[list] = []
    for p, w in points:
        if w == 0:
            continue
        for g in groups:
            if g[0].equals(p, tol):
                g[1] += w
                break
        else:
            groups.append([p, w])
    groups.sort(key=lambda g: g[0].sort_key())
    level = groups[0][0].level + 1 if groups else None
    return groups, level


def lambda_hierarchy_all(k: FiniteKernel, level: int, tol: float = DEFAULT_TOL) -> list[NestedMeasure]:
    """The level-``level`` nested measure of every type."""
    if level < 1:
        raise DomainError("level must be at least 1")
    m = k.type_count
    cur = [NestedMeasure(1, expected_degree(k, x)) for x in range(m)]
    for lev in range(2, level + 1):
        nxt = []
        for x in range(m):
            groups, _ = _merge(((cur[y], k.kappa[x][y] * k.mu[y]) for y in range(m)), tol)
            nxt.append(NestedMeasure(lev, tuple((p, w) for p, w in groups)))
        cur = nxt
    return cur


def lambda_hierarchy(k: FiniteKernel, x: int, level: int, tol: float = DEFAULT_TOL) -> NestedMeasure:
    if not 0 <= x < k.type_count:
        raise IndexError("type out of range")
    return lambda_hierarchy_all(k, level, tol)[x]


def mixed_poisson_pmf(mixing, j: int) -> float:
    """``P(Po(Lambda) = j)`` for a finite discrete mixing law ``{rate: prob}``."""
    items = list(mixing.items()) if isinstance(mixing, dict) else [tuple(x) for x in mixing]
    if not items:
        raise DomainError("mixing law is empty")
    if j < 0 or int(j) != j:
        raise DomainError("j must be a nonnegative integer")
    probs = [float(p) for _, p in items]
    if any(p < 0 for p in probs) or abs(sum(probs) - 1) > 1e-9:
        raise DomainError("mixing weights must form a probability vector")
    total = 0.0
    for (lam, _), p in zip(items, probs):
        lam = float(lam)
        if lam < 0:
            raise DomainError("Poisson rates must be nonnegative")
        if lam == 0:
            total += p if j == 0 else 0.0
        else:
            total += p * math.exp(j * math.log(lam) - lam - math.lgamma(j + 1))
    return total


# ---------------------------------------------------------------------------
# tree laws


@dataclass
class TreeLaw:
    """Probabilities of depth-``t`` truncated trees, keyed by canonical code.

    ``truncated`` is the mass of trees not listed (bigger than ``size_cap``);
    it is reported, never renormalised away.
    """

    t: int
    probs: dict
    truncated: float = 0.0
    size_cap: int | None = None

    def total(self) -> float:
        return float(sum(self.probs.values())) + float(self.truncated)

    def get(self, tree) -> float:
        code = tree.code if isinstance(tree, RootedTree) else tree
        return float(self.probs.get(code, 0.0))

    def to_dict(self) -> dict:
        entries = [{"tree": c, "p": float(p)} for c, p in sorted(self.probs.items(), key=lambda kv: (-float(kv[1]), kv[0]))]
        return {"t": self.t, "entries": entries, "truncated": float(self.truncated)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "TreeLaw":
        return cls(int(d["t"]), {e["tree"]: float(e["p"]) for e in d["entries"]}, float(d.get("truncated", 0.0)))


def enumerate_trees(max_height: int, max_size: int) -> list[str]:
    """Codes of every rooted tree with height <= ``max_height`` and at most ``max_size`` vertices."""
    if max_size < 1:
        return []
    level = ["()"]
    for _ in range(max_height):
        level = _trees_over(level, max_size)
    return level


def _trees_over(branches: list[str], cap: int) -> list[str]:
    """All trees whose branches come from ``branches`` and whose size is at most ``cap``."""
    branches = sorted(branches)
    sizes = [b.count("(") for b in branches]
    out = []

    def rec(i, room, parts):
        if i == len(branches):
            out.append("(" + "".join(parts) + ")")
            return
        rec(i + 1, room, parts)
        s = sizes[i]
        mult = 1
        while mult * s <= room:
            rec(i + 1, room - mult * s, parts + [branches[i]] * mult)
            mult += 1

    rec(0, cap - 1, [])
    return out


def exact_tree_law(k: FiniteKernel, root_law=None, t: int = 1, size_cap: int = 12) -> TreeLaw:
    """Exact law of the depth-``t`` truncation for all trees of at most ``size_cap`` vertices.

    The branches of a type-``x`` vertex form a Poisson process over
    (subtree shape) with intensity ``nu_x(B) = sum_y rate[x][y] q(y, B)``, so
    ``q(x, T) = exp(-lambda(x)) * prod_B nu_x(B)^m_B / m_B!``.
    """
    if t < 0:
        raise DomainError("depth must be nonnegative")
    if size_cap < 1:
        raise DomainError("size_cap must be at least 1 to hold the single-vertex tree")
    rates = k.rate_matrix()
    lam = rates.sum(axis=1)
    law = _root_law(k, root_law)
    base = np.exp(-lam)
    q = {"()": np.ones(k.type_count)}
    for _ in range(t):
        nu = {b: rates @ v for b, v in q.items()}
        q = _level_probs(nu, base, size_cap)
    probs = {c: float(law @ v) for c, v in q.items()}
    trunc = max(0.0, 1.0 - sum(probs.values()))
    return TreeLaw(t, probs, trunc, size_cap)


def _level_probs(nu: dict, base: np.ndarray, cap: int) -> dict:
    branches = sorted(nu)
    sizes = [b.count("(") for b in branches]
    out: dict = {}

    def rec(i, room, parts, vec):
        if i == len(branches):
            out["(" + "".join(parts) + ")"] = vec
            return
        rec(i + 1, room, parts, vec)
        s = sizes[i]
        nb = nu[branches[i]]
        mult = 1
        cur = vec
        while mult * s <= room:
            cur = cur * nb / mult
            rec(i + 1, room - mult * s, parts + [branches[i]] * mult, cur)
            mult += 1

    rec(0, cap - 1, [], base.copy())
    return out


def restrict_tree(T: RootedTree, s: int) -> RootedTree:
    return T.restrict(s)


def empirical_tree_law(samples: Sequence, t: int) -> TreeLaw:
    """Empirical law of the height-``t`` restrictions of sampled trees (or codes)."""
    samples = list(samples)
    if not samples:
        raise DomainError("no samples")
    counts: Counter = Counter()
    for s in samples:
        if isinstance(s, TypedTree):
            if s.t < t:
                raise InsufficientDepthError("sample generated to a smaller depth than requested")
            counts[s.shape(t).code] += 1
        else:
            tree = s if isinstance(s, RootedTree) else RootedTree(s)
            counts[tree.restrict(t).code] += 1
    n = len(samples)
    return TreeLaw(t, {c: v / n for c, v in counts.items()}, 0.0, None)


def tv_distance(a: TreeLaw, b: TreeLaw) -> float:
    """Total variation between tree laws, with trees beyond a size cap pooled.

    Trees larger than the smaller of the two caps are merged into one
    overflow outcome on both sides; with caps of 12 and above this bucket is
    negligible for sparse kernels.
    """
    caps = [c for c in (a.size_cap, b.size_cap) if c is not None]
    cap = min(caps) if caps else None

    def split(law):
        inside, over = {}, float(law.truncated)
        for c, p in law.probs.items():
            if cap is not None and c.count("(") > cap:
                over += float(p)
            else:
                inside[c] = float(p)
        return inside, over

    pa, ra = split(a)
    pb, rb = split(b)
    keys = set(pa) | set(pb)
    return 0.5 * (sum(abs(pa.get(c, 0.0) - pb.get(c, 0.0)) for c in keys) + abs(ra - rb))


# ---------------------------------------------------------------------------
# root reconstruction


def reconstruct_root(kernel: FiniteKernel, t: int, m: int, seed=None, root_law=None,
                     condition_on_survival: bool = False) -> float:
    """Mean posterior probability of the true root type given shape and depth-``t`` types.

    Trees are sampled with known root type; for each, the likelihood of the
    observed subtree under every type of a vertex is passed up from depth
    ``t`` (where the likelihood is the indicator of the observed type).
    With ``condition_on_survival`` the mean is over trees reaching depth ``t``.
    """
    if m <= 0:
        raise DomainError("reconstruction accuracy is undefined for zero trials")
    if t < 0:
        raise DomainError("depth must be nonnegative")
    rng = np.random.default_rng(seed)
    prior = _root_law(kernel, root_law)
    rates = kernel.rate_matrix()
    lam = rates.sum(axis=1)
    ntyp = kernel.type_count
    roots = rng.choice(ntyp, size=m, p=prior)
    levels = _sample_levels(rates, roots, t, rng)

    types_t = levels[t][0]
    logL = np.full((len(types_t), ntyp), -np.inf)
    logL[np.arange(len(types_t)), types_t] = 0.0
    alive = np.ones(len(types_t), dtype=bool)
    for d in range(t, 0, -1):
        parent = levels[d][1]
        n_up = len(levels[d - 1][0])
        # child message: log sum_sigma rate[tau, sigma] L_c(sigma)
        shift = logL.max(axis=1, keepdims=True)
        shift[~np.isfinite(shift)] = 0.0
        with np.errstate(divide="ignore"):
            msg = np.log(np.exp(logL - shift) @ rates.T) + shift
        up = np.tile(-lam, (n_up, 1))
        np.add.at(up, parent, msg)
        up_alive = np.zeros(n_up, dtype=bool)
        up_alive[parent[alive]] = True
        logL, alive = up, up_alive
        logL = logL - logL.max(axis=1, keepdims=True)

    with np.errstate(divide="ignore"):
        post = logL + np.log(prior)[None, :]
    post = np.exp(post - post.max(axis=1, keepdims=True))
    post /= post.sum(axis=1, keepdims=True)
    acc = post[np.arange(m), roots]
    if condition_on_survival:
        if not alive.any():
            raise DomainError("no sampled tree reached the observation depth")
        acc = acc[alive]
    return float(acc.mean())


def planted_kernel(c, delta) -> FiniteKernel:
    """Two-type kernel with rate ``c + delta`` within and ``c - delta`` across types."""
    from .kernel_core import chessboard_kernel
    from ._numbers import parse_number
    c, delta = parse_number(c), parse_number(delta)
    if c <= 0 or abs(delta) > c:
        raise DomainError("need c > 0 and |delta| <= c")
    return chessboard_kernel(c + delta, c - delta)
