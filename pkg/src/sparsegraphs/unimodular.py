"""Root-degree biasing, the shift, and involution-invariance checks for rooted-graph laws.

A law is a finite mixture of support entries:

* :class:`QTEntry` - the quasi-transitive tree of an integer matrix ``A``
  (a type-``i`` vertex has ``a_ij`` neighbours of type ``j``) rooted at a type;
* :class:`BallEntry` - a finite rooted graph, either complete (a finite tree or
  graph) or known only up to a truncation radius.

Rules of radius ``t`` are indicator functions of doubly rooted balls
``(B_t(x), y)`` with ``y`` a neighbour of ``x``, keyed canonically.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._numbers import close, format_number, parse_number, unify
from .errors import DomainError, InsufficientDepthError, UnsupportedLawError
from .kernel_core import stable_partition
from .rooted import RootedGraph, RootedTree, ball_key, bfs_ball, parse_code


@dataclass(frozen=True)
class QuasiTransitiveSpec:
    """Square nonnegative integer matrix; ``a_ij > 0`` must hold exactly when ``a_ji > 0``."""

    matrix: tuple

    def __post_init__(self):
        a = [[int(v) for v in row] for row in self.matrix]
        m = len(a)
        if m == 0 or any(len(row) != m for row in a):
            raise DomainError("matrix must be square and nonempty")
        for i in range(m):
            for j in range(m):
                if a[i][j] < 0:
                    raise DomainError("entries must be nonnegative")
                if (a[i][j] > 0) != (a[j][i] > 0):
                    raise DomainError(f"a[{i}][{j}] and a[{j}][{i}] must be both positive or both zero")
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in a))

    @property
    def types(self) -> int:
        return len(self.matrix)

    def degree(self, i: int) -> int:
        return sum(self.matrix[i])

    def collapse(self) -> tuple:
        """Type classes with identical trees (coarsest equitable partition), first-occurrence order."""
        ones = [1] * self.types
        return tuple(stable_partition(self.matrix, ones, 0.0))


def build_qt_tree(spec: QuasiTransitiveSpec, root_type: int, depth: int) -> RootedGraph:
    """The quasi-transitive tree rooted at ``root_type``, truncated at ``depth``.

    Vertex 0 is the root; ``labels`` hold the types and ``annotations`` the
    parent and depth of each vertex.
    """
    if not 0 <= root_type < spec.types:
        raise DomainError("root type out of range")
    A = spec.matrix
    types = [root_type]
    parent = [-1]
    depths = [0]
    adj: list[list[int]] = [[]]
    q = deque([0])
    while q:
        v = q.popleft()
        if depths[v] == depth:
            continue
        counts = list(A[types[v]])
        if parent[v] >= 0:
            counts[types[parent[v]]] -= 1
        for j, c in enumerate(counts):
            for _ in range(c):
                u = len(types)
                types.append(j)
                parent.append(v)
                depths.append(depths[v] + 1)
                adj.append([v])
                adj[v].append(u)
                q.append(u)
    return RootedGraph(adj, None, {"types": types, "parent": parent, "depth": depths})


def _gm_children(v):
    a, w = v
    if a == 0:
        return [(0, w + "0"), (0, w + "1")]
    if w == "":
        return [(a - 1, ""), (a, "1")]
    return [(a, w + "0"), (a, w + "1")]


def _gm_parent(v):
    a, w = v
    if w == "":
        return (a + 1, "")
    return (a, w[:-1])


def grandmother_graph(depth: int) -> RootedGraph:
    """Ball of radius ``depth`` in the grandmother graph.

    Start from the 3-regular tree with a distinguished end, so every vertex
    has one parent and two children, and join each vertex to its grandparent
    and grandchildren as well.  Vertices are named ``(a, w)``: go up ``a``
    generations from the root, then down along the word ``w``.
    """
    if depth < 1:
        raise DomainError("depth must be at least 1")

    def nbrs(v):
        p = _gm_parent(v)
        kids = _gm_children(v)
        out = [p, _gm_parent(p)] + kids
        for c in kids:
            out.extend(_gm_children(c))
        return out

    root = (0, "")
    index = {root: 0}
    names = [root]
    dist = [0]
    adj: list[list[int]] = [[]]
    q = deque([root])
    while q:
        v = q.popleft()
        i = index[v]
        for u in nbrs(v):
            if u not in index:
                if dist[i] == depth:
                    continue
                index[u] = len(names)
                names.append(u)
                dist.append(dist[i] + 1)
                adj.append([])
                q.append(u)
            j = index[u]
            if j not in adj[i]:
                adj[i].append(j)
                adj[j].append(i)
    parent = {}
    for v, i in index.items():
        p = _gm_parent(v)
        if p in index:
            parent[i] = index[p]
    return RootedGraph(adj, None, {"names": names, "parent": parent, "dist": dist})


# ---------------------------------------------------------------------------
# laws


@dataclass(frozen=True)
class QTEntry:
    spec: QuasiTransitiveSpec
    root_type: int


@dataclass
class BallEntry:
    """A finite rooted graph (root = vertex 0); ``radius`` is None when complete."""

    graph: RootedGraph
    radius: int | None = None

    @classmethod
    def from_tree(cls, tree) -> "BallEntry":
        code = tree.code if isinstance(tree, RootedTree) else tree
        parent, labels = parse_code(code)
        adj: list[list[int]] = [[] for _ in parent]
        for v, p in enumerate(parent):
            if p >= 0:
                adj[v].append(p)
                adj[p].append(v)
        labs = labels if any(labels) else None
        return cls(RootedGraph(adj, labs), None)


@dataclass
class FiniteSupportLaw:
    entries: list
    weights: list

    def __post_init__(self):
        if len(self.entries) != len(self.weights) or not self.entries:
            raise DomainError("need one weight per entry and at least one entry")
        w = unify([parse_number(x) if isinstance(x, str) else x for x in self.weights])
        if any(x < 0 for x in w):
            raise DomainError("weights must be nonnegative")
        if not close(sum(w), 1, 1e-9):
            raise DomainError("weights must sum to 1")
        self.weights = w

    @classmethod
    def qt(cls, spec, weights) -> "FiniteSupportLaw":
        """Law over the root types of a single quasi-transitive spec."""
        if not isinstance(spec, QuasiTransitiveSpec):
            spec = QuasiTransitiveSpec(spec)
        return cls([QTEntry(spec, i) for i in range(spec.types)], list(weights))

    @classmethod
    def point(cls, entry) -> "FiniteSupportLaw":
        return cls([entry], [Fraction(1)])

    def type_weights(self, spec: QuasiTransitiveSpec) -> list:
        """Weights of the root types of ``spec``, merged over collapsed types."""
        cls_of = spec.collapse()
        zero = 0 * self.weights[0]
        out = [zero] * (max(cls_of) + 1)
        for e, w in zip(self.entries, self.weights):
            if not isinstance(e, QTEntry) or e.spec != spec:
                raise DomainError("law is not supported on this spec")
            out[cls_of[e.root_type]] += w
        return out

    def expected_degree(self):
        return sum((w * _root_degree(e) for e, w in zip(self.entries, self.weights)), 0 * self.weights[0])

    def to_dict(self) -> dict:
        sup = []
        for e in self.entries:
            if isinstance(e, QTEntry):
                sup.append({"qt_matrix": [list(r) for r in e.spec.matrix], "root_type": e.root_type})
            elif isinstance(e, BallEntry) and e.radius is None and _is_tree(e.graph):
                sup.append({"tree": e.graph.key()})
            else:
                raise DomainError("only quasi-transitive and finite-tree entries serialise")
        return {"support": sup, "weights": [format_number(w) for w in self.weights]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteSupportLaw":
        entries = []
        for s in d["support"]:
            if "qt_matrix" in s:
                entries.append(QTEntry(QuasiTransitiveSpec(tuple(map(tuple, s["qt_matrix"]))), int(s["root_type"])))
            else:
                entries.append(BallEntry.from_tree(s["tree"]))
        return cls(entries, [parse_number(w) for w in d["weights"]])


def _is_tree(g: RootedGraph) -> bool:
    return g.edge_count() == g.n - 1


def _root_degree(e) -> int:
    if isinstance(e, QTEntry):
        return e.spec.degree(e.root_type)
    return e.graph.degree(0)


def law_from_graph(G, radius: int, colouring=None) -> FiniteSupportLaw:
    """Empirical law of ``G`` rooted at a uniform vertex, as radius-``radius`` truncated balls."""
    adj = G.adj
    groups: dict = {}
    for v in range(G.n):
        key = ball_key(adj, v, radius, colouring)
        if key not in groups:
            order, _ = bfs_ball(adj, v, radius)
            idx = {u: i for i, u in enumerate(order)}
            sub = [[idx[u] for u in adj[x] if u in idx] for x in order]
            labs = None if colouring is None else [colouring[x] for x in order]
            groups[key] = [BallEntry(RootedGraph(sub, labs), radius), 0]
        groups[key][1] += 1
    entries = [g[0] for g in groups.values()]
    weights = [Fraction(g[1], G.n) for g in groups.values()]
    return FiniteSupportLaw(entries, weights)


# ---------------------------------------------------------------------------
# size-biased shift


def size_biased_shift(pi: FiniteSupportLaw):
    """Return ``(biased, shifted)``: root-degree biasing, then re-rooting at a uniform neighbour."""
    mean = pi.expected_degree()
    if mean == 0:
        raise DomainError("expected root degree is zero")
    biased_w = [w * _root_degree(e) / mean for e, w in zip(pi.entries, pi.weights)]
    keep = [i for i, w in enumerate(biased_w) if w != 0]
    biased = FiniteSupportLaw([pi.entries[i] for i in keep], [biased_w[i] for i in keep])
    out: dict = {}
    order = []
    for e, w in zip(biased.entries, biased.weights):
        d = _root_degree(e)
        for target, mult in _neighbour_rerootings(e):
            key = _entry_key(target)
            if key not in out:
                out[key] = [target, 0 * w]
                order.append(key)
            out[key][1] += w * mult / d
    shifted = FiniteSupportLaw([out[k][0] for k in order], [out[k][1] for k in order])
    return biased, shifted


def _neighbour_rerootings(e):
    if isinstance(e, QTEntry):
        row = e.spec.matrix[e.root_type]
        return [(QTEntry(e.spec, j), row[j]) for j in range(len(row)) if row[j]]
    if e.radius is not None:
        raise UnsupportedLawError("re-rooting a truncated ball loses information; support not closed")
    g = e.graph
    out = []
    for y in g.adj[0]:
        order, _ = bfs_ball(g.adj, y, g.n)
        idx = {u: i for i, u in enumerate(order)}
        sub = [[idx[u] for u in g.adj[x]] for x in order]
        labs = None if g.labels is None else [g.labels[x] for x in order]
        out.append((BallEntry(RootedGraph(sub, labs), None), 1))
    return out


def _entry_key(e):
    if isinstance(e, QTEntry):
        return ("qt", e.spec, e.spec.collapse()[e.root_type])
    return ("ball", e.radius, e.graph.key())


def laws_equal(a: FiniteSupportLaw, b: FiniteSupportLaw, tol: float = 1e-12) -> bool:
    """Equality of laws after merging entries with the same rooted object."""
    def agg(law):
        out: dict = {}
        for e, w in zip(law.entries, law.weights):
            k = _entry_key(e)
            out[k] = out.get(k, 0) + w
        return out
    x, y = agg(a), agg(b)
    return all(close(x.get(k, 0), y.get(k, 0), tol) for k in set(x) | set(y))


def shift_invariant_weights(spec: QuasiTransitiveSpec) -> list:
    """Root-type law whose degree-biased version is stationary for the uniform-neighbour walk.

    Solved exactly in rationals; requires the type graph to be connected.
    """
    m = spec.types
    A = spec.matrix
    deg = [Fraction(spec.degree(i)) for i in range(m)]
    if any(d == 0 for d in deg):
        raise DomainError("every type needs a positive degree")
    # nu (P - I) = 0, sum nu = 1, with P_ij = a_ij / d_i
    rows = [[Fraction(A[i][j]) / deg[i] - (1 if i == j else 0) for i in range(m)] for j in range(m)]
    rows[-1] = [Fraction(1)] * m
    rhs = [Fraction(0)] * (m - 1) + [Fraction(1)]
    nu = _solve(rows, rhs)
    pi = [nu[i] / deg[i] for i in range(m)]
    s = sum(pi)
    return [x / s for x in pi]


def _solve(rows, rhs):
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise DomainError("singular system: type graph is not connected")
        a[c], a[piv] = a[piv], a[c]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[i][n] / a[i][i] for i in range(n)]


def detailed_balance_weights(spec: QuasiTransitiveSpec):
    """Root-type law with ``pi_i a_ij = pi_j a_ji`` for all pairs, or ``None`` if there is none."""
    m = spec.types
    A = spec.matrix
    pi = [None] * m
    pi[0] = Fraction(1)
    q = deque([0])
    while q:
        i = q.popleft()
        for j in range(m):
            if A[i][j]:
                val = pi[i] * A[i][j] / A[j][i]
                if pi[j] is None:
                    pi[j] = val
                    q.append(j)
                elif pi[j] != val:
                    return None
    if any(p is None for p in pi):
        return None
    s = sum(pi)
    return [p / s for p in pi]


# ---------------------------------------------------------------------------
# rules and involution invariance


@dataclass
class LocalRule:
    """Indicator of a doubly rooted radius-``radius`` ball.

    ``predicate(ball, x, y)`` receives the induced ball around ``x`` as a
    :class:`RootedGraph` (``x`` is vertex 0) and the index of ``y``.  Results
    are cached by canonical key, so the rule is isomorphism invariant.
    """

    radius: int
    predicate: Callable
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def indicator(cls, radius: int, key: str) -> "LocalRule":
        rule = cls(radius, lambda ball, x, y: False, name=key)
        rule._cache[key] = True
        rule._only = key
        return rule

    def evaluate(self, adj, x: int, y: int, colours=None) -> bool:
        key = ball_key(adj, x, self.radius, colours, marked=y)
        return self.value_of(key, adj, x, y, colours)

    def value_of(self, key, adj, x, y, colours=None) -> bool:
        if getattr(self, "_only", None) is not None:
            return key == self._only
        if key not in self._cache:
            order, _ = bfs_ball(adj, x, self.radius)
            idx = {u: i for i, u in enumerate(order)}
            sub = [[idx[u] for u in adj[v] if u in idx] for v in order]
            labs = None if colours is None else [colours[v] for v in order]
            self._cache[key] = bool(self.predicate(RootedGraph(sub, labs), 0, idx[y]))
        return self._cache[key]


def constant_rule(radius: int = 1) -> LocalRule:
    return LocalRule(radius, lambda ball, x, y: True, "one")


def degree_rule(dx: int, dy: int, radius: int = 2) -> LocalRule:
    """``deg(x) == dx and deg(y) == dy``; needs radius 2 for ``deg(y)`` to be visible."""
    if radius < 2:
        raise DomainError("the neighbour's degree is only determined at radius 2")
    return LocalRule(radius, lambda b, x, y: b.degree(x) == dx and b.degree(y) == dy, f"deg({dx},{dy})")


def grandmother_parent_rule() -> LocalRule:
    """``y`` is the tree parent of ``x`` in the grandmother graph, read off the radius-1 ball.

    Inside the closed neighbourhood of ``x``, the parent and the two children
    each have three neighbours; only the parent is adjacent to the other two.
    """
    def pred(b, x, y):
        nx = [u for u in b.adj[x]]
        inner = {u: sum(1 for w in b.adj[u] if w in nx) for u in nx}
        threes = {u for u, d in inner.items() if d == 3}
        return y in threes and sum(1 for w in b.adj[y] if w in threes) == 2
    return LocalRule(1, pred, "parent")


@dataclass
class InvolutionResult:
    lhs: object
    rhs: object
    invariant: bool

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.invariant))


def _pairs(e, r: int):
    """Yield ``(mult, adj, x, y, colours)`` for the forward and backward views of each root edge."""
    if isinstance(e, QTEntry):
        spec = e.spec
        row = spec.matrix[e.root_type]
        for j, mult in enumerate(row):
            if not mult:
                continue
            t = build_qt_tree(spec, e.root_type, r + 1)
            types = t.annotations["types"]
            y = next(u for u in t.adj[0] if types[u] == j)
            yield mult, t.adj, 0, y, None
        return
    if e.radius is not None and e.radius < r + 1:
        raise InsufficientDepthError(f"entry known to radius {e.radius}, rule of radius {r} needs {r + 1}")
    g = e.graph
    for y in g.adj[0]:
        yield 1, g.adj, 0, y, g.labels


def involution_check(pi: FiniteSupportLaw, rule: LocalRule, tol: float = 0.0) -> InvolutionResult:
    """Both sides of ``E sum_y f(o, y) = E sum_y f(y, o)`` over the law's support."""
    zero = 0 * pi.weights[0]
    lhs, rhs = zero, zero
    for e, w in zip(pi.entries, pi.weights):
        for mult, adj, x, y, col in _pairs(e, rule.radius):
            if rule.evaluate(adj, x, y, col):
                lhs += w * mult
            if rule.evaluate(adj, y, x, col):
                rhs += w * mult
    return InvolutionResult(lhs, rhs, close(lhs, rhs, tol))


def doubly_rooted_tally(pi: FiniteSupportLaw, r: int):
    """Per canonical doubly rooted key: weight seen with the root first, and with the root second."""
    fwd: dict = {}
    bwd: dict = {}
    zero = 0 * pi.weights[0]
    for e, w in zip(pi.entries, pi.weights):
        for mult, adj, x, y, col in _pairs(e, r):
            k1 = ball_key(adj, x, r, col, marked=y)
            k2 = ball_key(adj, y, r, col, marked=x)
            fwd[k1] = fwd.get(k1, zero) + w * mult
            bwd[k2] = bwd.get(k2, zero) + w * mult
    return fwd, bwd


def scan_violations(pi: FiniteSupportLaw, max_radius: int, tol: float = 0.0) -> list:
    """Indicator rules of radius ``1..max_radius`` whose two sides differ by more than ``tol``.

    An empty result means no violation was found at these radii; it is not a
    proof of involution invariance.
    """
    if max_radius < 1:
        raise DomainError("max_radius must be at least 1")
    out = []
    for r in range(1, max_radius + 1):
        fwd, bwd = doubly_rooted_tally(pi, r)
        zero = 0 * pi.weights[0]
        for key in sorted(set(fwd) | set(bwd)):
            a, b = fwd.get(key, zero), bwd.get(key, zero)
            if not close(a, b, tol):
                out.append((LocalRule.indicator(r, key), a, b))
    return out


def edge_balance_sigma(G, rule: LocalRule, colouring=None) -> float:
    """Standard error of the per-vertex difference ``sum_y f(v, y) - f(y, v)`` under uniform rooting."""
    adj = G.adj
    diffs = np.zeros(G.n)
    for v in range(G.n):
        s = 0
        for y in adj[v]:
            s += int(rule.evaluate(adj, v, y, colouring)) - int(rule.evaluate(adj, y, v, colouring))
        diffs[v] = s
    if G.n < 2:
        return 0.0
    return float(np.std(diffs, ddof=1) / np.sqrt(G.n))
