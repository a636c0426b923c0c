"""Canonical forms for rooted trees and small rooted (coloured) graphs.

Trees are encoded by the usual recursive sorted-child-code strings: a vertex
with label ``a`` and child codes ``c1 <= c2 <= ...`` encodes as
``a(c1c2...)``; unlabelled vertices use the empty label, so the single vertex
is ``()`` and a single edge is ``(())``.

Balls that are not trees get a certificate from colour refinement followed by
an individualisation search, keyed ``G[...]``.  Balls that are trees reuse the
tree code, so tree keys agree with the branching-process side.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence


def tree_code(children: Sequence[Sequence[int]], root: int = 0, labels=None) -> str:
    """Canonical code of the tree given by child lists, rooted at ``root``."""
    order = [root]
    i = 0
    while i < len(order):
        order.extend(children[order[i]])
        i += 1
    codes = {}
    for v in reversed(order):
        kids = sorted(codes.pop(c) for c in children[v])
        lab = "" if labels is None else str(labels[v])
        codes[v] = lab + "(" + "".join(kids) + ")"
    return codes[root]


def parse_code(code: str):
    """Parse a tree code into ``(parent, labels)`` arrays in preorder; ``parent[0] == -1``."""
    parent: list[int] = []
    labels: list[str] = []
    stack: list[int] = []
    i, n = 0, len(code)
    while i < n:
        j = i
        while j < n and code[j] not in "()":
            j += 1
        if j >= n:
            raise ValueError(f"malformed tree code: {code!r}")
        if code[j] == "(":
            parent.append(stack[-1] if stack else -1)
            labels.append(code[i:j])
            stack.append(len(parent) - 1)
        else:
            if j != i or not stack:
                raise ValueError(f"malformed tree code: {code!r}")
            stack.pop()
        i = j + 1
    if stack or not parent or parent.count(-1) != 1:
        raise ValueError(f"malformed tree code: {code!r}")
    return parent, labels


@dataclass(frozen=True, order=True)
class RootedTree:
    """A rooted (optionally labelled) tree stored by its canonical code."""

    code: str

    def __post_init__(self):
        parent, labels = parse_code(self.code)
        children: list[list[int]] = [[] for _ in parent]
        for v, p in enumerate(parent):
            if p >= 0:
                children[p].append(v)
        object.__setattr__(self, "code", tree_code(children, 0, labels if any(labels) else None))

    @classmethod
    def from_parents(cls, parent: Sequence[int], labels=None) -> "RootedTree":
        n = len(parent)
        children: list[list[int]] = [[] for _ in range(n)]
        root = None
        for v, p in enumerate(parent):
            if p < 0:
                root = v
            else:
                children[p].append(v)
        if root is None:
            raise ValueError("no root in parent array")
        return cls(tree_code(children, root, labels))

    @classmethod
    def single(cls) -> "RootedTree":
        return cls("()")

    @classmethod
    def from_children(cls, branches: Sequence["RootedTree"], label: str = "") -> "RootedTree":
        return cls(label + "(" + "".join(sorted(b.code for b in branches)) + ")")

    def parents(self):
        return parse_code(self.code)

    @property
    def size(self) -> int:
        return self.code.count("(")

    @property
    def edges(self) -> int:
        return self.size - 1

    @property
    def height(self) -> int:
        depth = best = 0
        for ch in self.code:
            if ch == "(":
                best = max(best, depth)
                depth += 1
            elif ch == ")":
                depth -= 1
        return best

    @property
    def root_degree(self) -> int:
        return len(self.branches())

    def branches(self) -> list["RootedTree"]:
        """Subtrees hanging from the root's children, in code order."""
        start = self.code.index("(")
        out, depth, begin = [], 0, start + 1
        for i in range(start + 1, len(self.code) - 1):
            ch = self.code[i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    out.append(RootedTree(self.code[begin:i + 1]))
                    begin = i + 1
        return out

    def restrict(self, s: int) -> "RootedTree":
        """Subtree induced by the vertices within distance ``s`` of the root."""
        if s < 0:
            raise ValueError("restriction height must be nonnegative")
        if s >= self.height:
            return self
        parent, labels = parse_code(self.code)
        depth = [0] * len(parent)
        keep = []
        for v, p in enumerate(parent):
            if p >= 0:
                depth[v] = depth[p] + 1
            if depth[v] <= s:
                keep.append(v)
        index = {v: i for i, v in enumerate(keep)}
        sub_parent = [index[parent[v]] if parent[v] >= 0 else -1 for v in keep]
        if any(labels):
            return RootedTree.from_parents(sub_parent, [labels[v] for v in keep])
        return RootedTree.from_parents(sub_parent)

    def __str__(self) -> str:
        return self.code


# ---------------------------------------------------------------------------
# general small rooted graphs


def _refine(adj, colour):
    """Colour refinement to the coarsest equitable partition; colours are dense ranks."""
    n = len(adj)
    ncol = len(set(colour))
    while True:
        sig = [(colour[v], tuple(sorted(colour[u] for u in adj[v]))) for v in range(n)]
        rank = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [rank[s] for s in sig]
        if len(rank) == ncol:
            return new
        colour, ncol = new, len(rank)


def _certificate(adj, colour, base):
    n = len(adj)
    pos = colour  # discrete: colour[v] is the position of v
    edges = sorted((min(pos[u], pos[v]), max(pos[u], pos[v])) for u in range(n) for v in adj[u] if u < v)
    labs = [None] * n
    for v in range(n):
        labs[pos[v]] = base[v]
    return (tuple(labs), tuple(edges))


def canonical_certificate(adj: Sequence[Sequence[int]], initial: Sequence) -> tuple:
    """Isomorphism certificate of a small vertex-coloured graph.

    ``initial`` gives each vertex a comparable colour (e.g. a tuple); the
    certificate is equal for two inputs iff there is a colour-preserving
    isomorphism.  Uses colour refinement plus individualisation with
    automorphism pruning; fine for graphs of a few dozen vertices.
    """
    n = len(adj)
    base = list(initial)
    rank = {c: i for i, c in enumerate(sorted(set(base)))}
    colour = _refine(adj, [rank[c] for c in base])
    best: list = [None, None]  # certificate, colouring
    autos: list[list[int]] = []

    def search(colour, prefix):
        cells: dict = {}
        for v, c in enumerate(colour):
            cells.setdefault(c, []).append(v)
        if len(cells) == n:
            cert = _certificate(adj, colour, base)
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, colour
            elif cert == best[0]:
                inv = [0] * n
                for v, c in enumerate(best[1]):
                    inv[c] = v
                autos.append([inv[colour[v]] for v in range(n)])
            return
        cell = min((c for c in cells if len(cells[c]) > 1), key=lambda c: (len(cells[c]), c))
        done: list[int] = []
        for v in cells[cell]:
            if done and _same_orbit(v, done, prefix, autos, n):
                continue
            ind = [2 * c + (0 if u == v else 1) for u, c in enumerate(colour)]
            r = {c: i for i, c in enumerate(sorted(set(ind)))}
            search(_refine(adj, [r[c] for c in ind]), prefix + [v])
            done.append(v)

    search(colour, [])
    return best[0]


def _same_orbit(v, done, prefix, autos, n):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for g in autos:
        if all(g[x] == x for x in prefix):
            for a in range(n):
                ra, rb = find(a), find(g[a])
                if ra != rb:
                    parent[ra] = rb
    rv = find(v)
    return any(find(w) == rv for w in done)


def bfs_ball(adj, root: int, radius: int):
    """Vertices within ``radius`` of ``root`` in BFS order, with their distances."""
    dist = {root: 0}
    order = [root]
    q = deque([root])
    while q:
        v = q.popleft()
        d = dist[v]
        if d == radius:
            continue
        for u in adj[v]:
            if u not in dist:
                dist[u] = d + 1
                order.append(u)
                q.append(u)
    return order, dist


def ball_key(adj, root: int, radius: int, colours=None, marked: int | None = None) -> str:
    """Canonical key of the induced radius-``radius`` ball around ``root``.

    ``colours`` optionally colours the vertices; ``marked`` optionally marks a
    second vertex (used for doubly rooted balls).
    """
    order, dist = bfs_ball(adj, root, radius)
    if marked is not None and marked not in dist:
        raise ValueError("marked vertex lies outside the ball")
    return key_of_vertex_set(adj, root, order, dist, colours, marked)


def _label(v, colours, marked):
    lab = "" if colours is None else str(colours[v])
    if v == marked:
        lab += "*"
    return lab


def key_of_vertex_set(adj, root, order, dist, colours=None, marked=None) -> str:
    index = {v: i for i, v in enumerate(order)}
    m = len(order)
    local = [[index[u] for u in adj[v] if u in index] for v in order]
    n_edges = sum(len(a) for a in local) // 2
    labelled = colours is not None or marked is not None
    if n_edges == m - 1:
        children: list[list[int]] = [[] for _ in range(m)]
        for i, v in enumerate(order[1:], start=1):
            for j in local[i]:
                if dist[order[j]] == dist[v] - 1:
                    children[j].append(i)
                    break
        labels = [_label(v, colours, marked) for v in order] if labelled else None
        return tree_code(children, 0, labels)
    initial = [(0 if i == 0 else 1, dist[v], _label(v, colours, marked)) for i, v in enumerate(order)]
    labs, edges = canonical_certificate(local, initial)
    body = ";".join(f"{d}:{lab}" for _, d, lab in labs)
    return "G[" + body + "|" + ",".join(f"{a}-{b}" for a, b in edges) + "]"


@dataclass
class RootedGraph:
    """A small rooted graph given by adjacency lists, vertex 0 being the root."""

    adj: list
    labels: list | None = None
    annotations: dict | None = None

    @property
    def n(self) -> int:
        return len(self.adj)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def key(self, radius: int | None = None, root: int = 0, marked: int | None = None) -> str:
        r = radius if radius is not None else self.n
        return ball_key(self.adj, root, r, self.labels, marked)

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2
