"""Simple undirected graphs, edge-list I/O, and homomorphism/embedding counts."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DomainError


class Graph:
    """Simple graph on vertices ``0..n-1``.

    Loops are rejected and repeated edges collapse.  ``types`` is an optional
    per-vertex annotation (vertex types of planted or kernel models).
    """

    def __init__(self, n: int, edges: Iterable = (), types=None):
        if n < 0:
            raise DomainError("vertex count must be nonnegative")
        self.n = int(n)
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size:
            if arr.min() < 0 or arr.max() >= n:
                raise DomainError("edge endpoint out of range")
            if np.any(arr[:, 0] == arr[:, 1]):
                raise DomainError("loops are not allowed in a simple graph")
            arr = np.sort(arr, axis=1)
            arr = np.unique(arr, axis=0)
        self.edges = arr
        self.types = None if types is None else np.asarray(types)
        if self.types is not None and len(self.types) != n:
            raise DomainError("types must have one entry per vertex")
        self._adj = None

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def adj(self) -> list[list[int]]:
        if self._adj is None:
            adj: list[list[int]] = [[] for _ in range(self.n)]
            for u, v in self.edges.tolist():
                adj[u].append(v)
                adj[v].append(u)
            self._adj = adj
        return self._adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.m:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        if self.m:
            a[self.edges[:, 0], self.edges[:, 1]] = 1
            a[self.edges[:, 1], self.edges[:, 0]] = 1
        return a

    def edge_set(self) -> set:
        return set(map(tuple, self.edges.tolist()))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """The graph with vertex ``v`` renamed ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        types = None
        if self.types is not None:
            types = np.empty_like(self.types)
            types[perm] = self.types
        return Graph(self.n, perm[self.edges] if self.m else [], types)

    def disjoint_union(self, other: "Graph") -> "Graph":
        e2 = other.edges + self.n if other.m else np.zeros((0, 2), dtype=np.int64)
        return Graph(self.n + other.n, np.vstack([self.edges, e2]))

    def components(self) -> np.ndarray:
        """Component label of every vertex."""
        if self.n == 0:
            return np.zeros(0, dtype=np.int64)
        e = self.edges
        mat = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(self.n, self.n))
        _, labels = connected_components(mat, directed=False)
        return labels

    def largest_component_fraction(self) -> float:
        if self.n == 0:
            return 0.0
        return float(np.bincount(self.components()).max() / self.n)

    def is_connected(self) -> bool:
        return self.n > 0 and len(np.unique(self.components())) == 1

    def is_tree(self) -> bool:
        return self.is_connected() and self.m == self.n - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and np.array_equal(self.edges, other.edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


# ---------------------------------------------------------------------------
# edge-list text format


def write_edgelist(G: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{G.n}\n")
        if G.types is not None:
            fh.write("#types: " + " ".join(str(t) for t in G.types.tolist()) + "\n")
        for u, v in G.edges.tolist():
            fh.write(f"{u} {v}\n")


def parse_edgelist(text: str) -> Graph:
    n = None
    types = None
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("#types:"):
                types = [int(t) for t in line[len("#types:"):].split()]
            continue
        if n is None:
            n = int(line)
            continue
        u, v = line.split()[:2]
        edges.append((int(u), int(v)))
    if n is None:
        raise DomainError("edge list is missing the vertex count line")
    return Graph(n, edges, types)


def read_edgelist(path) -> Graph:
    with open(path) as fh:
        return parse_edgelist(fh.read())


# ---------------------------------------------------------------------------
# homomorphisms and embeddings


def _search_order(F: Graph) -> list[int]:
    adj = F.adj
    order: list[int] = []
    seen = set()
    for s in sorted(range(F.n), key=lambda v: -len(adj[v])):
        if s in seen:
            continue
        seen.add(s)
        queue = [s]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u in sorted(adj[v], key=lambda u: -len(adj[u])):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
    return order


def count_maps(F: Graph, G: Graph, injective: bool) -> int:
    """Number of adjacency-preserving maps ``V(F) -> V(G)`` (injective if asked).

    Backtracking over a BFS order of ``F``; the last vertex is counted rather
    than enumerated.
    """
    if F.n == 0:
        return 1
    if G.n == 0:
        return 0
    order = _search_order(F)
    pos = {v: i for i, v in enumerate(order)}
    back = [[pos[u] for u in F.adj[v] if pos[u] < i] for i, v in enumerate(order)]
    gadj = G.adj
    gsets = [set(a) for a in gadj]
    k = len(order)
    img = [0] * k
    used: set = set()

    def candidates(i):
        b = back[i]
        if not b:
            return range(G.n)
        first = min(b, key=lambda j: len(gadj[img[j]]))
        return [w for w in gadj[img[first]] if all(w in gsets[img[j]] for j in b if j != first)]

    def rec(i):
        cands = candidates(i)
        if i == k - 1:
            if injective:
                return sum(1 for w in cands if w not in used)
            return len(cands)
        total = 0
        for w in cands:
            if injective and w in used:
                continue
            img[i] = w
            used.add(w)
            total += rec(i + 1)
            used.discard(w)
        return total

    return rec(0)


def hom_count(F: Graph, G: Graph) -> int:
    return count_maps(F, G, injective=False)


def emb_count(F: Graph, G: Graph) -> int:
    return count_maps(F, G, injective=True)


def automorphism_count(F: Graph) -> int:
    return emb_count(F, F)
