"""Homomorphism and embedding counts with the sparse normalisations."""
from __future__ import annotations

from dataclasses import dataclass

from .._numbers import parse_number
from ..errors import DomainError
from ..graph import Graph, emb_count, hom_count


@dataclass(frozen=True)
class SubgraphCount:
    """``raw`` count, its density normalisation, and ``tilde = raw / n``."""

    kind: str
    raw: int
    normalised: float
    tilde: float


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def subgraph_counts(F: Graph, G: Graph, kind: str = "emb", p=None) -> SubgraphCount:
    """Counts of a connected pattern ``F`` in ``G``.

    ``emb``: injective homomorphisms; normalised as ``emb / n`` when ``F`` is
    a tree and ``emb / (n_(|F|) p^e(F))`` otherwise.  ``hom``: all
    homomorphisms, normalised as ``hom / (n^|F| p^e(F))``.
    """
    if F.n == 0 or not F.is_connected():
        raise DomainError("pattern graph must be connected and nonempty")
    n = G.n
    if n == 0:
        raise DomainError("host graph is empty")
    pp = 1.0 / n if p is None else float(parse_number(p)) if isinstance(p, str) else float(p)
    if kind == "emb":
        raw = emb_count(F, G)
        if F.is_tree():
            norm = raw / n
        else:
            den = _falling(n, F.n) * pp ** F.m
            norm = raw / den if den else 0.0
    elif kind == "hom":
        raw = hom_count(F, G)
        norm = raw / (float(n) ** F.n * pp ** F.m)
    else:
        raise DomainError(f"unknown count kind {kind!r}")
    return SubgraphCount(kind, raw, float(norm), raw / n)


def all_trees(max_edges: int) -> list[Graph]:
    """One representative of each unlabelled tree with 1..max_edges edges."""
    from ..branching import enumerate_trees
    from ..rooted import RootedTree, parse_code
    seen, out = set(), []
    for code in enumerate_trees(max_edges, max_edges + 1):
        parent, _ = parse_code(code)
        if len(parent) < 2:
            continue
        G = Graph(len(parent), [(v, q) for v, q in enumerate(parent) if q >= 0])
        key = _unrooted_key(G)
        if key not in seen:
            seen.add(key)
            out.append(G)
    out.sort(key=lambda g: (g.n, _unrooted_key(g)))
    return out


def _unrooted_key(T: Graph) -> str:
    """Canonical code of a tree rooted at its centre (the smaller code if bicentral)."""
    from ..rooted import ball_key
    adj = T.adj
    leaves = [v for v in range(T.n) if len(adj[v]) <= 1]
    deg = [len(a) for a in adj]
    remaining = T.n
    layer = leaves
    removed = set()
    while remaining > 2:
        nxt = []
        for v in layer:
            removed.add(v)
            remaining -= 1
            for u in adj[v]:
                if u not in removed:
                    deg[u] -= 1
                    if deg[u] == 1:
                        nxt.append(u)
        layer = nxt
    centres = [v for v in range(T.n) if v not in removed]
    return min(ball_key(adj, c, T.n) for c in centres)
