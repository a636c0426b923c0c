"""Empirical laws of radius-t neighbourhoods of a uniform random vertex."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from ..graph import Graph
from ..rooted import ball_key


@dataclass
class NeighbourhoodLaw:
    """Law of the (optionally coloured) rooted ball of radius ``t``, keyed canonically.

    Probabilities are exact fractions ``count / n``.
    """

    t: int
    probs: dict
    colours: int | None = None

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def get(self, key) -> Fraction:
        return self.probs.get(key, Fraction(0))

    def tv(self, other: "NeighbourhoodLaw") -> float:
        return law_tv(self.probs, other.probs)

    def frozen(self) -> frozenset:
        return frozenset(self.probs.items())

    def to_dict(self) -> dict:
        return {"t": self.t, "entries": [{"graph": k, "p": str(v)} for k, v in sorted(self.probs.items())]}

    def to_tree_law(self):
        """View as a :class:`TreeLaw` so it can be compared with branching-process laws."""
        from ..branching import TreeLaw
        return TreeLaw(self.t, {k: float(v) for k, v in self.probs.items()}, 0.0, None)


def law_tv(a: dict, b: dict) -> float:
    """Total variation ``(1/2) sum |a - b|`` between two finitely supported laws."""
    keys = set(a) | set(b)
    return 0.5 * float(sum(abs(a.get(x, 0) - b.get(x, 0)) for x in keys))


def vertex_keys(G: Graph, t: int, colouring=None, vertices=None) -> list:
    adj = G.adj
    vs = range(G.n) if vertices is None else vertices
    return [ball_key(adj, v, t, colouring) for v in vs]


def neighbourhood_law(G: Graph, t: int, colouring=None) -> NeighbourhoodLaw:
    """Exact frequency of every rooted radius-``t`` ball over all ``n`` vertices."""
    if t < 0:
        raise ValueError("radius must be nonnegative")
    if G.n == 0:
        return NeighbourhoodLaw(t, {}, None)
    if colouring is not None:
        colouring = [int(c) for c in colouring]
        if len(colouring) != G.n:
            raise ValueError("colouring must assign a colour to every vertex")
    counts = Counter(vertex_keys(G, t, colouring))
    n = G.n
    ncol = None if colouring is None else max(colouring) + 1
    return NeighbourhoodLaw(t, {k: Fraction(c, n) for k, c in counts.items()}, ncol)
