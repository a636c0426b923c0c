"""One fixed combinator for metrics built from countably many coordinate distances."""
from __future__ import annotations

from typing import Iterable, Sequence

from ..errors import DomainError


def combine_product_metric(coords: Iterable[float], weights: Sequence[float] | None = None) -> float:
    """``sum_i w_i min(d_i, 1)`` with default weights ``w_i = 2^-i`` (i counted from 1).

    Any summable positive weights give the product topology; this choice is
    used uniformly for the subgraph-count, local, partition and coloured metrics.
    """
    total = 0.0
    for i, d in enumerate(coords, start=1):
        d = float(d)
        if d < 0:
            raise DomainError("coordinate distances must be nonnegative")
        w = 2.0 ** (-i) if weights is None else float(weights[i - 1])
        total += w * min(d, 1.0)
    return total


def count_distance(G1, G2, max_edges: int = 6, p=None) -> float:
    """Product metric over tree counts ``|s~(T, G1) - s~(T, G2)|`` for trees up to ``max_edges`` edges."""
    from .counts import all_trees, subgraph_counts
    coords = []
    for T in all_trees(max_edges):
        a = subgraph_counts(T, G1, "emb", p).normalised
        b = subgraph_counts(T, G2, "emb", p).normalised
        coords.append(abs(a - b))
    return combine_product_metric(coords)


def local_distance(G1, G2, tmax: int = 3) -> float:
    """Product metric over radii ``t = 1..tmax`` of the total variation between neighbourhood laws."""
    from .local import law_tv, neighbourhood_law
    coords = [law_tv(neighbourhood_law(G1, t).probs, neighbourhood_law(G2, t).probs) for t in range(1, tmax + 1)]
    return combine_product_metric(coords)
