"""Sparse graph metrics: cut and edit distances, counts, local laws, partition and coloured spectra."""
from .common import Estimate
from .coloured import ColouredSpectrum, coloured_distance, coloured_spectrum, hausdorff_tv
from .counts import SubgraphCount, all_trees, subgraph_counts
from .cut import cut_distance_graphs, cut_norm, edit_distance
from .local import NeighbourhoodLaw, law_tv, neighbourhood_law
from .partition import (
    PartitionSpectrum,
    count_balanced_partitions,
    density_bound,
    density_matrix,
    kernel_split_matrix,
    pair_density,
    partition_distance,
    partition_spectrum,
    sample_kernel_splits,
    set_distance,
)
from .product import combine_product_metric, count_distance, local_distance

__all__ = [
    "Estimate", "ColouredSpectrum", "coloured_distance", "coloured_spectrum", "hausdorff_tv",
    "SubgraphCount", "all_trees", "subgraph_counts", "cut_distance_graphs", "cut_norm",
    "edit_distance", "NeighbourhoodLaw", "law_tv", "neighbourhood_law", "PartitionSpectrum",
    "count_balanced_partitions", "density_bound", "density_matrix", "kernel_split_matrix",
    "pair_density", "partition_distance", "partition_spectrum", "sample_kernel_splits",
    "set_distance", "combine_product_metric", "count_distance", "local_distance",
]
