"""Cubical persistence, persistence images, CLBP and RUSBoost for depth-map texture classification."""

from ._core import (
    PD_AGG_NAMES,
    InvalidArgument,
    RusBoost,
    betti_numbers,
    clbp,
    dsc,
    fisher_scores,
    generate_synthetic,
    oracle_persistence,
    patch_features,
    pd_agg,
    persistence,
    persistence_image,
    wilcoxon,
)

__all__ = [
    "PD_AGG_NAMES",
    "InvalidArgument",
    "RusBoost",
    "betti_numbers",
    "clbp",
    "dsc",
    "fisher_scores",
    "generate_synthetic",
    "oracle_persistence",
    "patch_features",
    "pd_agg",
    "persistence",
    "persistence_image",
    "wilcoxon",
]
