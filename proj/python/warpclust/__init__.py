"""Clustering of misaligned curves with penalized warping similarity."""

from ._core import (
    WarpclustError,
    adjusted_rand,
    align,
    cluster,
    dunn,
    silhouette,
    similarity_matrix,
    simulate,
    threshold_set,
)

__all__ = [
    "WarpclustError",
    "adjusted_rand",
    "align",
    "cluster",
    "dunn",
    "silhouette",
    "similarity_matrix",
    "simulate",
    "threshold_set",
]
