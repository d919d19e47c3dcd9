"""Claim detection, epsilon-graph clustering and factcheck propagation."""

from ._core import (
    ClaimGraph,
    ClaimgraphError,
    Classifier,
    TfidfModel,
    cli_run,
    cluster_quality,
    dbscan,
    distance,
    distance_histogram,
    evaluate_prf,
    fit_tfidf,
    grid_search_epsilon,
    louvain,
    modularity,
    split_sentences,
    threshold_sweep,
    train_classifier,
)

__all__ = [
    "ClaimGraph",
    "ClaimgraphError",
    "Classifier",
    "TfidfModel",
    "cli_run",
    "cluster_quality",
    "dbscan",
    "distance",
    "distance_histogram",
    "evaluate_prf",
    "fit_tfidf",
    "grid_search_epsilon",
    "louvain",
    "modularity",
    "split_sentences",
    "threshold_sweep",
    "train_classifier",
]
