"""Accordant k-means: k-means constrained so that at least r groups keep a
t fraction of their members together in one cluster."""

from .analysis import (
    CoreReport,
    MatchResult,
    MetricUndefinedError,
    cluster_cores,
    clustering_distance,
    davies_bouldin,
    silhouette,
    sse,
)
from .engine import (
    akmeans_fit,
    akmeans_restarts,
    compute_penalties,
    construct_feasible,
    feasible_k_range,
    select_pairings,
)
from .io import IngestConfig, IngestionError, SynthSpec, generate, load_csv, read_result, write_result
from .kmeans import assign_nearest, init_centers, kmeans_fit, recompute_centers
from .model import (
    AccordanceParams,
    AccordantError,
    Clustering,
    GroupedDataset,
    InfeasibleError,
    InitError,
    PairingPlan,
    PenaltyMatrix,
    accordance_report,
    is_rt_accordant,
)
from .oracle import BudgetExceeded, optimal_accordant, optimal_unconstrained

__version__ = "0.1.0"
