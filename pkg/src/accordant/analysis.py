"""Clustering quality and structure measures.

SSE and cores use squared Euclidean distance, like the engines. Silhouette
and Davies-Bouldin use plain Euclidean distance, as is conventional.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .kmeans import cluster_means, objective, squared_distances
from .model import AccordantError, GroupedDataset


class MetricUndefinedError(AccordantError):
    """The metric has no value for this clustering (too few clusters, coincident centroids)."""


class InputError(AccordantError, ValueError):
    pass


@dataclass(frozen=True)
class MatchResult:
    distance: float
    matching: np.ndarray  # matching[i] is the cluster of the second clustering paired with cluster i


@dataclass(frozen=True)
class CoreReport:
    cores: list
    fractions: np.ndarray


def _points(data) -> np.ndarray:
    return data.points if isinstance(data, GroupedDataset) else np.asarray(data, dtype=np.float64)


def sse(data, assignment, centers=None) -> float:
    X = _points(data)
    assignment = np.asarray(assignment, dtype=np.int64)
    if centers is None:
        centers, _ = cluster_means(X, assignment, int(assignment.max()) + 1)
    return objective(X, assignment, np.asarray(centers, dtype=np.float64))


def clustering_distance(a, b, k: int | None = None) -> MatchResult:
    """Fraction of points the two clusterings disagree on under the best cluster matching.

    Both label arrays must cover the same points and use the same k. The
    matching is an exact minimum-cost assignment over the k x k matrix of
    ``|A_i - B_j|`` counts.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise InputError(f"clusterings must label the same n points, got {a.shape} and {b.shape}")
    ka, kb = int(a.max()) + 1, int(b.max()) + 1
    if k is None:
        if ka != kb:
            raise InputError(f"clusterings have different k ({ka} vs {kb})")
        k = ka
    elif max(ka, kb) > k:
        raise InputError(f"labels exceed k={k}")
    overlap = np.bincount(a * k + b, minlength=k * k).reshape(k, k)
    disagree = np.bincount(a, minlength=k)[:, None] - overlap
    rows, cols = linear_sum_assignment(disagree)
    matching = np.empty(k, dtype=np.int64)
    matching[rows] = cols
    return MatchResult(float(disagree[rows, cols].sum()) / a.size, matching)


def cluster_cores(data, assignment) -> CoreReport:
    """Core of each cluster: members z with d(x, z) < d(x, y) for every
    member x and every outside point y."""
    X = _points(data)
    assignment = np.asarray(assignment, dtype=np.int64)
    k = int(assignment.max()) + 1
    cores = []
    for j in range(k):
        inside = np.flatnonzero(assignment == j)
        outside = np.flatnonzero(assignment != j)
        if inside.size == 0:
            cores.append(inside)
            continue
        if outside.size:
            nearest_out = squared_distances(X[inside], X[outside]).min(axis=1)
        else:
            nearest_out = np.full(inside.size, np.inf)
        d_in = squared_distances(X[inside], X[inside])
        ok = np.all(d_in < nearest_out[:, None], axis=0)
        cores.append(inside[ok])
    fractions = np.array([c.size for c in cores], dtype=np.float64) / X.shape[0]
    return CoreReport(cores, fractions)


def _labels_and_k(assignment):
    assignment = np.asarray(assignment, dtype=np.int64)
    _, labels = np.unique(assignment, return_inverse=True)
    return labels, int(labels.max()) + 1


def silhouette(data, assignment, block: int = 2048) -> float:
    X = _points(data)
    labels, k = _labels_and_k(assignment)
    if k < 2:
        raise MetricUndefinedError("silhouette needs at least 2 non-empty clusters")
    n = X.shape[0]
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    scores = np.empty(n)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        dist = np.sqrt(np.maximum(squared_distances(X[lo:hi], X), 0.0))
        totals = dist @ onehot
        own = labels[lo:hi]
        rows = np.arange(hi - lo)
        own_size = sizes[own]
        with np.errstate(divide="ignore", invalid="ignore"):
            a = totals[rows, own] / (own_size - 1)
            means = totals / sizes
        means[rows, own] = np.inf
        b = means.min(axis=1)
        denom = np.maximum(a, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(denom > 0, (b - a) / denom, 0.0)
        s[own_size == 1] = 0.0
        scores[lo:hi] = s
    return float(scores.mean())


def davies_bouldin(data, assignment) -> float:
    X = _points(data)
    labels, k = _labels_and_k(assignment)
    if k < 2:
        raise MetricUndefinedError("Davies-Bouldin needs at least 2 non-empty clusters")
    centroids, _ = cluster_means(X, labels, k)
    scatter = np.bincount(labels, weights=np.linalg.norm(X - centroids[labels], axis=1), minlength=k)
    scatter /= np.bincount(labels, minlength=k)
    sep = np.sqrt(np.maximum(squared_distances(centroids, centroids), 0.0))
    np.fill_diagonal(sep, np.inf)
    if np.any(sep == 0):
        raise MetricUndefinedError("Davies-Bouldin is undefined for coincident centroids")
    ratio = (scatter[:, None] + scatter[None, :]) / sep
    return float(ratio.max(axis=1).mean())
