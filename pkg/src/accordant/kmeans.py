"""Lloyd iteration shared by the baseline and the accordant engine."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import (
    AccordanceParams,
    Clustering,
    GroupedDataset,
    InitError,
    accordance_report,
)

@dataclass(frozen=True)
class InitChoice:
    center_indices: np.ndarray


def restart_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent PCG64 streams spawned from one seed, one per restart."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(count)]


def squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """N x k matrix of squared Euclidean distances, accumulated in float64."""
    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    out = np.empty((points.shape[0], centers.shape[0]))
    for j, c in enumerate(centers):
        diff = points - c
        out[:, j] = np.einsum("ij,ij->i", diff, diff)
    return out


def init_centers(dataset: GroupedDataset, k: int, mode: str, rng: np.random.Generator) -> InitChoice:
    """Pick k distinct points as starting centers.

    ``uniform`` draws k points without replacement. ``distinct-groups`` draws
    k distinct groups, then one member of each.
    """
    if k > dataset.n:
        raise InitError(f"cannot choose k={k} distinct centers from N={dataset.n} points")
    if mode == "uniform":
        idx = rng.choice(dataset.n, size=k, replace=False)
    elif mode == "distinct-groups":
        if k > dataset.m:
            raise InitError(f"distinct-groups init needs k <= m, got k={k}, m={dataset.m}")
        groups = rng.choice(dataset.m, size=k, replace=False)
        idx = np.array([dataset.group_index[g][rng.integers(len(dataset.group_index[g]))] for g in groups])
    else:
        raise InitError(f"unknown init mode {mode!r}")
    return InitChoice(np.asarray(idx, dtype=np.int64))


def assign_nearest(dataset: GroupedDataset, centers: np.ndarray) -> np.ndarray:
    # argmin returns the first minimum, so ties go to the lowest center index
    return squared_distances(dataset.points, centers).argmin(axis=1)


def cluster_means(points: np.ndarray, assignment: np.ndarray, k: int, fallback: np.ndarray | None = None):
    counts = np.bincount(assignment, minlength=k)
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, assignment, points)
    means = np.zeros_like(sums) if fallback is None else np.array(fallback, dtype=np.float64)
    nonempty = counts > 0
    means[nonempty] = sums[nonempty] / counts[nonempty, None]
    return means, counts


def recompute_centers(
    dataset: GroupedDataset,
    assignment: np.ndarray,
    k: int,
    previous_centers: np.ndarray,
    can_move: Optional[Callable[[np.ndarray], bool]] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean of each cluster, repairing empty clusters first.

    An empty cluster takes the point farthest from its own cluster mean
    (lowest index on ties), provided the donor cluster keeps at least one
    member and ``can_move`` accepts the resulting assignment. If no point
    qualifies the cluster stays empty and keeps its previous center.

    Returns ``(centers, assignment)``; the assignment is a copy when a
    repair moved points.
    """
    X = dataset.points
    assignment = np.asarray(assignment, dtype=np.int64)
    means, counts = cluster_means(X, assignment, k, previous_centers)
    stuck = set()
    while True:
        empty = [j for j in np.flatnonzero(counts == 0) if j not in stuck]
        if not empty:
            break
        target = empty[0]
        far = np.einsum("ij,ij->i", X - means[assignment], X - means[assignment])
        order = np.lexsort((np.arange(len(far)), -far))
        moved = False
        for i in order:
            if counts[assignment[i]] < 2:
                continue
            trial = assignment.copy()
            trial[i] = target
            if can_move is not None and not can_move(trial):
                continue
            assignment = trial
            moved = True
            break
        if not moved:
            stuck.add(target)
        means, counts = cluster_means(X, assignment, k, previous_centers)
    return means, assignment


def objective(points: np.ndarray, assignment: np.ndarray, centers: np.ndarray) -> float:
    diff = points - centers[assignment]
    return float(np.einsum("ij,ij->", diff, diff))


def lloyd(
    dataset: GroupedDataset,
    centers: np.ndarray,
    tau: int,
    delta: float,
    assign_step: Callable[[np.ndarray], np.ndarray],
    can_move: Optional[Callable[[np.ndarray], bool]] = None,
    on_iteration: Optional[Callable[[int, float], None]] = None,
):
    """Alternate ``assign_step`` and mean updates until the objective stalls.

    ``assign_step`` maps the N x k squared-distance matrix to an assignment.
    Stops when the decrease is at most ``delta`` or after ``tau`` iterations.
    An increase is treated as convergence and the previous state is kept.
    ``on_iteration(i, sse)`` is called after every accepted iteration.
    """
    X = dataset.points
    k = centers.shape[0]
    assignment = None
    trace: list[float] = []
    for _ in range(tau):
        D = squared_distances(X, centers)
        proposal = assign_step(D)
        new_centers, proposal = recompute_centers(dataset, proposal, k, centers, can_move)
        phi = objective(X, proposal, new_centers)
        if trace and phi > trace[-1]:
            break
        assignment, centers = proposal, new_centers
        trace.append(phi)
        if on_iteration is not None:
            on_iteration(len(trace), phi)
        if len(trace) > 1 and trace[-2] - trace[-1] <= delta:
            break
    return assignment, centers, trace


def kmeans_fit(dataset: GroupedDataset, params: AccordanceParams, rng: np.random.Generator | None = None,
               on_iteration=None) -> Clustering:
    """Unconstrained k-means from a random initialisation.

    The accordance report is filled in with ``params.t`` but not enforced.
    """
    if rng is None:
        rng = restart_rngs(params.seed, 1)[0]
    init = init_centers(dataset, params.k, params.init_mode, rng)
    start = dataset.points[init.center_indices].copy()
    assignment, centers, trace = lloyd(dataset, start, params.tau, params.delta, lambda D: D.argmin(axis=1),
                                     on_iteration=on_iteration)
    return Clustering(
        assignment=assignment,
        centers=centers,
        sse=trace[-1],
        iterations=len(trace),
        sse_trace=trace,
        accordance=accordance_report(assignment, dataset, params.t, params.k),
    )
