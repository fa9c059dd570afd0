"""Accordant k-means.

Each iteration computes the penalty of moving every point off its nearest
center, picks the r cheapest (group, center) pairings, pins the cheapest
``ceil(t * n_g)`` members of each chosen group to its center, sends all other
points to their nearest center and recomputes the means.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .kmeans import (
    init_centers,
    kmeans_fit,
    lloyd,
    objective,
    recompute_centers,
    restart_rngs,
    squared_distances,
)
from .model import (
    AccordanceParams,
    Clustering,
    GroupedDataset,
    InfeasibleError,
    Pairing,
    PairingPlan,
    PenaltyMatrix,
    accordance_report,
    forced_count,
    is_rt_accordant,
)


def _smallest_groups(dataset: GroupedDataset, r: int) -> np.ndarray:
    sizes = dataset.group_sizes
    return np.lexsort((np.arange(dataset.m), sizes))[:r]


def feasible_k_range(dataset: GroupedDataset, r: int, t: float) -> int:
    """Largest k for which an (r, t)-accordant k-clustering exists.

    ``N - sum(ceil(t * n_i)) + r`` over the r smallest groups, capped at N.
    Every k from 1 up to the returned value is feasible.
    """
    sizes = dataset.group_sizes[_smallest_groups(dataset, r)]
    bound = dataset.n - sum(forced_count(t, int(s)) for s in sizes) + r
    return min(bound, dataset.n)


def construct_feasible(dataset: GroupedDataset, k: int, r: int, t: float) -> Clustering:
    """Build an accordant k-clustering directly, without optimising anything.

    The r smallest groups each contribute their first ``ceil(t * n_g)``
    members as a block. With r >= k the first k - 1 blocks get their own
    cluster and everything else goes to the last one; with r < k the r blocks
    take clusters 0..r-1 and the remaining points are split, in index order,
    over the other k - r clusters.
    """
    max_k = feasible_k_range(dataset, r, t)
    if not 1 <= k <= max_k:
        raise InfeasibleError(k, max_k)
    chosen = _smallest_groups(dataset, r)
    blocks = [dataset.group_index[g][: forced_count(t, len(dataset.group_index[g]))] for g in chosen]
    forced = np.zeros(dataset.n, dtype=bool)
    assignment = np.full(dataset.n, -1, dtype=np.int64)
    for b, block in enumerate(blocks):
        assignment[block] = min(b, k - 1)
        forced[block] = True
    free = np.flatnonzero(~forced)
    if r >= k:
        assignment[free] = k - 1
    else:
        for j, part in enumerate(np.array_split(free, k - r)):
            assignment[part] = r + j
    # blocks are empty when t * n_g rounds up to 0; borrow free points then
    counts = np.bincount(assignment, minlength=k)
    for j in np.flatnonzero(counts == 0):
        donor = next(i for i in free if counts[assignment[i]] > 1)
        counts[assignment[donor]] -= 1
        assignment[donor] = j
        counts[j] += 1
    centers, _ = recompute_centers(dataset, assignment, k, np.zeros((k, dataset.rho)))
    return Clustering(
        assignment=assignment,
        centers=centers,
        sse=objective(dataset.points, assignment, centers),
        iterations=0,
        sse_trace=[],
        accordance=accordance_report(assignment, dataset, t, k),
    )


def compute_penalties(dataset: GroupedDataset, centers: np.ndarray) -> PenaltyMatrix:
    D = squared_distances(dataset.points, centers)
    return PenaltyMatrix(D, D - D.min(axis=1, keepdims=True))


def pairing_costs(penalties: PenaltyMatrix, dataset: GroupedDataset, t: float):
    """Cost of every (group, center) pairing and the points it would pin.

    Returns an m x k cost matrix and, per group, the k x need array of pinned
    point indices. Penalty ties go to the lower point index.
    """
    P = penalties.penalties
    k = P.shape[1]
    costs = np.zeros((dataset.m, k))
    picks = []
    for g, members in enumerate(dataset.group_index):
        need = forced_count(t, len(members))
        if need == 0:
            picks.append(np.empty((k, 0), dtype=np.int64))
            continue
        sub = P[members]
        order = np.argsort(sub, axis=0, kind="stable")[:need]
        costs[g] = np.take_along_axis(sub, order, axis=0).sum(axis=0)
        picks.append(members[order.T])
    return costs, picks


def select_pairings(penalties: PenaltyMatrix, dataset: GroupedDataset, r: int, t: float) -> PairingPlan:
    """Greedy choice of r pairings with distinct groups, cheapest first.

    Centers may be shared between pairings. Ties order by group, then center.
    """
    costs, picks = pairing_costs(penalties, dataset, t)
    m, k = costs.shape
    gg, cc = np.divmod(np.arange(m * k), k)
    order = np.lexsort((cc, gg, costs.ravel()))
    taken: set[int] = set()
    pairs = []
    for idx in order:
        g, j = int(gg[idx]), int(cc[idx])
        if g in taken:
            continue
        taken.add(g)
        pairs.append(Pairing(g, j, picks[g][j], float(costs[g, j])))
        if len(pairs) == r:
            break
    return PairingPlan(tuple(pairs))


def constrained_assignment(D: np.ndarray, plan: PairingPlan) -> np.ndarray:
    assignment = D.argmin(axis=1)
    for pair in plan.pairs:
        assignment[pair.forced] = pair.center
    return assignment


def akmeans_fit(dataset: GroupedDataset, params: AccordanceParams, rng: np.random.Generator | None = None,
                on_iteration=None) -> Clustering:
    """One accordant k-means run.

    With ``t == 0`` or ``r == 0`` the constraint is vacuous and the run is the
    plain k-means run for the same generator.
    """
    params.check_against(dataset)
    if rng is None:
        rng = restart_rngs(params.seed, 1)[0]
    if params.t == 0 or params.r == 0:
        return kmeans_fit(dataset, params, rng, on_iteration)
    max_k = feasible_k_range(dataset, params.r, params.t)
    if params.k > max_k:
        raise InfeasibleError(params.k, max_k)
    init = init_centers(dataset, params.k, params.init_mode, rng)
    start = dataset.points[init.center_indices].copy()

    def assign_step(D):
        P = PenaltyMatrix(D, D - D.min(axis=1, keepdims=True))
        return constrained_assignment(D, select_pairings(P, dataset, params.r, params.t))

    def keeps_accordance(trial):
        return is_rt_accordant(trial, dataset, params.r, params.t)

    assignment, centers, trace = lloyd(dataset, start, params.tau, params.delta, assign_step, keeps_accordance,
                                       on_iteration)
    return Clustering(
        assignment=assignment,
        centers=centers,
        sse=trace[-1],
        iterations=len(trace),
        sse_trace=trace,
        accordance=accordance_report(assignment, dataset, params.t, params.k),
    )


def best_of(runs: list[Clustering]) -> Clustering:
    """Lowest SSE; the earliest run wins ties."""
    best = min(range(len(runs)), key=lambda i: (runs[i].sse, i))
    result = runs[best]
    result.restart_sse = [c.sse for c in runs]
    result.best_restart = best
    return result


def akmeans_restarts(
    dataset: GroupedDataset,
    params: AccordanceParams,
    rng: np.random.Generator | None = None,
    *,
    algo: str = "akmeans",
    workers: int | None = None,
) -> Clustering:
    """Run ``params.restarts`` independent fits and keep the cheapest.

    Restart i draws from its own spawned stream, so the result does not
    depend on ``workers`` or on completion order.
    """
    params.check_against(dataset)
    rngs = rng.spawn(params.restarts) if rng is not None else restart_rngs(params.seed, params.restarts)
    fit = {"akmeans": akmeans_fit, "kmeans": kmeans_fit}[algo]
    if fit is akmeans_fit and params.t > 0 and params.r > 0:
        max_k = feasible_k_range(dataset, params.r, params.t)
        if params.k > max_k:
            raise InfeasibleError(params.k, max_k)
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            runs = list(pool.map(lambda g: fit(dataset, params, g), rngs))
    else:
        runs = [fit(dataset, params, g) for g in rngs]
    return best_of(runs)
