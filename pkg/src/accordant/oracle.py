"""Exhaustive search for the optimal (accordant) k-clustering of a tiny dataset.

Candidates are canonical labelings: point 0 is in cluster 0 and every new
cluster id is one more than the largest id used so far. This visits each
partition into exactly k non-empty clusters once, in lexicographic order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .engine import feasible_k_range
from .kmeans import cluster_means, objective
from .model import AccordantError, GroupedDataset, forced_count

BUDGET = 10**8
CHUNK = 1 << 16


class BudgetExceeded(AccordantError):
    def __init__(self, required: int, budget: int = BUDGET):
        self.required = required
        self.budget = budget
        super().__init__(f"enumeration needs k**N = {required} > budget {budget}")


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    sse: float
    assignment: Optional[np.ndarray]
    candidates: int


def canonical_labelings(n: int, k: int, chunk: int = CHUNK) -> Iterator[np.ndarray]:
    """Yield blocks of canonical labelings with exactly k clusters, in lexicographic order."""
    if k < 1 or k > n:
        return
    rows = np.zeros((1, 1), dtype=np.int8)
    yield from _expand(rows, np.zeros(1, dtype=np.int8), n, k, chunk)


def _expand(rows, top, n, k, chunk):
    while rows.shape[1] < n:
        if rows.shape[0] > chunk:
            half = rows.shape[0] // 2
            yield from _expand(rows[:half], top[:half], n, k, chunk)
            yield from _expand(rows[half:], top[half:], n, k, chunk)
            return
        pos = rows.shape[1]
        options = np.minimum(top + 1, k - 1).astype(np.int64) + 1
        parent = np.repeat(np.arange(rows.shape[0]), options)
        starts = np.cumsum(options) - options
        label = (np.arange(parent.size) - np.repeat(starts, options)).astype(np.int8)
        top = np.maximum(top[parent], label)
        rows = np.column_stack([rows[parent], label])
        # drop prefixes that can no longer reach k distinct clusters
        alive = (k - 1 - top.astype(np.int64)) <= (n - 1 - pos)
        rows, top = rows[alive], top[alive]
    yield rows


def _block_sse(X: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    onehot = (labels[:, :, None] == np.arange(k)).astype(np.float64)
    counts = onehot.sum(axis=1)
    means = np.einsum("mnk,nd->mkd", onehot, X) / counts[:, :, None]
    resid = X[None, :, :] - np.take_along_axis(means, labels[:, :, None].astype(np.int64), axis=1)
    return np.einsum("mnd,mnd->m", resid, resid)


def _search(dataset: GroupedDataset, k: int, r: int, t: float, constrained: bool) -> OracleResult:
    n = dataset.n
    required = k**n
    if required > BUDGET:
        raise BudgetExceeded(required)
    X = dataset.points - dataset.points.mean(axis=0)
    needs = [forced_count(t, len(ix)) for ix in dataset.group_index]
    best_sse, best_rows, seen = np.inf, None, 0
    for block in canonical_labelings(n, k, max(1, CHUNK // max(1, n * dataset.rho))):
        seen += block.shape[0]
        if constrained:
            ok_groups = np.zeros(block.shape[0], dtype=np.int64)
            for members, need in zip(dataset.group_index, needs):
                sub = block[:, members]
                top = (sub[:, :, None] == np.arange(k)).sum(axis=1).max(axis=1)
                ok_groups += top >= need
            block = block[ok_groups >= r]
            if block.shape[0] == 0:
                continue
        scores = _block_sse(X, block, k)
        i = int(np.argmin(scores))
        if scores[i] < best_sse:
            best_sse, best_rows = float(scores[i]), block[i].astype(np.int64)
    if best_rows is None:
        return OracleResult(False, float("inf"), None, seen)
    centers, _ = cluster_means(dataset.points, best_rows, k)
    return OracleResult(True, objective(dataset.points, best_rows, centers), best_rows, seen)


def optimal_accordant(dataset: GroupedDataset, k: int, r: int, t: float) -> OracleResult:
    """Minimum-SSE (r, t)-accordant clustering into exactly k clusters.

    Ties go to the lexicographically smallest canonical labeling. Refuses
    with :class:`BudgetExceeded` when ``k**N`` exceeds the budget.
    """
    return _search(dataset, k, r, t, constrained=r > 0)


def optimal_unconstrained(dataset: GroupedDataset, k: int) -> OracleResult:
    return _search(dataset, k, 0, 0.0, constrained=False)


def lemma_agrees(dataset: GroupedDataset, k: int, r: int, t: float) -> bool:
    """True when oracle feasibility matches the closed-form bound at this k."""
    return optimal_accordant(dataset, k, r, t).feasible == (k <= feasible_k_range(dataset, r, t))
