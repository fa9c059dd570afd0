"""Shared domain types: grouped datasets, run parameters, clusterings.

Accordance checks are done on integer counts. A group g is t-accordant on a
cluster when that cluster holds at least ``ceil(t * n_g)`` of its members.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

INIT_MODES = ("uniform", "distinct-groups")


class AccordantError(Exception):
    """Base class for library errors."""


class InfeasibleError(AccordantError):
    """Raised when no (r, t)-accordant clustering with k clusters exists."""

    def __init__(self, k: int, max_k: int, message: str | None = None):
        self.k = k
        self.max_k = max_k
        super().__init__(
            message
            or f"k={k} is infeasible: an accordant clustering exists only for k <= {max_k}"
        )


class InitError(AccordantError):
    """Raised when centers cannot be initialised (k > N, or k > m in distinct-groups mode)."""


class ParameterError(AccordantError, ValueError):
    pass


def forced_count(t: float, n: int) -> int:
    """Members of an n-point group that must share a cluster: ``ceil(t*n)``.

    A tiny tolerance absorbs float noise such as ``0.7 * 10 == 7.000000000000001``.
    """
    x = t * n
    c = math.ceil(x)
    if c - x > 1 - 1e-9:
        c -= 1
    return int(c)


@dataclass(frozen=True, eq=False)
class GroupedDataset:
    """Points together with a group label per point.

    ``group_of`` holds dense ids ``0..m-1``; ``group_labels[g]`` is the
    original label of group ``g``.
    """

    points: np.ndarray
    group_of: np.ndarray
    group_labels: tuple = ()
    feature_names: tuple = ()
    group_index: tuple = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ParameterError(f"points must be a non-empty N x rho matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("points contain non-finite values")
        groups = np.asarray(self.group_of)
        if groups.shape != (pts.shape[0],):
            raise ParameterError("group_of must hold exactly one group per point")
        if groups.size and (not np.issubdtype(groups.dtype, np.integer) or groups.min() < 0):
            raise ParameterError("group_of must hold non-negative integer ids")
        groups = groups.astype(np.int64)
        m = int(groups.max()) + 1
        index = tuple(np.flatnonzero(groups == g) for g in range(m))
        if any(len(ix) == 0 for ix in index):
            raise ParameterError("group ids must be dense: every id in 0..m-1 needs a member")
        labels = tuple(self.group_labels) if self.group_labels else tuple(range(m))
        if len(labels) != m:
            raise ParameterError(f"expected {m} group labels, got {len(labels)}")
        pts.setflags(write=False)
        groups.setflags(write=False)
        for ix in index:
            ix.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "group_of", groups)
        object.__setattr__(self, "group_labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "group_index", index)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def rho(self) -> int:
        return self.points.shape[1]

    @property
    def m(self) -> int:
        return len(self.group_index)

    @property
    def group_sizes(self) -> np.ndarray:
        return np.array([len(ix) for ix in self.group_index], dtype=np.int64)

    @classmethod
    def from_labels(cls, points, labels: Sequence, feature_names=()) -> "GroupedDataset":
        """Build a dataset from arbitrary group labels, numbered by first appearance."""
        ids: dict = {}
        dense = np.empty(len(labels), dtype=np.int64)
        for i, lab in enumerate(labels):
            dense[i] = ids.setdefault(lab, len(ids))
        return cls(points, dense, tuple(ids), feature_names)


@dataclass(frozen=True)
class AccordanceParams:
    k: int
    r: int = 1
    t: float = 0.0
    tau: int = 300
    delta: float = 1e-7
    restarts: int = 1
    seed: int = 0
    init_mode: str = "distinct-groups"

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if not 0.0 <= self.t <= 1.0:
            raise ParameterError("t must lie in [0, 1]")
        if self.r < 0:
            raise ParameterError("r must be >= 0")
        if self.tau < 1:
            raise ParameterError("tau must be >= 1")
        if self.delta < 0:
            raise ParameterError("delta must be >= 0")
        if self.restarts < 1:
            raise ParameterError("restarts must be >= 1")
        if self.init_mode not in INIT_MODES:
            raise ParameterError(f"init_mode must be one of {INIT_MODES}")

    def check_against(self, dataset: GroupedDataset) -> None:
        if self.r > dataset.m:
            raise ParameterError(f"r must lie in 1..m (m={dataset.m}), got {self.r}")


@dataclass(frozen=True)
class AccordanceEntry:
    group: int
    cluster: int
    fraction: float
    count: int
    forced_count: int


@dataclass(eq=False)
class Clustering:
    assignment: np.ndarray
    centers: np.ndarray
    sse: float
    iterations: int
    sse_trace: list[float]
    accordance: list[AccordanceEntry]
    restart_sse: list[float] = field(default_factory=list)
    best_restart: int = 0


@dataclass(frozen=True, eq=False)
class PenaltyMatrix:
    distances: np.ndarray
    penalties: np.ndarray


@dataclass(frozen=True)
class Pairing:
    group: int
    center: int
    forced: np.ndarray
    penalty: float


@dataclass(frozen=True)
class PairingPlan:
    pairs: tuple[Pairing, ...]

    @property
    def total_penalty(self) -> float:
        return float(sum(p.penalty for p in self.pairs))


def count_table(assignment: np.ndarray, dataset: GroupedDataset, k: int) -> np.ndarray:
    """m x k matrix of member counts per (group, cluster)."""
    assignment = np.asarray(assignment, dtype=np.int64)
    flat = dataset.group_of * k + assignment
    return np.bincount(flat, minlength=dataset.m * k).reshape(dataset.m, k)


def accordance_report(assignment, dataset: GroupedDataset, t: float, k: int | None = None) -> list[AccordanceEntry]:
    """Every group with some cluster holding at least a t fraction of it.

    Each group is reported once, paired with its largest-share cluster
    (lowest cluster id on ties).
    """
    assignment = np.asarray(assignment, dtype=np.int64)
    if k is None:
        k = int(assignment.max()) + 1 if assignment.size else 1
    counts = count_table(assignment, dataset, k)
    sizes = dataset.group_sizes
    best = counts.argmax(axis=1)
    report = []
    for g in range(dataset.m):
        need = forced_count(t, int(sizes[g]))
        c = int(counts[g, best[g]])
        if c >= need:
            report.append(AccordanceEntry(g, int(best[g]), c / int(sizes[g]), c, need))
    return report


def is_rt_accordant(assignment, dataset: GroupedDataset, r: int, t: float) -> bool:
    return len(accordance_report(assignment, dataset, t)) >= r
