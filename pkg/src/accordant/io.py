"""CSV ingestion, synthetic data and result files."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .model import (
    AccordanceParams,
    AccordantError,
    Clustering,
    GroupedDataset,
    accordance_report,
)

SCHEMA_VERSION = 1


class IngestionError(AccordantError):
    pass


@dataclass
class IngestConfig:
    group_column: Union[str, int] = "group"
    feature_columns: Optional[Sequence[Union[str, int]]] = None
    standardize: bool = False
    categorical_encoding: bool = True


def _resolve(header: list[str], col) -> int:
    if isinstance(col, int):
        if not 0 <= col < len(header):
            raise IngestionError(f"column index {col} out of range (file has {len(header)} columns)")
        return col
    if col not in header:
        raise IngestionError(f"column {col!r} not found in header {header}")
    return header.index(col)


def _parse_float(cell: str) -> Optional[float]:
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(path, config: IngestConfig | None = None) -> GroupedDataset:
    """Read a comma-separated file with a header row into a dataset.

    Rows keep their file order and groups are numbered by first appearance.
    Columns that are not entirely numeric are one-hot encoded (categories in
    first-appearance order) when ``categorical_encoding`` is on. Empty cells
    are errors.
    """
    config = config or IngestConfig()
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    rows = [row for row in rows if row]
    if not rows:
        raise IngestionError(f"{path} is empty")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    if not body:
        raise IngestionError(f"{path} has a header but no data rows")
    gcol = _resolve(header, config.group_column)
    if config.feature_columns is None:
        fcols = [i for i in range(len(header)) if i != gcol]
    else:
        fcols = [_resolve(header, c) for c in config.feature_columns]
        if gcol in fcols:
            raise IngestionError("the group column cannot also be a feature")
    if not fcols:
        raise IngestionError("no feature columns")

    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise IngestionError(f"row {lineno}: expected {len(header)} cells, got {len(row)}")
        for c in [gcol, *fcols]:
            if row[c].strip() == "":
                raise IngestionError(f"row {lineno}, column {header[c]!r}: missing value")

    columns, names = [], []
    for c in fcols:
        cells = [row[c].strip() for row in body]
        values = [_parse_float(v) for v in cells]
        if all(v is not None for v in values):
            columns.append(np.array(values, dtype=np.float64))
            names.append(header[c])
            continue
        if not config.categorical_encoding:
            bad = next(i for i, v in enumerate(values) if v is None)
            raise IngestionError(f"row {bad + 2}, column {header[c]!r}: non-numeric value {cells[bad]!r}")
        for cat in dict.fromkeys(cells):
            columns.append(np.array([v == cat for v in cells], dtype=np.float64))
            names.append(f"{header[c]}={cat}")
    X = np.column_stack(columns)
    if not np.all(np.isfinite(X)):
        bad_row, bad_col = np.argwhere(~np.isfinite(X))[0]
        raise IngestionError(f"row {bad_row + 2}, column {names[bad_col]!r}: non-finite value")
    if config.standardize:
        X = standardize(X)
    return GroupedDataset.from_labels(X, [row[gcol].strip() for row in body], tuple(names))


def standardize(X: np.ndarray) -> np.ndarray:
    """Z-score each column; constant columns become all zeros."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    out = X - mean
    nz = std > 0
    out[:, nz] /= std[nz]
    return out


@dataclass(frozen=True)
class Component:
    center: tuple
    std: float
    count: int


@dataclass(frozen=True)
class SplitRule:
    """Give points of ``component`` with ``x[axis] < threshold`` group ``low``, the rest ``high``."""

    component: int
    axis: int
    threshold: float
    low: int
    high: int


@dataclass(frozen=True)
class SynthSpec:
    components: tuple
    groups: Optional[tuple] = None  # group per component; defaults to the component id
    splits: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if not self.components:
            raise ValueError("need at least one component")
        dims = {len(c.center) for c in self.components}
        if len(dims) != 1:
            raise ValueError("all component centers need the same dimension")
        for c in self.components:
            if c.count < 1 or c.std <= 0:
                raise ValueError("component counts must be >= 1 and std > 0")
        if self.groups is not None and len(self.groups) != len(self.components):
            raise ValueError("groups must give one group per component")


def generate(spec: SynthSpec) -> tuple[GroupedDataset, np.ndarray]:
    """Sample isotropic Gaussian blobs; returns the dataset and the planted component labels.

    Draws come from a PCG64 generator seeded with ``spec.seed``, component by
    component, so the output depends only on the spec.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    blocks, planted, groups = [], [], []
    base = spec.groups if spec.groups is not None else tuple(range(len(spec.components)))
    for ci, comp in enumerate(spec.components):
        center = np.asarray(comp.center, dtype=np.float64)
        pts = center + comp.std * rng.standard_normal((comp.count, center.size))
        g = np.full(comp.count, base[ci], dtype=np.int64)
        for rule in spec.splits:
            if rule.component == ci:
                g = np.where(pts[:, rule.axis] < rule.threshold, rule.low, rule.high)
        blocks.append(pts)
        planted.append(np.full(comp.count, ci, dtype=np.int64))
        groups.append(g)
    X = np.vstack(blocks)
    names = tuple(f"x{i}" for i in range(X.shape[1]))
    return GroupedDataset.from_labels(X, np.concatenate(groups).tolist(), names), np.concatenate(planted)


def write_csv(dataset: GroupedDataset, path, group_column: str = "group") -> None:
    names = list(dataset.feature_names) or [f"x{i}" for i in range(dataset.rho)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*names, group_column])
        for x, g in zip(dataset.points, dataset.group_of):
            w.writerow([*(repr(float(v)) for v in x), dataset.group_labels[g]])


def _jsonable(label):
    return label.item() if isinstance(label, np.generic) else label


def result_document(
    clustering: Clustering,
    params: AccordanceParams,
    dataset: GroupedDataset,
    metrics: dict | None = None,
    wall_ms: float = 0.0,
    extra: dict | None = None,
) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "params": {
            "k": params.k,
            "r": params.r,
            "t": params.t,
            "tau": params.tau,
            "delta": params.delta,
            "restarts": params.restarts,
            "seed": params.seed,
            "init_mode": params.init_mode,
        },
        "n": dataset.n,
        "m": dataset.m,
        "rho": dataset.rho,
        "assignment": [int(a) for a in clustering.assignment],
        "centers": [[float(v) for v in row] for row in clustering.centers],
        "sse": float(clustering.sse),
        "sse_trace": [float(v) for v in clustering.sse_trace],
        "iterations": int(clustering.iterations),
        "accordant_groups": [
            {
                "group": e.group,
                "label": _jsonable(dataset.group_labels[e.group]),
                "cluster": e.cluster,
                "fraction": e.fraction,
                "forced_count": e.forced_count,
            }
            for e in clustering.accordance
        ],
        "metrics": dict(metrics or {}),
        "wall_ms": float(wall_ms),
    }
    if extra:
        doc.update(extra)
    return doc


def write_result(clustering, params, dataset, path, metrics=None, wall_ms=0.0, extra=None) -> dict:
    doc = result_document(clustering, params, dataset, metrics, wall_ms, extra)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise AccordantError(f"cannot write result to {path}: {exc}") from exc
    return doc


def read_result(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise AccordantError(f"unsupported result schema {doc.get('schema_version')!r}")
    return doc


def check_result(doc: dict, dataset: GroupedDataset) -> bool:
    """Recompute the accordance entries from the stored assignment and compare."""
    entries = accordance_report(np.array(doc["assignment"]), dataset, doc["params"]["t"], doc["params"]["k"])
    stored = [(g["group"], g["cluster"], g["fraction"], g["forced_count"]) for g in doc["accordant_groups"]]
    return stored == [(e.group, e.cluster, e.fraction, e.forced_count) for e in entries]


def random_instance(rng: np.random.Generator, n: int, m: int, rho: int = 2) -> GroupedDataset:
    """Standard-normal points with random group labels, every group non-empty."""
    if m > n:
        raise ValueError("need at least one point per group")
    groups = np.concatenate([np.arange(m), rng.integers(0, m, n - m)])
    rng.shuffle(groups)
    return GroupedDataset(rng.standard_normal((n, rho)), groups)
