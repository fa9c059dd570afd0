from pathlib import Path

import numpy as np
import pytest

from accordant import GroupedDataset, IngestConfig, load_csv

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def iris_path() -> Path:
    return DATA / "iris.csv"


@pytest.fixture(scope="session")
def iris(iris_path) -> GroupedDataset:
    return load_csv(iris_path, IngestConfig(group_column="species"))


def blobs(rng, n_per=20, centers=((0, 0), (8, 0), (0, 8)), m=3, std=1.0):
    """Gaussian blobs with random group labels (every group non-empty)."""
    centers = np.asarray(centers, dtype=float)
    X = np.vstack([c + std * rng.standard_normal((n_per, centers.shape[1])) for c in centers])
    groups = np.concatenate([np.arange(m), rng.integers(0, m, len(X) - m)])
    rng.shuffle(groups)
    return GroupedDataset(X, groups)


ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture()
def acceptance(capsys):
    """Record one PASS/FAIL line for an acceptance criterion and print it immediately."""

    def record(name: str, ok: bool, detail: str):
        ACCEPTANCE.append((name, ok, detail))
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
