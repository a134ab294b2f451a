"""Shared test utilities: synthetic datasets, learner doubles, and
benchmark-dataset discovery."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from topkboost.data import MultilabelDataset

REPO_ROOT = Path(__file__).resolve().parents[1]


# --------------------------------------------------------------------------
# Synthetic data


def synth_pair(
    m: int = 5,
    dim: int = 8,
    n_train: int = 80,
    n_test: int = 40,
    seed: int = 0,
    name: str = "synth",
) -> tuple[MultilabelDataset, MultilabelDataset]:
    """Linearly separable-ish multilabel data: label l is relevant when
    x @ w_l clears a threshold. Thresholded so rows average ~2 labels."""
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(dim, m))

    def build(n, split):
        x = rng.normal(size=(n, dim))
        margins = x @ w
        cut = np.quantile(margins, 1.0 - 2.0 / m)
        rel = tuple(frozenset(np.flatnonzero(row > cut).tolist()) for row in margins)
        return MultilabelDataset(name, x, rel, m, split=split)

    return build(n_train, "train"), build(n_test, "test")


def random_scored_instance(rng, m: int, spread: float = 2.0):
    """A random (scores, relevant set, base ranking) triple with 0 < |R| < m."""
    s = rng.normal(size=m) * spread
    r = int(rng.integers(1, m))
    relevant = frozenset(int(l) for l in rng.choice(m, size=r, replace=False))
    base = rng.permutation(m)
    return s, relevant, base


# --------------------------------------------------------------------------
# Learner doubles


class FixedLearner:
    """Predicts one constant distribution; records every update call."""

    def __init__(self, m: int, dist=None):
        self.m = m
        self.dist = np.full(m, 1.0 / m) if dist is None else np.asarray(dist, dtype=np.float64)
        self.updates: list[tuple[np.ndarray, np.ndarray]] = []

    def predict(self, x) -> np.ndarray:
        return self.dist.copy()

    def update(self, x, weights) -> None:
        self.updates.append((np.array(x, copy=True), np.array(weights, copy=True)))


def fixed_factory(dists=None):
    """Factory producing FixedLearners and keeping handles to them.

    ``dists`` may be None (all uniform), one distribution, or a list with
    one distribution per learner (cycled).
    """
    made: list[FixedLearner] = []

    def make(m: int, rng: np.random.Generator) -> FixedLearner:
        if dists is None:
            dist = None
        elif isinstance(dists, (list, tuple)):
            dist = dists[len(made) % len(dists)]
        else:
            dist = dists
        learner = FixedLearner(m, dist)
        made.append(learner)
        return learner

    make.made = made
    return make


def jitter_factory(scale: float = 0.3):
    """Cheap stochastic learners: a fixed random distribution per learner.

    Fast stand-in for the stump pool when a test only needs score
    diversity, not actual learning.
    """

    def make(m: int, rng: np.random.Generator):
        dist = rng.dirichlet(np.full(m, 1.0 / scale))
        return FixedLearner(m, dist)

    return make


# --------------------------------------------------------------------------
# Benchmark dataset discovery (absent in most environments)

DATA_ENV = "TOPKBOOST_DATA"


def data_root() -> Path:
    override = os.environ.get(DATA_ENV)
    return Path(override) if override else REPO_ROOT / "datasets"


def find_split(name: str, split: str) -> Path | None:
    root = data_root()
    for ext in (".arff", ".csv"):
        p = root / f"{name}-{split}{ext}"
        if p.exists():
            return p
    return None


def dataset_pair(name: str) -> tuple[Path, Path] | None:
    train = find_split(name, "train")
    test = find_split(name, "test")
    if train is None or test is None:
        return None
    return train, test


def require_dataset_pair(name: str) -> tuple[Path, Path]:
    pair = dataset_pair(name)
    if pair is None:
        pytest.skip(
            f"benchmark dataset {name!r} not found under {data_root()} "
            f"(fetch with scripts/fetch_datasets.py or set ${DATA_ENV})"
        )
    return pair


LABEL_COUNTS = {
    "emotions": 6,
    "scene": 6,
    "yeast": 14,
    "mediamill": 101,
}
