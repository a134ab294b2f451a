"""Online weak learners: cost-sensitive predictors of label distributions.

A weak learner maps a feature vector to a probability distribution over the
m labels and learns online from per-label cost vectors (lower cost = better
label). Boosters convert costs into nonnegative importance weights
w[l] = max(costs) - costs[l] before handing them to a learner, so learners
here consume weights directly.

The workhorse is a pool of online decision stumps over a random feature
subset, with threshold grids calibrated on a short warmup buffer and
Laplace-smoothed weight histograms on each side of every threshold.
"""

from __future__ import annotations

from typing import Callable, Protocol

import numpy as np

from .errors import ContractError

WARMUP_ROUNDS = 30
MAX_FEATURES = 20
THRESHOLDS_PER_FEATURE = 8
LAPLACE = 1.0


class OnlineWeakLearner(Protocol):
    m: int

    def predict(self, x) -> np.ndarray:
        """Distribution over the m labels for feature vector x."""
        ...

    def update(self, x, weights) -> None:
        """Absorb one example with per-label importance weights (>= 0)."""
        ...


LearnerFactory = Callable[[int, np.random.Generator], "OnlineWeakLearner"]


def costs_to_weights(costs) -> np.ndarray:
    """Importance weights max(c) - c[l]; the best label gets the most weight."""
    c = np.asarray(costs, dtype=np.float64)
    if c.ndim != 1:
        raise ContractError("cost vector must be one-dimensional")
    return np.max(c) - c


class UniformRandomLearner:
    """Ignores everything and predicts the uniform distribution (baseline)."""

    def __init__(self, m: int, rng: np.random.Generator | None = None):
        self.m = m

    def predict(self, x) -> np.ndarray:
        return np.full(self.m, 1.0 / self.m)

    def update(self, x, weights) -> None:
        pass


class StumpPoolLearner:
    """Pool of online decision stumps on a random feature subset.

    Feature subset (at most ``max_features``) and threshold grids are
    fixed after a warmup buffer of ``warmup`` examples: thresholds are
    interior quantiles of the buffered values, deduplicated per feature.
    Each stump keeps a label-weight histogram per side; its prediction is
    the Laplace-smoothed normalized histogram of the side the example
    falls on, and the pool predicts the average over stumps. During
    warmup (and whenever all grids degenerate) the pool falls back to a
    global label-weight histogram.
    """

    def __init__(
        self,
        m: int,
        rng: np.random.Generator,
        max_features: int = MAX_FEATURES,
        warmup: int = WARMUP_ROUNDS,
        thresholds_per_feature: int = THRESHOLDS_PER_FEATURE,
    ):
        self.m = m
        self.rng = rng
        self.max_features = max_features
        self.warmup = warmup
        self.thresholds_per_feature = thresholds_per_feature
        self.dim: int | None = None
        self.feat_idx: np.ndarray | None = None
        self.stump_feat: np.ndarray | None = None
        self.stump_thr: np.ndarray | None = None
        self.hist: np.ndarray | None = None  # (n_stumps, 2, m)
        self.global_hist = np.zeros(m)
        self._buffer: list[np.ndarray] = []

    def _ensure_features(self, x: np.ndarray):
        if self.feat_idx is None:
            self.dim = x.size
            n_sel = min(self.max_features, self.dim)
            self.feat_idx = np.sort(self.rng.choice(self.dim, size=n_sel, replace=False))
        elif x.size != self.dim:
            raise ContractError(f"expected {self.dim} features, got {x.size}")

    def _build_stumps(self):
        buf = np.stack(self._buffer)
        qs = np.linspace(0.0, 1.0, self.thresholds_per_feature + 2)[1:-1]
        feats, thrs = [], []
        for col, f in enumerate(self.feat_idx):
            grid = np.unique(np.quantile(buf[:, col], qs))
            feats.extend([f] * grid.size)
            thrs.extend(grid.tolist())
        self.stump_feat = np.asarray(feats, dtype=np.intp)
        self.stump_thr = np.asarray(thrs)
        self.hist = np.zeros((self.stump_feat.size, 2, self.m))
        self._buffer = []

    def _sides(self, x: np.ndarray) -> np.ndarray:
        return (x[self.stump_feat] <= self.stump_thr).astype(np.intp)

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).ravel()
        self._ensure_features(x)
        if self.hist is None or self.hist.size == 0:
            g = self.global_hist + LAPLACE
            return g / g.sum()
        rows = self.hist[np.arange(self.hist.shape[0]), self._sides(x)] + LAPLACE
        dist = rows / rows.sum(axis=1, keepdims=True)
        return dist.mean(axis=0)

    def update(self, x, weights) -> None:
        x = np.asarray(x, dtype=np.float64).ravel()
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (self.m,):
            raise ContractError("weight vector length must equal the label count")
        if np.any(w < 0):
            raise ContractError("importance weights must be nonnegative")
        self._ensure_features(x)
        self.global_hist += w
        if self.hist is None:
            self._buffer.append(x[self.feat_idx].copy())
            if len(self._buffer) >= self.warmup:
                self._build_stumps()
            return
        if self.hist.size:
            self.hist[np.arange(self.hist.shape[0]), self._sides(x)] += w


def stump_pool_factory(**kwargs) -> LearnerFactory:
    def make(m: int, rng: np.random.Generator) -> StumpPoolLearner:
        return StumpPoolLearner(m, rng, **kwargs)

    return make


def uniform_factory() -> LearnerFactory:
    def make(m: int, rng: np.random.Generator) -> UniformRandomLearner:
        return UniformRandomLearner(m, rng)

    return make
