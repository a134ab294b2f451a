"""Reproducible experiment runs: stream a dataset through a booster and
record prequential losses.

A run takes one algorithm, a train/test dataset pair, and a list of seeds.
Per seed: the booster sees the train split for a configurable number of
loops (seeded shuffle per loop), then the test split in file order, all
prequentially — predict, score the played ranking against ground truth,
then update. Test-phase updates can be frozen for ablation. The headline
metric is the average weighted rank loss of the played (randomized)
rankings over the test stream.

Outputs: a per-round cumulative-average loss curve CSV with columns
(seed, round, avg_weighted_rank_loss, explored, expert_index) where
expert_index is the number of learners aggregated by the played expert,
and a flat key=value summary. Identical config and seeds give
byte-identical files.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .boosters import AdaptiveBooster, BoosterRound, OnlineBooster, PotentialBooster
from .core import RelevanceOracle
from .data import MultilabelDataset, StreamPlan, load_dataset, stream
from .errors import ConfigError, UndefinedEdgeError
from .losses import logistic_gradient, ranking_weighted_rank_loss, sigmoid
from .randomize import SINGLE_SWAP, UNIFORM, RandomizationScheme
from .weaklearn import LearnerFactory, stump_pool_factory

ALGOS = ("topbbm", "topada", "fullbbm", "fullada")
RAND_KINDS = {"uniform": UNIFORM, "singleswap": SINGLE_SWAP}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one experiment (all seeds share it)."""

    algo: str
    train_path: str | None = None
    test_path: str | None = None
    train_data: MultilabelDataset | None = None
    test_data: MultilabelDataset | None = None
    label_count: int | None = None
    k: int = 3
    rho: float = 0.02
    gamma: float = 0.2
    learners: int = 20
    loops: int = 1
    seeds: tuple[int, ...] = (0,)
    rand: str = "uniform"
    out_dir: str | None = None
    freeze: bool = False
    prob_clip: bool = True
    grad_clip: bool = True
    diagnostics: bool = False
    shuffle: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ConfigError(f"unknown algorithm {self.algo!r}; choose from {ALGOS}")
        if self.rand not in RAND_KINDS:
            raise ConfigError(f"unknown randomization {self.rand!r}; choose uniform or singleswap")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.learners < 1:
            raise ConfigError("learners must be >= 1")
        if not 1 <= self.loops <= 20:
            raise ConfigError("loops must lie in [1, 20]")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError("rho must lie in [0, 1)")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.train_path is None and self.train_data is None:
            raise ConfigError("a train dataset (path or data) is required")
        if self.test_path is None and self.test_data is None:
            raise ConfigError("a test dataset (path or data) is required")

    @property
    def full_information(self) -> bool:
        return self.algo.startswith("full")


def resolve_datasets(config: ExperimentConfig) -> tuple[MultilabelDataset, MultilabelDataset]:
    train = config.train_data
    if train is None:
        train = load_dataset(config.train_path, labels=config.label_count, split="train")
    test = config.test_data
    if test is None:
        test = load_dataset(config.test_path, labels=config.label_count, split="test")
    if train.m != test.m:
        raise ConfigError(f"train has m={train.m} labels but test has m={test.m}")
    if train.dim != test.dim:
        raise ConfigError("train and test feature dimensions disagree")
    return train, test


def build_scheme(config: ExperimentConfig, m: int) -> RandomizationScheme:
    """Effective randomization: the full-information algorithms pin k=m, rho=0."""
    if config.full_information:
        return RandomizationScheme(RAND_KINDS[config.rand], m, m, 0.0)
    if config.k > m:
        raise ConfigError(f"k={config.k} exceeds the label count m={m}")
    try:
        return RandomizationScheme(RAND_KINDS[config.rand], config.k, m, config.rho)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def make_booster(
    algo: str,
    scheme: RandomizationScheme,
    learners: int,
    seed,
    gamma: float = 0.2,
    prob_clip: bool = True,
    grad_clip: bool = True,
    learner_factory: LearnerFactory | None = None,
) -> OnlineBooster:
    """Construct the booster an algorithm name refers to."""
    if algo not in ALGOS:
        raise ConfigError(f"unknown algorithm {algo!r}; choose from {ALGOS}")
    factory = learner_factory if learner_factory is not None else stump_pool_factory()
    if algo.endswith("bbm"):
        return PotentialBooster(
            scheme, learners, factory, seed, gamma=gamma, clip_probabilities=prob_clip
        )
    return AdaptiveBooster(
        scheme,
        learners,
        factory,
        seed,
        clip_probabilities=prob_clip,
        clip_gradients=grad_clip,
    )


def build_booster(
    config: ExperimentConfig,
    m: int,
    seed,
    learner_factory: LearnerFactory | None = None,
) -> OnlineBooster:
    return make_booster(
        config.algo,
        build_scheme(config, m),
        config.learners,
        seed,
        gamma=config.gamma,
        prob_clip=config.prob_clip,
        grad_clip=config.grad_clip,
        learner_factory=learner_factory,
    )


class EdgeTracker:
    """Running empirical edge of each weak learner (ground-truth diagnostic).

    Accumulates, per learner i, the inner products of full-information
    logistic-gradient cost vectors with the learner's predictions, and the
    corresponding cost-vector weights; the edge is minus their ratio.
    Harness-side only: this reads the full relevant set.
    """

    def __init__(self, n_learners: int):
        self.num = np.zeros(n_learners)
        self.den = np.zeros(n_learners)

    def observe(self, rnd: BoosterRound, relevant: frozenset[int], m: int) -> None:
        rel = sorted(relevant)
        irr = sorted(set(range(m)) - relevant)
        if not rel or not irr:
            return
        pairs = [(a, b, 1.0) for a in rel for b in irr]
        for i in range(self.num.size):
            prev = rnd.prefixes[i]
            cost = logistic_gradient(prev, pairs)
            self.num[i] += float(cost @ rnd.h[i])
            aa = np.array([p[0] for p in pairs])
            bb = np.array([p[1] for p in pairs])
            self.den[i] += float(np.sum(sigmoid(prev[bb] - prev[aa])))

    def edges(self) -> np.ndarray:
        if np.any(self.den == 0.0):
            raise UndefinedEdgeError("zero total cost-vector weight for some learner")
        return -self.num / self.den


@dataclass
class SeedResult:
    seed: int
    curve: list[tuple[int, int, float, int, int]]
    train_loss: float
    test_loss: float
    alpha: np.ndarray
    expert_weights: np.ndarray | None
    edges: np.ndarray | None
    wall_time: float


@dataclass
class RunSummary:
    config: ExperimentConfig
    results: list[SeedResult]
    wall_time: float
    files: list[Path] = field(default_factory=list)

    def _stats(self, values) -> tuple[float, float]:
        vals = np.asarray(values, dtype=np.float64)
        std = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        return float(np.mean(vals)), std

    @property
    def test_loss_stats(self) -> tuple[float, float]:
        return self._stats([r.test_loss for r in self.results])

    @property
    def train_loss_stats(self) -> tuple[float, float]:
        return self._stats([r.train_loss for r in self.results])


def run_seed(
    config: ExperimentConfig,
    seed: int,
    train: MultilabelDataset,
    test: MultilabelDataset,
    learner_factory: LearnerFactory | None = None,
    on_round: Callable[[int, int], None] | None = None,
) -> SeedResult:
    """Run one seeded booster over the train loops then the test stream."""
    started = time.perf_counter()
    root = np.random.SeedSequence(seed)
    booster_seed, shuffle_seed = root.spawn(2)
    booster = build_booster(config, train.m, booster_seed, learner_factory)
    tracker = EdgeTracker(config.learners) if config.diagnostics else None

    train_plan = StreamPlan(config.loops, config.shuffle, shuffle_seed)
    test_plan = StreamPlan(1, False, 0)
    n_train_rounds = train.n * config.loops
    total_rounds = n_train_rounds + test.n

    curve: list[tuple[int, int, float, int, int]] = []
    cum_loss = 0.0
    train_loss_sum = 0.0
    test_loss_sum = 0.0
    round_no = 0
    for phase, ds, plan in (("train", train, train_plan), ("test", test, test_plan)):
        for x, relevant in stream(ds, plan):
            round_no += 1
            rnd = booster.predict(x)
            played_loss = ranking_weighted_rank_loss(rnd.prediction.final_ranking, relevant)
            cum_loss += played_loss
            if phase == "train":
                train_loss_sum += played_loss
            else:
                test_loss_sum += played_loss
            if tracker is not None:
                tracker.observe(rnd, relevant, train.m)
            if not (config.freeze and phase == "test"):
                booster.update(rnd, RelevanceOracle(relevant, train.m))
            curve.append(
                (
                    seed,
                    round_no,
                    cum_loss / round_no,
                    int(rnd.prediction.explored),
                    rnd.expert_count,
                )
            )
            if on_round is not None:
                on_round(round_no, total_rounds)

    edges = None
    if tracker is not None:
        try:
            edges = tracker.edges()
        except UndefinedEdgeError:
            edges = np.full(config.learners, np.nan)
    expert_weights = getattr(booster, "expert_weights", None)
    return SeedResult(
        seed=seed,
        curve=curve,
        train_loss=train_loss_sum / max(n_train_rounds, 1),
        test_loss=test_loss_sum / max(test.n, 1),
        alpha=booster.alpha.copy(),
        expert_weights=None if expert_weights is None else expert_weights.copy(),
        edges=edges,
        wall_time=time.perf_counter() - started,
    )


def _seed_task(args) -> SeedResult:
    config, seed, train, test = args
    return run_seed(config, seed, train, test)


def run_experiment(
    config: ExperimentConfig,
    learner_factory: LearnerFactory | None = None,
    on_round: Callable[[int, int, int], None] | None = None,
) -> RunSummary:
    """Run all seeds; write curve and summary files when out_dir is set.

    ``on_round(seed, round, total)`` reports progress (sequential runs
    only). With jobs > 1 the seeds fan out to worker processes.
    """
    started = time.perf_counter()
    train, test = resolve_datasets(config)
    build_scheme(config, train.m)  # fail fast on k/rho problems

    if config.jobs > 1 and len(config.seeds) > 1:
        tasks = [(config, s, train, test) for s in config.seeds]
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_seed_task, tasks))
    else:
        results = []
        for s in config.seeds:
            cb = None if on_round is None else (lambda r, t, _s=s: on_round(_s, r, t))
            results.append(run_seed(config, s, train, test, learner_factory, cb))

    summary = RunSummary(config, results, time.perf_counter() - started)
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        curve_path = out / "curve.csv"
        write_curve_csv(curve_path, [row for r in results for row in r.curve])
        summary_path = out / "summary.txt"
        summary_path.write_text(summary_text(summary))
        summary.files = [curve_path, summary_path]
    return summary


def curve_csv_text(rows: Sequence[tuple[int, int, float, int, int]]) -> str:
    out = ["seed,round,avg_weighted_rank_loss,explored,expert_index"]
    for seed, rno, avg, explored, expert in rows:
        out.append(f"{seed},{rno},{avg!r},{explored},{expert}")
    return "\n".join(out) + "\n"


def write_curve_csv(path, rows: Sequence[tuple[int, int, float, int, int]]) -> None:
    Path(path).write_text(curve_csv_text(rows))


def _fmt_vec(vec: np.ndarray) -> str:
    return ",".join(repr(float(v)) for v in vec)


def summary_lines(summary: RunSummary) -> list[str]:
    cfg = summary.config
    lines = [
        f"algo={cfg.algo}",
        f"train={cfg.train_path or (cfg.train_data.name if cfg.train_data else '')}",
        f"test={cfg.test_path or (cfg.test_data.name if cfg.test_data else '')}",
        f"rand={cfg.rand}",
        f"k={cfg.k}",
        f"rho={cfg.rho!r}",
        f"gamma={cfg.gamma!r}",
        f"learners={cfg.learners}",
        f"loops={cfg.loops}",
        f"freeze={int(cfg.freeze)}",
        f"prob_clip={int(cfg.prob_clip)}",
        f"grad_clip={int(cfg.grad_clip)}",
        f"seeds={','.join(str(s) for s in cfg.seeds)}",
    ]
    for r in summary.results:
        lines.append(f"train_loss_seed_{r.seed}={r.train_loss!r}")
        lines.append(f"test_loss_seed_{r.seed}={r.test_loss!r}")
    tr_mean, tr_std = summary.train_loss_stats
    te_mean, te_std = summary.test_loss_stats
    lines += [
        f"train_loss_mean={tr_mean!r}",
        f"train_loss_std={tr_std!r}",
        f"test_loss_mean={te_mean!r}",
        f"test_loss_std={te_std!r}",
        f"wall_time_seconds={summary.wall_time:.3f}",
    ]
    for r in summary.results:
        lines.append(f"alpha_seed_{r.seed}={_fmt_vec(r.alpha)}")
        if r.expert_weights is not None:
            lines.append(f"nu_seed_{r.seed}={_fmt_vec(r.expert_weights)}")
        if r.edges is not None:
            lines.append(f"edges_seed_{r.seed}={_fmt_vec(r.edges)}")
    return lines


def summary_text(summary: RunSummary) -> str:
    return "".join(line + "\n" for line in summary_lines(summary))


def sweep_k(
    config: ExperimentConfig,
    k_values: Sequence[int],
    learner_factory: LearnerFactory | None = None,
) -> dict[int, RunSummary]:
    """Re-run the experiment for each k, writing per-k mean/std curve bands.

    Each band CSV has columns (round, avg_weighted_rank_loss_mean,
    avg_weighted_rank_loss_std) aggregated across seeds, one file per k.
    """
    if not k_values:
        raise ConfigError("sweep needs at least one k value")
    out_root = Path(config.out_dir) if config.out_dir is not None else None
    summaries: dict[int, RunSummary] = {}
    for k in k_values:
        sub_out = None if out_root is None else str(out_root / f"k{k}")
        sub = replace(config, k=k, out_dir=sub_out)
        summary = run_experiment(sub, learner_factory)
        summaries[k] = summary
        if out_root is not None:
            band_path = out_root / f"curve_k{k}.csv"
            _write_band_csv(band_path, summary)
            summary.files.append(band_path)
    return summaries


def band_csv_text(curves: Sequence[np.ndarray]) -> str:
    """Mean/std band over per-seed cumulative-loss series, as CSV text."""
    stacked = np.stack([np.asarray(c, dtype=np.float64) for c in curves])
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0, ddof=1) if stacked.shape[0] > 1 else np.zeros(stacked.shape[1])
    out = ["round,avg_weighted_rank_loss_mean,avg_weighted_rank_loss_std"]
    for i in range(mean.size):
        out.append(f"{i + 1},{float(mean[i])!r},{float(std[i])!r}")
    return "\n".join(out) + "\n"


def _write_band_csv(path, summary: RunSummary) -> None:
    curves = [np.array([row[2] for row in r.curve]) for r in summary.results]
    Path(path).write_text(band_csv_text(curves))
