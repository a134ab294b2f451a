"""Online multilabel-ranking boosting under top-k feedback.

The package splits into label-space primitives (:mod:`core`), pairwise
losses (:mod:`losses`), exploration and unbiased estimation
(:mod:`randomize`), potential functions (:mod:`potential`), weak learners
(:mod:`weaklearn`), the boosting algorithms (:mod:`boosters`), dataset
ingestion (:mod:`data`), the experiment harness (:mod:`experiment`), and
verification oracles (:mod:`testkit`). An HTTP service lives in
:mod:`topkboost.service` and the command line in :mod:`topkboost.cli`.
"""

from .boosters import AdaptiveBooster, BoosterRound, OnlineBooster, PotentialBooster, RoundRecord
from .core import Feedback, RelevanceOracle, as_scores, rank_of_scores, top_k
from .data import MultilabelDataset, StreamPlan, load_dataset, parse_arff, read_csv, reduce_dataset, stream, write_csv
from .errors import (
    ArffParseError,
    ConfigError,
    ContractError,
    InformationBarrierError,
    ScaleGuardError,
    TopkBoostError,
    UndefinedEdgeError,
)
from .experiment import ExperimentConfig, RunSummary, run_experiment, sweep_k
from .losses import ATOMS, HINGE, LOGISTIC, RANK, PairwiseLoss, loss, rank_loss, weighted_rank_loss
from .potential import PotentialEvaluator
from .randomize import PairWeightTable, RandomizationScheme, RandomizedPrediction, estimate_loss, randomize
from .weaklearn import OnlineWeakLearner, StumpPoolLearner, UniformRandomLearner, stump_pool_factory

__version__ = "0.1.0"

__all__ = [
    "AdaptiveBooster",
    "ArffParseError",
    "ATOMS",
    "as_scores",
    "BoosterRound",
    "ConfigError",
    "ContractError",
    "estimate_loss",
    "ExperimentConfig",
    "Feedback",
    "HINGE",
    "InformationBarrierError",
    "load_dataset",
    "LOGISTIC",
    "loss",
    "MultilabelDataset",
    "OnlineBooster",
    "OnlineWeakLearner",
    "PairWeightTable",
    "PairwiseLoss",
    "parse_arff",
    "PotentialBooster",
    "PotentialEvaluator",
    "RANK",
    "RandomizationScheme",
    "RandomizedPrediction",
    "randomize",
    "rank_loss",
    "rank_of_scores",
    "read_csv",
    "reduce_dataset",
    "RelevanceOracle",
    "RoundRecord",
    "run_experiment",
    "RunSummary",
    "ScaleGuardError",
    "stream",
    "StreamPlan",
    "StumpPoolLearner",
    "stump_pool_factory",
    "sweep_k",
    "top_k",
    "TopkBoostError",
    "UndefinedEdgeError",
    "UniformRandomLearner",
    "weighted_rank_loss",
    "write_csv",
]
