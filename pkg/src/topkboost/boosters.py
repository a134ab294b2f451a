"""Online boosting algorithms for multilabel ranking under top-k feedback.

Both boosters maintain N online weak learners producing label distributions
h^1..h^N and form experts as prefix aggregates s^j = sum_{i<=j} alpha^i h^i.
One round: predict scores, randomize the played ranking, reveal relevance
bits for the played top-k only, then drive all learner updates from
importance-weighted estimates built on those revealed pairs.

``PotentialBooster`` plays the deepest expert with unit alpha and feeds
each learner the estimated potential cost of nudging each label's score
(boost-by-majority style, hinge-atom potential).

``AdaptiveBooster`` draws the played expert from multiplicative expert
weights, feeds learners clipped logistic-gradient costs, and tunes alpha
by projected online gradient descent on the estimated logistic loss.

Randomness is split into one booster stream (expert draw, exploration)
plus one stream per learner, all spawned from a single seed, so runs are
reproducible and learners are independent. Draw order within a round is
fixed: expert draw (adaptive only), exploration coin, exploration shape.

The only channel from ground-truth relevance into a booster is
``RelevanceOracle.reveal`` on the played top-k; boosters never receive the
full relevant set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Feedback, RelevanceOracle
from .errors import ContractError
from .losses import HINGE, logistic_gradient, sigmoid
from .potential import PotentialEvaluator
from .randomize import PairWeightTable, RandomizationScheme, RandomizedPrediction, randomize
from .weaklearn import LearnerFactory, costs_to_weights

ALPHA_RANGE = 2.0
EXP_CAP = 50.0


def sgd_derivative(prefix, h_i, alpha: float, aa, bb, ww) -> float:
    """d/d(alpha) of the estimated logistic loss of ``prefix + alpha * h_i``.

    (aa, bb, ww) are the revealed (relevant, irrelevant) pairs with their
    importance weights; an empty pair set has zero slope everywhere.
    """
    if aa.size == 0:
        return 0.0
    s = prefix + alpha * h_i
    slope = sigmoid(s[bb] - s[aa])
    return float(ww @ (slope * (h_i[bb] - h_i[aa])))


@dataclass
class BoosterRound:
    """Prediction-side state carried from predict() to update().

    ``expert_count`` is the number of learners aggregated by the played
    expert (1..N). ``prefixes[j]`` holds s^j, with prefixes[0] = 0.
    """

    x: np.ndarray
    expert_count: int
    prediction: RandomizedPrediction
    prefixes: np.ndarray
    h: np.ndarray


@dataclass
class RoundRecord:
    expert_count: int
    explored: bool
    feedback: Feedback
    estimated_rank_loss: float


class OnlineBooster:
    """Shared round protocol; subclasses supply expert choice and updates."""

    def __init__(
        self,
        scheme: RandomizationScheme,
        n_learners: int,
        learner_factory: LearnerFactory,
        seed,
        clip_probabilities: bool = True,
    ):
        if n_learners < 1:
            raise ContractError("need at least one weak learner")
        self.scheme = scheme
        self.m = scheme.m
        self.n_learners = n_learners
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        streams = ss.spawn(n_learners + 1)
        self.rng = np.random.default_rng(streams[0])
        self.learners = [
            learner_factory(self.m, np.random.default_rng(s)) for s in streams[1:]
        ]
        self.alpha = np.ones(n_learners)
        # Unit weights are only exact without exploration, so never clip there.
        self.clip_probabilities = clip_probabilities and scheme.rho > 0.0
        self.t = 0

    def _choose_expert(self) -> int:
        raise NotImplementedError

    def _absorb(self, rnd: BoosterRound, table: PairWeightTable, fb: Feedback) -> float:
        raise NotImplementedError

    def predict(self, x) -> BoosterRound:
        xv = np.asarray(x, dtype=np.float64).ravel()
        h = np.stack([ln.predict(xv) for ln in self.learners])
        prefixes = np.zeros((self.n_learners + 1, self.m))
        np.cumsum(self.alpha[:, None] * h, axis=0, out=prefixes[1:])
        j = self._choose_expert()
        pred = randomize(self.scheme, prefixes[j], self.rng)
        return BoosterRound(xv, j, pred, prefixes, h)

    def update(self, rnd: BoosterRound, oracle: RelevanceOracle) -> RoundRecord:
        fb = oracle.reveal(rnd.prediction.final_ranking[: self.scheme.k])
        table = PairWeightTable(
            self.scheme,
            rnd.prediction.base_ranking,
            frozenset(fb.labels),
            clip_probabilities=self.clip_probabilities,
        )
        self.t += 1
        est = self._absorb(rnd, table, fb)
        return RoundRecord(rnd.expert_count, rnd.prediction.explored, fb, est)

    def _weighted_pairs(self, table: PairWeightTable, fb: Feedback):
        pairs = [
            (a, b, w)
            for a in fb.relevant
            for b in fb.irrelevant
            if (w := table.weight(a, b)) > 0.0
        ]
        if not pairs:
            return np.zeros(0, dtype=np.intp), np.zeros(0, dtype=np.intp), np.zeros(0)
        aa = np.array([p[0] for p in pairs], dtype=np.intp)
        bb = np.array([p[1] for p in pairs], dtype=np.intp)
        ww = np.array([p[2] for p in pairs])
        return aa, bb, ww

    def _expert_rank_loss_estimates(self, prefixes, aa, bb, ww) -> np.ndarray:
        """Estimated (unnormalized) rank loss of every expert s^1..s^N."""
        if aa.size == 0:
            return np.zeros(self.n_learners)
        experts = prefixes[1:]
        mistakes = (experts[:, bb] >= experts[:, aa]).astype(np.float64)
        return mistakes @ ww


class PotentialBooster(OnlineBooster):
    """Plays the deepest expert; costs come from hinge-atom potentials.

    Learner i's cost for label l is the estimated potential of the partial
    aggregate s^{i-1} + e_l with horizon N - i: the expected hinge loss if
    label l gets one extra score point now and the remaining learners
    behave like gamma-biased random guessers.
    """

    def __init__(
        self,
        scheme: RandomizationScheme,
        n_learners: int,
        learner_factory: LearnerFactory,
        seed,
        gamma: float = 0.2,
        clip_probabilities: bool = True,
    ):
        super().__init__(scheme, n_learners, learner_factory, seed, clip_probabilities)
        self.gamma = gamma
        self.potentials = PotentialEvaluator(HINGE, self.m, gamma)

    def _choose_expert(self) -> int:
        return self.n_learners

    def _absorb(self, rnd, table, fb) -> float:
        for i in range(self.n_learners):
            costs = self.potentials.estimate_costs(
                self.n_learners - 1 - i, rnd.prefixes[i], table, fb
            )
            self.learners[i].update(rnd.x, costs_to_weights(costs))
        aa, bb, ww = self._weighted_pairs(table, fb)
        return float(
            self._expert_rank_loss_estimates(rnd.prefixes, aa, bb, ww)[
                rnd.expert_count - 1
            ]
        )


class AdaptiveBooster(OnlineBooster):
    """Parameter-light booster: logistic-gradient costs, learned alpha,
    and multiplicative expert selection.

    Per round t (1-based), with learning rate eta_t = 8 rho sqrt(2) / (m^2 sqrt(t)):

    * learner i receives the gradient of the estimated logistic loss at
      s^{i-1}, entries clipped to [-1, 1];
    * alpha^i takes a projected gradient step on the estimated logistic
      loss of s^i, step clipped to [-1, 1], projected onto [-2, 2];
    * expert weights are scaled by exp(-estimated rank loss of s^j)
      (exponent capped) and renormalized; the played expert is drawn
      from them.

    Without exploration eta_t would vanish, so rho = 0 substitutes an
    effective rate of 1.
    """

    def __init__(
        self,
        scheme: RandomizationScheme,
        n_learners: int,
        learner_factory: LearnerFactory,
        seed,
        clip_probabilities: bool = True,
        clip_gradients: bool = True,
    ):
        super().__init__(scheme, n_learners, learner_factory, seed, clip_probabilities)
        self.clip_gradients = clip_gradients
        self.alpha = np.zeros(n_learners)
        self.expert_weights = np.full(n_learners, 1.0 / n_learners)

    def learning_rate(self, t: int) -> float:
        rho = self.scheme.rho if self.scheme.rho > 0.0 else 1.0
        return 8.0 * rho * math.sqrt(2.0) / (self.m * self.m * math.sqrt(t))

    def _choose_expert(self) -> int:
        u = self.rng.random()
        cum = np.cumsum(self.expert_weights)
        return int(np.searchsorted(cum / cum[-1], u, side="right")) + 1

    def _absorb(self, rnd, table, fb) -> float:
        aa, bb, ww = self._weighted_pairs(table, fb)
        pairs = [(int(a), int(b), float(w)) for a, b, w in zip(aa, bb, ww)]
        eta = self.learning_rate(self.t)
        new_alpha = self.alpha.copy()
        for i in range(self.n_learners):
            costs = logistic_gradient(rnd.prefixes[i], pairs)
            if self.clip_gradients:
                costs = np.clip(costs, -1.0, 1.0)
            self.learners[i].update(rnd.x, costs_to_weights(costs))
            d = sgd_derivative(rnd.prefixes[i], rnd.h[i], self.alpha[i], aa, bb, ww)
            if self.clip_gradients:
                d = min(max(d, -1.0), 1.0)
            new_alpha[i] = min(max(self.alpha[i] - eta * d, -ALPHA_RANGE), ALPHA_RANGE)
        est = self._expert_rank_loss_estimates(rnd.prefixes, aa, bb, ww)
        self.expert_weights = self.expert_weights * np.exp(-np.minimum(est, EXP_CAP))
        self.expert_weights /= self.expert_weights.sum()
        self.alpha = new_alpha
        return float(est[rnd.expert_count - 1])


BOOSTERS = {"bbm": PotentialBooster, "adaptive": AdaptiveBooster}
