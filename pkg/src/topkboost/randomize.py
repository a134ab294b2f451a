"""Randomized ranking predictions and exact importance weights for top-k feedback.

Two exploration schemes are provided. ``uniform``: with probability rho the
played ranking is a fresh uniformly random permutation. ``single_swap``: with
probability rho, two successive swaps each exchange a uniformly chosen
top-k label with a uniformly chosen non-top-k label.

Revealing relevance only for the played top-k still permits unbiased
estimation of any pairwise-decomposable quantity, because every unordered
label pair has positive probability of landing fully inside the top-k. The
estimator divides each observed pair term by that exact inclusion
probability; this module computes those probabilities in closed form
(uniform) or by exhaustive enumeration of swap sequences (single_swap).

PRNG draw order inside one round is fixed for reproducibility:
(1) the exploration coin, (2) the permutation or the four swap positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import Feedback, as_scores, rank_of_scores, top_k
from .errors import ContractError

# Variance-control clamp applied to inclusion probabilities when enabled.
PROB_CLIP_LO = 0.005
PROB_CLIP_HI = 0.995

UNIFORM = "uniform"
SINGLE_SWAP = "single_swap"


@dataclass(frozen=True)
class RandomizationScheme:
    """Exploration configuration: scheme kind, exploration rate, k, and m.

    rho == 0 disables exploration entirely and is only admitted with k == m
    (otherwise some pairs would never be observable and the estimator's
    denominators would vanish).
    """

    kind: str
    k: int
    m: int
    rho: float

    def __post_init__(self):
        if self.kind not in (UNIFORM, SINGLE_SWAP):
            raise ContractError(f"unknown randomization kind {self.kind!r}")
        if not 0.0 <= self.rho < 1.0:
            raise ContractError("exploration rate must lie in [0, 1)")
        if self.rho == 0.0 and self.k != self.m:
            raise ContractError("rho=0 (no exploration) requires k == m")
        if self.kind == UNIFORM:
            if not 2 <= self.k <= self.m:
                raise ContractError("uniform scheme requires 2 <= k <= m")
        else:
            if not 3 <= self.k <= self.m:
                raise ContractError("single_swap scheme requires 3 <= k <= m")
            if self.rho > 0 and self.k >= self.m:
                raise ContractError("single_swap exploration requires k < m")
            if self.rho >= 0.25:
                raise ContractError("single_swap scheme requires rho < 0.25")


@dataclass(frozen=True)
class RandomizedPrediction:
    """Outcome of one exploration draw.

    ``perturbed_scores`` carry the same score multiset rearranged so that
    the played ranking is consistent with them; without exploration they
    are the input scores unchanged.
    """

    base_ranking: np.ndarray
    final_ranking: np.ndarray
    explored: bool
    perturbed_scores: np.ndarray


def randomize(scheme: RandomizationScheme, s, rng: np.random.Generator) -> RandomizedPrediction:
    """Draw the played ranking (and consistent scores) for one round."""
    arr = as_scores(s, scheme.m)
    base = rank_of_scores(arr)
    if rng.random() >= scheme.rho:
        return RandomizedPrediction(base, base, False, arr)
    if scheme.kind == UNIFORM:
        final = rng.permutation(scheme.m)
        pert = np.empty_like(arr)
        # Highest sorted score goes to the label now ranked first, etc.
        pert[final] = np.sort(arr)[::-1]
        return RandomizedPrediction(base, final, True, pert)
    final = base.copy()
    pert = arr.copy()
    for _ in range(2):
        i = int(rng.integers(scheme.k))
        j = scheme.k + int(rng.integers(scheme.m - scheme.k))
        la, lb = int(final[i]), int(final[j])
        final[i], final[j] = lb, la
        pert[la], pert[lb] = pert[lb], pert[la]
    return RandomizedPrediction(base, final, True, pert)


@lru_cache(maxsize=None)
def _swap_explore_prob(m: int, k: int, a_in: bool, b_in: bool) -> float:
    """P[both marked labels end in the top-k | exploring] for single_swap.

    Exact by enumeration of all (k(m-k))^2 equally likely two-round swap
    sequences; only the positions of the two marked labels matter. Cached
    per (m, k, membership pattern).
    """
    pa = 0 if a_in else k
    pb = (1 if a_in else 0) if b_in else (k if a_in else k + 1)
    count = 0
    for i1 in range(k):
        for j1 in range(k, m):
            a1 = j1 if pa == i1 else (i1 if pa == j1 else pa)
            b1 = j1 if pb == i1 else (i1 if pb == j1 else pb)
            for i2 in range(k):
                for j2 in range(k, m):
                    a2 = j2 if a1 == i2 else (i2 if a1 == j2 else a1)
                    b2 = j2 if b1 == i2 else (i2 if b1 == j2 else b1)
                    if a2 < k and b2 < k:
                        count += 1
    return count / (k * (m - k)) ** 2


def pair_inclusion_prob(
    scheme: RandomizationScheme,
    base_ranking: np.ndarray,
    a: int,
    b: int,
    base_top: frozenset[int] | None = None,
) -> float:
    """Exact P[a and b both land in the played top-k], given the base ranking.

    Both schemes keep the base ranking with probability 1-rho; the
    exploration branch contributes the scheme-specific term.
    """
    if a == b:
        raise ContractError("pair must have distinct labels")
    if base_top is None:
        base_top = top_k(base_ranking, scheme.k)
    a_in, b_in = a in base_top, b in base_top
    keep = (1.0 - scheme.rho) if (a_in and b_in) else 0.0
    if scheme.rho == 0.0:
        return keep
    if scheme.kind == UNIFORM:
        explore = scheme.k * (scheme.k - 1) / (scheme.m * (scheme.m - 1))
    else:
        if not a_in and not b_in and scheme.m - scheme.k < 2:
            raise ContractError("two labels cannot both be outside a size-1 complement")
        explore = _swap_explore_prob(scheme.m, scheme.k, a_in, b_in)
    return keep + scheme.rho * explore


class PairWeightTable:
    """Per-round importance weights 1(a,b revealed)/P[a,b in top-k].

    Weights are zero for any pair not fully inside the revealed top-k.
    With ``clip_probabilities`` the inclusion probability is clamped to
    [0.005, 0.995] before inversion (variance control for experiments;
    disable for exactness tests).
    """

    def __init__(
        self,
        scheme: RandomizationScheme,
        base_ranking: np.ndarray,
        revealed: frozenset[int],
        clip_probabilities: bool = False,
    ):
        if len(revealed) != scheme.k:
            raise ContractError("revealed set must have exactly k labels")
        self.scheme = scheme
        self.base_ranking = base_ranking
        self.revealed = revealed
        self.clip_probabilities = clip_probabilities
        self._base_top = top_k(base_ranking, scheme.k)
        self._probs: dict[tuple[int, int], float] = {}

    def inclusion_prob(self, a: int, b: int) -> float:
        """Unclipped exact inclusion probability for an unordered pair."""
        key = (a, b) if a < b else (b, a)
        p = self._probs.get(key)
        if p is None:
            p = pair_inclusion_prob(self.scheme, self.base_ranking, a, b, self._base_top)
            self._probs[key] = p
        return p

    def weight(self, a: int, b: int) -> float:
        if a not in self.revealed or b not in self.revealed:
            return 0.0
        p = self.inclusion_prob(a, b)
        if self.clip_probabilities:
            p = min(max(p, PROB_CLIP_LO), PROB_CLIP_HI)
        if p <= 0.0:
            raise ContractError("pair has zero inclusion probability")
        return 1.0 / p


def estimate_pairwise_sum(
    pair_value: Callable[[int, int], float],
    table: PairWeightTable,
    feedback: Feedback,
) -> float:
    """Importance-weighted sum of pair_value over revealed (relevant, irrelevant) pairs.

    ``pair_value`` is only ever evaluated on revealed pairs, keeping the
    information barrier intact. Unbiased for the full pairwise sum when
    probability clipping is off.
    """
    total = 0.0
    for a in feedback.relevant:
        for b in feedback.irrelevant:
            total += table.weight(a, b) * pair_value(a, b)
    return total


def estimate_loss(pl, s, table: PairWeightTable, feedback: Feedback) -> float:
    """Unbiased estimate of loss(pl, s, R) from top-k feedback."""
    arr = as_scores(s)
    return estimate_pairwise_sum(
        lambda a, b: float(pl.atom(arr[a], arr[b])), table, feedback
    )
