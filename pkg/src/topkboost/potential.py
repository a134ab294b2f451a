"""Exact potential functions for boost-by-majority style cost computation.

The pair potential lam^{a,b,n}(s) is the expected pairwise loss after n
additional score increments drawn from a biased label distribution that
favors the relevant label a: a receives probability p = (1-gamma)/m + gamma,
every other label q = (1-gamma)/m. Because the supported loss atoms depend
only on the score difference s[b] - s[a], the m-dimensional walk collapses
to a one-dimensional difference walk with steps

    -1 w.p. p (a drawn),  +1 w.p. q (b drawn),  0 w.p. r = (m-2)(1-gamma)/m,

whose length-n step distribution W_n follows the Pascal-style recurrence

    W_n[t] = p * W_{n-1}[t+1] + q * W_{n-1}[t-1] + r * W_{n-1}[t].

All evaluations here are exact up to float arithmetic: no sampling, no
log-space factorial approximations.

The full potential Phi^n(s) sums the pair potential over relevant x
irrelevant label pairs; the estimated variant reweights the revealed pairs
by their inverse inclusion probabilities and is unbiased for Phi^n(s).
"""

from __future__ import annotations

import numpy as np

from .core import Feedback, as_scores, validate_relevance
from .errors import ContractError
from .losses import PairwiseLoss
from .randomize import PairWeightTable


def biased_step_probs(m: int, gamma: float) -> tuple[float, float, float]:
    """(p, q, r): favored-label, other-single-label, and no-move probabilities."""
    if m < 2:
        raise ContractError("need at least two labels")
    if not 0.0 < gamma < 1.0:
        raise ContractError("gamma must lie in (0, 1)")
    q = (1.0 - gamma) / m
    p = q + gamma
    r = (m - 2) * q
    return p, q, r


class PotentialEvaluator:
    """Evaluates pair potentials, full potentials, and potential-based costs.

    Weight vectors W_n are built once per horizon n and cached; each new
    horizon costs one vectorized recurrence step on an array of length
    2n+1, so evaluating horizons 0..N costs O(N^2) total.
    """

    def __init__(self, pl: PairwiseLoss, m: int, gamma: float):
        if not pl.convex:
            raise ContractError(f"potentials need a convex atom, not {pl.kind!r}")
        self.pl = pl
        self.m = m
        self.gamma = gamma
        self.p, self.q, self.r = biased_step_probs(m, gamma)
        self._weights: list[np.ndarray] = [np.ones(1)]

    def step_weights(self, n: int) -> np.ndarray:
        """Distribution of the difference walk after n steps.

        Returns an array of length 2n+1; index i holds P[walk = i - n].
        """
        if n < 0:
            raise ContractError("horizon must be nonnegative")
        while len(self._weights) <= n:
            prev = self._weights[-1]
            nxt = np.zeros(prev.size + 2)
            nxt[:-2] += self.p * prev
            nxt[2:] += self.q * prev
            nxt[1:-1] += self.r * prev
            self._weights.append(nxt)
        return self._weights[n]

    def pair_potential(self, n: int, diffs):
        """lam for score difference(s) d = s[b] - s[a]; vectorized over d."""
        w = self.step_weights(n)
        d = np.asarray(diffs, dtype=np.float64)
        t = np.arange(-n, n + 1, dtype=np.float64)
        vals = self.pl.atom(0.0, d[..., None] + t) @ w
        return vals if d.ndim else float(vals)

    def _pair_diffs(self, s, relevant):
        arr = as_scores(s, self.m)
        rel = validate_relevance(relevant, self.m)
        irr = sorted(set(range(self.m)) - rel)
        if not rel or not irr:
            return arr, sorted(rel), irr, np.zeros((0,))
        d = arr[np.asarray(irr)][None, :] - arr[np.asarray(sorted(rel))][:, None]
        return arr, sorted(rel), irr, d

    def potential(self, n: int, s, relevant) -> float:
        """Phi^n(s): exact sum of pair potentials over relevant x irrelevant."""
        _, _, _, d = self._pair_diffs(s, relevant)
        if d.size == 0:
            return 0.0
        return float(np.sum(self.pair_potential(n, d)))

    def full_costs(self, n: int, s, relevant) -> np.ndarray:
        """Exact cost vector c[l] = Phi^n(s + e_l) under full information."""
        arr, rel, irr, d = self._pair_diffs(s, relevant)
        costs = np.zeros(self.m)
        if d.size == 0:
            return costs
        base = self.pair_potential(n, d)
        total = float(np.sum(base))
        costs[:] = total
        # Raising a relevant score shifts its row of differences down by 1;
        # raising an irrelevant score shifts its column up by 1.
        down = self.pair_potential(n, d - 1.0)
        up = self.pair_potential(n, d + 1.0)
        costs[np.asarray(rel)] += np.sum(down - base, axis=1)
        costs[np.asarray(irr)] += np.sum(up - base, axis=0)
        return costs

    def _revealed_terms(self, s, table: PairWeightTable, feedback: Feedback):
        arr = as_scores(s, self.m)
        pairs = [
            (a, b, table.weight(a, b))
            for a in feedback.relevant
            for b in feedback.irrelevant
        ]
        pairs = [(a, b, w) for a, b, w in pairs if w > 0.0]
        if not pairs:
            return arr, [], [], np.zeros(0), np.zeros(0)
        aa = np.array([p[0] for p in pairs])
        bb = np.array([p[1] for p in pairs])
        ww = np.array([p[2] for p in pairs])
        return arr, aa, bb, ww, arr[bb] - arr[aa]

    def estimate_potential(self, n: int, s, table: PairWeightTable, feedback: Feedback) -> float:
        """Importance-weighted potential estimate; unbiased when clipping is off."""
        _, aa, bb, ww, d = self._revealed_terms(s, table, feedback)
        if len(aa) == 0:
            return 0.0
        return float(ww @ self.pair_potential(n, d))

    def estimate_costs(self, n: int, s, table: PairWeightTable, feedback: Feedback) -> np.ndarray:
        """Estimated cost vector c[l] = estimated Phi^n(s + e_l).

        Three batched pair-potential evaluations (base, row-shift, column-
        shift) plus scatter-adds; avoids m separate potential evaluations.
        """
        _, aa, bb, ww, d = self._revealed_terms(s, table, feedback)
        costs = np.zeros(self.m)
        if len(aa) == 0:
            return costs
        base = self.pair_potential(n, d)
        costs[:] = float(ww @ base)
        down = ww * (self.pair_potential(n, d - 1.0) - base)
        up = ww * (self.pair_potential(n, d + 1.0) - base)
        np.add.at(costs, aa, down)
        np.add.at(costs, bb, up)
        return costs


def hinge_potential_zero_upper_bound(n: int, gamma: float, m: int) -> float:
    """Closed-form upper bound on Phi^n(0) for the hinge-atom potential.

    Each of at most m^2/4 pairs contributes at most (n+1)exp(-gamma^2 n / 2).
    """
    return (n + 1) * (m * m / 4.0) * float(np.exp(-(gamma**2) * n / 2.0))
