"""Pairwise-decomposable multilabel ranking losses and their gradients.

Each loss is a sum over (relevant, irrelevant) label pairs of an atom
``f(x, y)`` where ``x`` is the relevant label's score and ``y`` the
irrelevant one's. All three shipped atoms depend only on the difference
``y - x``, which downstream code exploits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import as_scores, validate_relevance
from .errors import ContractError


def sigmoid(z):
    """Numerically stable logistic function, vectorized."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def softplus(z):
    """log(1 + e^z) without overflow: max(z, 0) + log1p(e^-|z|)."""
    z = np.asarray(z, dtype=np.float64)
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _rank_atom(x, y):
    # A tie counts as a full mistake.
    return np.greater_equal(y, x).astype(np.float64)


def _hinge_atom(x, y):
    return np.maximum(0.0, np.asarray(y, dtype=np.float64) - x + 1.0)


def _logistic_atom(x, y):
    return softplus(np.asarray(y, dtype=np.float64) - x)


@dataclass(frozen=True)
class PairwiseLoss:
    """A pairwise loss atom with the flags the boosters care about.

    ``convex`` marks atoms usable for potentials and gradient steps; the
    step-count atom is evaluation/Hedge-only. All atoms are proper
    (non-increasing in x, non-decreasing in y) and shift-invariant
    (f(x+c, y+c) == f(x, y)).
    """

    kind: str
    convex: bool
    atom: Callable = field(repr=False)


RANK = PairwiseLoss("rank", convex=False, atom=_rank_atom)
HINGE = PairwiseLoss("hinge", convex=True, atom=_hinge_atom)
LOGISTIC = PairwiseLoss("logistic", convex=True, atom=_logistic_atom)

ATOMS = {"rank": RANK, "hinge": HINGE, "logistic": LOGISTIC}


def loss(pl: PairwiseLoss, s, relevant: Iterable[int]) -> float:
    """Full-information loss: sum of the atom over all (relevant, irrelevant) pairs."""
    arr = as_scores(s)
    rel = sorted(validate_relevance(relevant, arr.size))
    irr = sorted(set(range(arr.size)) - set(rel))
    if not rel or not irr:
        return 0.0
    return float(np.sum(pl.atom(arr[rel][:, None], arr[irr][None, :])))


def rank_loss(s, relevant: Iterable[int]) -> float:
    return loss(RANK, s, relevant)


def weighted_rank_loss(s, relevant: Iterable[int]) -> float:
    """Rank loss normalized by |R|(m - |R|); 0 on degenerate relevant sets."""
    arr = as_scores(s)
    rel = validate_relevance(relevant, arr.size)
    r = len(rel)
    if r == 0 or r == arr.size:
        return 0.0
    return rank_loss(arr, rel) / (r * (arr.size - r))


def ranking_weighted_rank_loss(ranking, relevant: Iterable[int]) -> float:
    """Weighted rank loss of a strict ranking (no score ties possible).

    Counts (relevant, irrelevant) pairs the ranking orders wrongly, over
    |R|(m - |R|); this scores the ranking actually played, independent of
    the scores that produced it.
    """
    rk = np.asarray(ranking, dtype=np.intp)
    m = rk.size
    rel = validate_relevance(relevant, m)
    r = len(rel)
    if r == 0 or r == m:
        return 0.0
    pos = np.empty(m, dtype=np.intp)
    pos[rk] = np.arange(m)
    rel_pos = pos[np.asarray(sorted(rel))]
    irr_pos = pos[np.asarray(sorted(set(range(m)) - rel))]
    mistakes = np.sum(irr_pos[None, :] < rel_pos[:, None])
    return float(mistakes) / (r * (m - r))


def logistic_gradient(s, pairs: Sequence[tuple[int, int, float]]) -> np.ndarray:
    """Gradient of a weighted sum of logistic atoms over explicit pairs.

    ``pairs`` holds (relevant a, irrelevant b, weight w >= 0) triples. Each
    contributes +w*sigmoid(s[b]-s[a]) to entry b and the negative to entry a.
    """
    arr = as_scores(s)
    g = np.zeros_like(arr)
    for a, b, w in pairs:
        if a == b:
            raise ContractError("pair must have distinct labels")
        if w < 0:
            raise ContractError("pair weights must be non-negative")
        sig = w * sigmoid(arr[b] - arr[a])
        g[b] += sig
        g[a] -= sig
    return g
