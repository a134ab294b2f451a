"""Label-space primitives: score vectors, rankings, top-k sets, relevance feedback.

Labels are 0-based integers ``0..m-1`` everywhere inside the package; any
serialized or user-facing output converts to 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ContractError, InformationBarrierError


def as_scores(s, m: int | None = None) -> np.ndarray:
    """Validate and return a score vector as a float64 array."""
    arr = np.asarray(s, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ContractError("score vector must be a non-empty 1-d array")
    if m is not None and arr.size != m:
        raise ContractError(f"score vector has length {arr.size}, expected {m}")
    if not np.all(np.isfinite(arr)):
        raise ContractError("score vector entries must be finite")
    return arr


def rank_of_scores(s) -> np.ndarray:
    """Ranking induced by a score vector: labels by descending score.

    Ties are broken by preferring the smaller label, so the mapping from
    scores to rankings is deterministic. Tie detection is exact float
    equality, no epsilon.
    """
    arr = as_scores(s)
    # lexsort uses the last key as primary: ascending -score, then label.
    return np.lexsort((np.arange(arr.size), -arr))


def top_k(ranking: np.ndarray, k: int) -> frozenset[int]:
    """The unordered set of the k highest-ranked labels."""
    m = len(ranking)
    if not 1 <= k <= m:
        raise ContractError(f"k={k} out of range [1, {m}]")
    return frozenset(int(l) for l in ranking[:k])


def validate_relevance(members: Iterable[int], m: int) -> frozenset[int]:
    """Check a relevant-label set against the label space; may be empty."""
    rel = frozenset(int(l) for l in members)
    if any(l < 0 or l >= m for l in rel):
        raise ContractError(f"relevant labels must lie in [0, {m})")
    return rel


@dataclass(frozen=True)
class Feedback:
    """Relevance bits for the labels in the revealed top-k, in ranking order."""

    revealed: tuple[tuple[int, bool], ...]

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(l for l, _ in self.revealed)

    @property
    def relevant(self) -> frozenset[int]:
        return frozenset(l for l, bit in self.revealed if bit)

    @property
    def irrelevant(self) -> frozenset[int]:
        return frozenset(l for l, bit in self.revealed if not bit)

    def __post_init__(self):
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise ContractError("feedback labels must be distinct")


class RelevanceOracle:
    """Single-use gatekeeper around the ground-truth relevant set of one round.

    The booster may ask for relevance bits exactly once, and every query is
    recorded so a harness can audit that nothing outside the revealed top-k
    leaked through.
    """

    def __init__(self, relevant: Iterable[int], m: int):
        self._relevant = validate_relevance(relevant, m)
        self._m = m
        self.queried: frozenset[int] | None = None

    def reveal(self, labels: Iterable[int]) -> Feedback:
        labels = [int(l) for l in labels]
        if self.queried is not None:
            raise InformationBarrierError("relevance already revealed this round")
        if any(l < 0 or l >= self._m for l in labels):
            raise ContractError("queried label out of range")
        self.queried = frozenset(labels)
        if len(self.queried) != len(labels):
            raise ContractError("queried labels must be distinct")
        return Feedback(tuple((l, l in self._relevant) for l in labels))
