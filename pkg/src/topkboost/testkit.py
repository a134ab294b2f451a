"""Independent verification oracles.

Everything here recomputes quantities the production modules also compute,
but by a different mechanism — exhaustive enumeration of randomization
outcomes, direct multinomial sampling of potential walks, brute-force
sequence enumeration for the ground-truth potential, and central finite
differences — so agreement between the two paths is evidence rather than
tautology. Brute-force routines carry hard scale guards and refuse larger
inputs instead of silently taking forever.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Feedback, validate_relevance
from .errors import ContractError, ScaleGuardError
from .losses import PairwiseLoss, loss
from .randomize import SINGLE_SWAP, UNIFORM, RandomizationScheme

MAX_UNIFORM_M = 7
MAX_SWAP_CHOICES = 64
MAX_WALK_SEQUENCES = 100_000


@dataclass(frozen=True)
class OutcomeEnumeration:
    """Complete support of a randomization scheme for one base ranking."""

    outcomes: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        total = sum(p for _, p in self.outcomes)
        if abs(total - 1.0) > 1e-12:
            raise ContractError(f"outcome probabilities sum to {total}, not 1")


def enumerate_outcomes(scheme: RandomizationScheme, base) -> OutcomeEnumeration:
    """All final rankings with exact probabilities, aggregated by ranking."""
    base_t = tuple(int(l) for l in base)
    m, k, rho = scheme.m, scheme.k, scheme.rho
    probs: dict[tuple[int, ...], float] = {base_t: 1.0 - rho}
    if rho > 0.0:
        if scheme.kind == UNIFORM:
            if m > MAX_UNIFORM_M:
                raise ScaleGuardError(f"uniform enumeration limited to m <= {MAX_UNIFORM_M}")
            share = rho / float(math.factorial(m))
            for perm in itertools.permutations(range(m)):
                probs[perm] = probs.get(perm, 0.0) + share
        else:
            n_choices = k * (m - k)
            if n_choices > MAX_SWAP_CHOICES:
                raise ScaleGuardError(
                    f"swap enumeration limited to k(m-k) <= {MAX_SWAP_CHOICES}"
                )
            share = rho / float(n_choices**2)
            for i1 in range(k):
                for j1 in range(k, m):
                    mid = list(base_t)
                    mid[i1], mid[j1] = mid[j1], mid[i1]
                    for i2 in range(k):
                        for j2 in range(k, m):
                            fin = list(mid)
                            fin[i2], fin[j2] = fin[j2], fin[i2]
                            key = tuple(fin)
                            probs[key] = probs.get(key, 0.0) + share
    return OutcomeEnumeration(tuple(sorted(probs.items())))


def expected_estimator(enumeration: OutcomeEnumeration, estimator: Callable):
    """Probability-weighted average of ``estimator(final_ranking)``."""
    total = None
    for ranking, p in enumeration.outcomes:
        val = np.asarray(estimator(ranking), dtype=np.float64) * p
        total = val if total is None else total + val
    if total is None:
        raise ContractError("empty enumeration")
    return float(total) if total.ndim == 0 else total


def reveal_outcome(ranking, k: int, relevant) -> Feedback:
    """Feedback a booster would receive if this ranking were played."""
    rel = frozenset(int(l) for l in relevant)
    return Feedback(tuple((int(l), int(l) in rel) for l in list(ranking)[:k]))


def biased_label_probs(m: int, relevant, gamma: float) -> np.ndarray:
    """Near-uniform label distribution placing gamma extra mass on each
    relevant label: (1 - |R| gamma)/m everywhere plus gamma on R."""
    rel = validate_relevance(relevant, m)
    base = (1.0 - len(rel) * gamma) / m
    if base < 0.0:
        raise ContractError("gamma too large: |R| * gamma must not exceed 1")
    probs = np.full(m, base)
    for l in rel:
        probs[l] += gamma
    return probs


def mc_pair_potential(
    pl: PairwiseLoss,
    m: int,
    gamma: float,
    n: int,
    s,
    a: int,
    b: int,
    n_samples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo estimate (mean, standard error) of the pair potential.

    Samples the full m-dimensional walk with multinomial draws from the
    singleton-biased distribution; no difference-walk collapse involved.
    """
    probs = biased_label_probs(m, {a}, gamma)
    counts = rng.multinomial(n, probs, size=n_samples)
    arr = np.asarray(s, dtype=np.float64)
    vals = pl.atom(arr[a] + counts[:, a], arr[b] + counts[:, b])
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / np.sqrt(n_samples))


def ground_truth_potential(
    pl: PairwiseLoss,
    s,
    relevant,
    gamma: float,
    n: int,
) -> float:
    """Exact expectation of the full loss after n draws from the
    R-biased label distribution, by enumerating all m^n draw sequences.

    This is the quantity the computable per-pair surrogate upper-bounds.
    """
    arr = np.asarray(s, dtype=np.float64)
    m = arr.size
    if m**n > MAX_WALK_SEQUENCES:
        raise ScaleGuardError(
            f"sequence enumeration limited to m^n <= {MAX_WALK_SEQUENCES}"
        )
    probs = biased_label_probs(m, relevant, gamma)
    total = 0.0
    for seq in itertools.product(range(m), repeat=n):
        walk = arr.copy()
        p = 1.0
        for l in seq:
            walk[l] += 1.0
            p *= probs[l]
        total += p * loss(pl, walk, relevant)
    return total


def finite_diff(fn: Callable[[float], float], x: float, h: float = 1e-6) -> float:
    """Central difference (fn(x+h) - fn(x-h)) / 2h."""
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def finite_diff_vector(fn: Callable[[np.ndarray], float], x, h: float = 1e-6) -> np.ndarray:
    """Componentwise central differences of a scalar field."""
    arr = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(arr)
    for i in range(arr.size):
        up = arr.copy()
        dn = arr.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (fn(up) - fn(dn)) / (2.0 * h)
    return grad
