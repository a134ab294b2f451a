"""Booster round protocol: expert play, cost construction, weight updates,
and the feedback information barrier."""

import math

import numpy as np
import pytest
from scipy import stats

from topkboost.boosters import (
    ALPHA_RANGE,
    BOOSTERS,
    AdaptiveBooster,
    PotentialBooster,
    sgd_derivative,
)
from topkboost.core import RelevanceOracle, top_k
from topkboost.errors import ContractError
from topkboost.losses import LOGISTIC, logistic_gradient
from topkboost.randomize import SINGLE_SWAP, UNIFORM, RandomizationScheme
from topkboost.testkit import finite_diff
from topkboost.weaklearn import costs_to_weights, stump_pool_factory

from helpers import FixedLearner, fixed_factory, jitter_factory, synth_pair

HINGE_EV_CACHE: dict = {}


def full_scheme(m):
    return RandomizationScheme(UNIFORM, m, m, 0.0)


def topk_scheme(k=3, m=6, rho=0.2, kind=UNIFORM):
    return RandomizationScheme(kind, k, m, rho)


def run_rounds(booster, rng, n_rounds, m, dim=4):
    """Drive a booster over random rounds; returns (rounds, records)."""
    rounds, records = [], []
    for _ in range(n_rounds):
        x = rng.normal(size=dim)
        r = int(rng.integers(1, m))
        relevant = frozenset(int(l) for l in rng.choice(m, size=r, replace=False))
        rnd = booster.predict(x)
        rec = booster.update(rnd, RelevanceOracle(relevant, m))
        rounds.append((rnd, relevant))
        records.append(rec)
    return rounds, records


class TestConstruction:
    def test_needs_a_learner(self):
        with pytest.raises(ContractError):
            PotentialBooster(full_scheme(4), 0, fixed_factory(), seed=0)

    def test_registry(self):
        assert BOOSTERS == {"bbm": PotentialBooster, "adaptive": AdaptiveBooster}

    def test_bbm_alpha_is_all_ones(self):
        b = PotentialBooster(full_scheme(4), 5, fixed_factory(), seed=0)
        assert b.alpha.tolist() == [1.0] * 5

    def test_adaptive_alpha_starts_at_zero(self):
        b = AdaptiveBooster(full_scheme(4), 5, fixed_factory(), seed=0)
        assert b.alpha.tolist() == [0.0] * 5
        assert b.expert_weights.tolist() == [0.2] * 5

    def test_learner_streams_are_independent(self):
        b = PotentialBooster(full_scheme(3), 4, stump_pool_factory(), seed=1)
        for ln in b.learners:
            ln.predict(np.zeros(200))
        subsets = {tuple(ln.feat_idx.tolist()) for ln in b.learners}
        assert len(subsets) > 1


class TestLearningRate:
    def test_frozen_first_round_value(self):
        b = AdaptiveBooster(topk_scheme(k=3, m=6, rho=0.02), 2, fixed_factory(), seed=0)
        assert b.learning_rate(1) == pytest.approx(8 * 0.02 * math.sqrt(2) / 36, abs=1e-12)
        assert b.learning_rate(1) == pytest.approx(0.0062854, abs=1e-7)

    def test_inverse_sqrt_decay(self):
        b = AdaptiveBooster(topk_scheme(), 2, fixed_factory(), seed=0)
        assert b.learning_rate(9) == pytest.approx(b.learning_rate(1) / 3.0)

    def test_full_information_rate_substitutes_rho_one(self):
        b = AdaptiveBooster(full_scheme(6), 2, fixed_factory(), seed=0)
        assert b.learning_rate(1) == pytest.approx(8 * math.sqrt(2) / 36)


class TestExpertChoice:
    def test_bbm_always_plays_the_deepest_expert(self, rng):
        b = PotentialBooster(topk_scheme(), 7, jitter_factory(), seed=3)
        _, records = run_rounds(b, rng, 40, m=6)
        assert all(rec.expert_count == 7 for rec in records)
        assert b.alpha.tolist() == [1.0] * 7

    def test_adaptive_draw_frequencies_follow_weights(self):
        b = AdaptiveBooster(topk_scheme(), 3, fixed_factory(), seed=11)
        b.expert_weights = np.array([0.5, 0.3, 0.2])
        n = 30_000
        draws = np.array([b._choose_expert() for _ in range(n)])
        counts = np.bincount(draws, minlength=4)[1:]
        result = stats.chisquare(counts, f_exp=np.array([0.5, 0.3, 0.2]) * n)
        assert result.pvalue > 0.001

    def test_bbm_expert_is_plain_sum_of_predictions(self, rng):
        dists = [np.array([0.7, 0.2, 0.1]), np.array([0.1, 0.8, 0.1]), np.array([0.3, 0.3, 0.4])]
        b = PotentialBooster(full_scheme(3), 3, fixed_factory(dists), seed=0)
        rnd = b.predict(rng.normal(size=2))
        assert np.allclose(rnd.prefixes[3], sum(dists), atol=1e-15)
        assert np.allclose(rnd.prefixes[0], 0.0)


class TestSgdDerivative:
    def test_matches_finite_differences(self, rng):
        for _ in range(30):
            m = int(rng.integers(3, 7))
            prefix = rng.normal(size=m) * 2
            h = rng.dirichlet(np.ones(m))
            alpha = float(rng.uniform(-2, 2))
            n_pairs = int(rng.integers(1, 5))
            aa = rng.integers(m, size=n_pairs)
            bb = (aa + 1 + rng.integers(m - 1, size=n_pairs)) % m
            ww = rng.uniform(0.5, 3.0, size=n_pairs)

            def objective(a_val):
                s = prefix + a_val * h
                return sum(
                    w * float(LOGISTIC.atom(s[i], s[j]))
                    for i, j, w in zip(aa, bb, ww)
                )

            numeric = finite_diff(objective, alpha)
            analytic = sgd_derivative(prefix, h, alpha, aa, bb, ww)
            assert analytic == pytest.approx(numeric, rel=1e-6, abs=1e-9)

    def test_empty_pairs_give_zero(self):
        empty = np.zeros(0, dtype=np.intp)
        assert sgd_derivative(np.zeros(3), np.ones(3) / 3, 0.5, empty, empty, np.zeros(0)) == 0.0


class TestAlphaProjection:
    def test_alpha_hits_the_boundary_exactly(self):
        # One learner always favoring the irrelevant label: the SGD drive is
        # consistently negative and the clamp must stop it at exactly -2.
        scheme = RandomizationScheme(UNIFORM, 2, 2, 0.9)
        b = AdaptiveBooster(
            scheme, 1, fixed_factory(np.array([0.9, 0.1])), seed=0,
            clip_probabilities=False,
        )
        x = np.zeros(2)
        for _ in range(8):
            rnd = b.predict(x)
            b.update(rnd, RelevanceOracle({1}, 2))
        assert b.alpha[0] == -ALPHA_RANGE

    def test_alpha_always_feasible(self, rng):
        b = AdaptiveBooster(topk_scheme(rho=0.24), 4, jitter_factory(), seed=5)
        for _ in range(60):
            x = rng.normal(size=3)
            relevant = frozenset(int(l) for l in rng.choice(6, size=2, replace=False))
            b.update(b.predict(x), RelevanceOracle(relevant, 6))
            assert np.all(np.abs(b.alpha) <= ALPHA_RANGE)


class TestDegenerateRounds:
    def test_no_mixed_pair_is_a_no_op(self):
        # All labels relevant: no (relevant, irrelevant) pair exists, so
        # costs, alpha, and expert weights must not move.
        m = 4
        for name in ("bbm", "adaptive"):
            b = BOOSTERS[name](full_scheme(m), 3, fixed_factory(), seed=2)
            alpha_before = b.alpha.copy()
            nu_before = getattr(b, "expert_weights", None)
            nu_before = None if nu_before is None else nu_before.copy()
            rnd = b.predict(np.zeros(2))
            rec = b.update(rnd, RelevanceOracle(range(m), m))
            assert rec.estimated_rank_loss == 0.0
            assert b.alpha.tolist() == alpha_before.tolist()
            if nu_before is not None:
                assert b.expert_weights.tolist() == nu_before.tolist()
            for ln in b.learners:
                assert all(np.all(w == 0.0) for _, w in ln.updates)

    def test_hedge_survives_huge_estimates(self, rng):
        # rho = 0.01 at m=7, k=2 gives importance weights in the hundreds;
        # expert weights must stay positive, finite, and normalized.
        scheme = RandomizationScheme(UNIFORM, 2, 7, 0.01)
        b = AdaptiveBooster(scheme, 3, jitter_factory(), seed=9, clip_probabilities=False)
        for _ in range(300):
            x = rng.normal(size=3)
            relevant = frozenset(int(l) for l in rng.choice(7, size=3, replace=False))
            b.update(b.predict(x), RelevanceOracle(relevant, 7))
        assert np.all(b.expert_weights > 0.0)
        assert np.all(np.isfinite(b.expert_weights))
        assert float(b.expert_weights.sum()) == pytest.approx(1.0, abs=1e-9)


class TestInformationBarrier:
    @pytest.mark.parametrize("kind", [UNIFORM, SINGLE_SWAP])
    @pytest.mark.parametrize("name", ["bbm", "adaptive"])
    def test_queries_equal_played_topk(self, rng, name, kind):
        m, k = 6, 3
        b = BOOSTERS[name](topk_scheme(k=k, m=m, rho=0.2, kind=kind), 3, jitter_factory(), seed=4)
        for _ in range(250):
            x = rng.normal(size=3)
            r = int(rng.integers(0, m + 1))
            relevant = frozenset(int(l) for l in rng.choice(m, size=r, replace=False))
            oracle = RelevanceOracle(relevant, m)
            rnd = b.predict(x)
            rec = b.update(rnd, oracle)
            played = rnd.prediction.final_ranking[:k]
            assert oracle.queried == set(played.tolist())
            assert oracle.queried == top_k(rnd.prediction.final_ranking, k)
            assert rec.feedback.labels == tuple(played.tolist())

    def test_feedback_bits_match_ground_truth(self, rng):
        b = PotentialBooster(topk_scheme(), 2, jitter_factory(), seed=8)
        for _ in range(50):
            relevant = frozenset(int(l) for l in rng.choice(6, size=2, replace=False))
            rec = b.update(b.predict(rng.normal(size=3)), RelevanceOracle(relevant, 6))
            for label, bit in rec.feedback.revealed:
                assert bit == (label in relevant)


class TestFullInformationReduction:
    def test_bbm_costs_equal_potential_costs(self, rng):
        m, n_learners = 5, 4
        b = PotentialBooster(
            full_scheme(m), n_learners, jitter_factory(), seed=6, gamma=0.2
        )
        ev = b.potentials
        rounds, _ = run_rounds(b, rng, 15, m=m)
        per_learner = [ln.updates for ln in b.learners]
        for t, (rnd, relevant) in enumerate(rounds):
            for i in range(n_learners):
                _, got_w = per_learner[i][t]
                want = costs_to_weights(
                    ev.full_costs(n_learners - 1 - i, rnd.prefixes[i], relevant)
                )
                assert np.max(np.abs(got_w - want)) < 1e-12

    def test_adaptive_costs_equal_clipped_full_gradients(self, rng):
        m, n_learners = 5, 3
        b = AdaptiveBooster(full_scheme(m), n_learners, jitter_factory(), seed=7)
        rounds, _ = run_rounds(b, rng, 15, m=m)
        per_learner = [ln.updates for ln in b.learners]
        for t, (rnd, relevant) in enumerate(rounds):
            pairs = [
                (a, b_, 1.0)
                for a in sorted(relevant)
                for b_ in range(m)
                if b_ not in relevant
            ]
            for i in range(n_learners):
                _, got_w = per_learner[i][t]
                want = costs_to_weights(
                    np.clip(logistic_gradient(rnd.prefixes[i], pairs), -1.0, 1.0)
                )
                assert np.max(np.abs(got_w - want)) < 1e-12

    def test_adaptive_alpha_and_nu_updates_reproducible(self, rng):
        # Replay the published update rules from the round snapshots.
        m, n_learners = 4, 3
        b = AdaptiveBooster(full_scheme(m), n_learners, jitter_factory(), seed=13)
        x_stream = [rng.normal(size=3) for _ in range(12)]
        rel_stream = [
            frozenset(int(l) for l in rng.choice(m, size=int(rng.integers(1, m)), replace=False))
            for _ in range(12)
        ]
        alpha = b.alpha.copy()
        nu = b.expert_weights.copy()
        for t, (x, relevant) in enumerate(zip(x_stream, rel_stream), start=1):
            rnd = b.predict(x)
            b.update(rnd, RelevanceOracle(relevant, m))
            aa = np.array([a for a in sorted(relevant) for _ in range(m - len(relevant))], dtype=np.intp)
            bb = np.array(
                [b_ for _ in sorted(relevant) for b_ in range(m) if b_ not in relevant],
                dtype=np.intp,
            )
            ww = np.ones(aa.size)
            eta = b.learning_rate(t)
            est = np.zeros(n_learners)
            for i in range(n_learners):
                d = sgd_derivative(rnd.prefixes[i], rnd.h[i], alpha[i], aa, bb, ww)
                d = min(max(d, -1.0), 1.0)
                alpha[i] = min(max(alpha[i] - eta * d, -ALPHA_RANGE), ALPHA_RANGE)
                s_i = rnd.prefixes[i + 1]
                if aa.size:
                    est[i] = float(np.sum((s_i[bb] >= s_i[aa]).astype(float) * ww))
            nu = nu * np.exp(-np.minimum(est, 50.0))
            nu /= nu.sum()
            assert np.max(np.abs(b.alpha - alpha)) < 1e-12
            assert np.max(np.abs(b.expert_weights - nu)) < 1e-12


class TestDeterminism:
    @pytest.mark.parametrize("name", ["bbm", "adaptive"])
    def test_identical_seeds_identical_runs(self, name):
        train, _ = synth_pair(m=5, n_train=40, seed=3)
        outs = []
        for _ in range(2):
            b = BOOSTERS[name](topk_scheme(k=3, m=5, rho=0.1), 3, stump_pool_factory(), seed=21)
            played = []
            for x, relevant in zip(train.features, train.relevance):
                rnd = b.predict(x)
                b.update(rnd, RelevanceOracle(relevant, 5))
                played.append(rnd.prediction.final_ranking.tolist())
            outs.append((played, b.alpha.tolist()))
        assert outs[0] == outs[1]
