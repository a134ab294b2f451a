"""Exact potential evaluation: step distribution, pair potentials, costs."""

import math

import numpy as np
import pytest

from topkboost.core import rank_of_scores
from topkboost.errors import ContractError
from topkboost.losses import HINGE, LOGISTIC, RANK, loss
from topkboost.potential import (
    PotentialEvaluator,
    biased_step_probs,
    hinge_potential_zero_upper_bound,
)
from topkboost.randomize import (
    SINGLE_SWAP,
    UNIFORM,
    PairWeightTable,
    RandomizationScheme,
)
from topkboost.testkit import (
    enumerate_outcomes,
    expected_estimator,
    ground_truth_potential,
    mc_pair_potential,
    reveal_outcome,
)

from helpers import random_scored_instance


class TestStepProbs:
    def test_two_label_hand_values(self):
        p, q, r = biased_step_probs(2, 0.5)
        assert (p, q, r) == (0.75, 0.25, 0.0)

    def test_general_form(self):
        p, q, r = biased_step_probs(5, 0.2)
        assert p == pytest.approx((1 - 0.2) / 5 + 0.2)
        assert q == pytest.approx((1 - 0.2) / 5)
        assert r == pytest.approx(3 * (1 - 0.2) / 5)
        assert p + q + r == pytest.approx(1.0, abs=1e-15)

    def test_gamma_bounds(self):
        with pytest.raises(ContractError):
            biased_step_probs(4, 0.0)
        with pytest.raises(ContractError):
            biased_step_probs(4, 1.0)


class TestPairPotential:
    def test_zero_steps_is_the_atom(self, rng):
        ev = PotentialEvaluator(HINGE, 4, 0.3)
        for _ in range(10):
            sa, sb = rng.normal(size=2) * 2
            got = float(ev.pair_potential(0, np.array([sb - sa]))[0])
            assert got == pytest.approx(float(HINGE.atom(sa, sb)), abs=1e-12)

    def test_one_step_hand_value(self):
        # m=2, gamma=0.5: 0.75 * hinge(1,0) + 0.25 * hinge(0,1) = 0.5
        ev = PotentialEvaluator(HINGE, 2, 0.5)
        assert float(ev.pair_potential(1, np.array([0.0]))[0]) == pytest.approx(0.5, abs=1e-15)

    def test_negative_horizon_rejected(self):
        ev = PotentialEvaluator(HINGE, 3, 0.2)
        with pytest.raises(ContractError):
            ev.pair_potential(-1, np.array([0.0]))

    def test_one_step_recurrence(self, rng):
        # Lambda^n(sa, sb) = p Lambda^{n-1}(sa+1, sb) + q Lambda^{n-1}(sa, sb+1)
        #                  + r Lambda^{n-1}(sa, sb), exactly.
        for pl in (HINGE, LOGISTIC):
            for m, gamma in ((2, 0.5), (4, 0.2), (6, 0.1)):
                ev = PotentialEvaluator(pl, m, gamma)
                p, q, r = biased_step_probs(m, gamma)
                for n in (1, 2, 5, 8):
                    d = float(rng.normal() * 2)
                    whole = float(ev.pair_potential(n, np.array([d]))[0])
                    parts = ev.pair_potential(n - 1, np.array([d - 1.0, d + 1.0, d]))
                    step = p * parts[0] + q * parts[1] + r * parts[2]
                    assert whole == pytest.approx(float(step), abs=1e-12)

    def test_nonconvex_atom_rejected(self):
        with pytest.raises(ContractError):
            PotentialEvaluator(RANK, 4, 0.2)

    def test_properness_on_grid(self):
        ev = PotentialEvaluator(HINGE, 4, 0.2)
        for n in (0, 1, 3, 6):
            # Larger difference s_b - s_a means larger potential.
            diffs = np.arange(-5.0, 5.5, 0.5)
            vals = ev.pair_potential(n, diffs)
            assert np.all(np.diff(vals) >= -1e-12)
            assert np.all(vals >= 0.0)

    def test_matches_monte_carlo(self, rng):
        for trial in range(6):
            m = int(rng.integers(2, 6))
            n = int(rng.integers(1, 7))
            gamma = float(rng.uniform(0.05, 0.45))
            pl = HINGE if trial % 2 == 0 else LOGISTIC
            s = rng.normal(size=m) * 1.5
            a, b = (int(v) for v in rng.choice(m, size=2, replace=False))
            ev = PotentialEvaluator(pl, m, gamma)
            exact = float(ev.pair_potential(n, np.array([s[b] - s[a]]))[0])
            mean, stderr = mc_pair_potential(
                pl, m, gamma, n, s, a, b, 200_000, np.random.default_rng(trial)
            )
            assert abs(exact - mean) <= 3.0 * stderr + 1e-12


class TestFullPotential:
    def test_zero_steps_is_the_loss(self, rng):
        ev = PotentialEvaluator(HINGE, 5, 0.15)
        for _ in range(10):
            s, relevant, _ = random_scored_instance(rng, 5)
            assert ev.potential(0, s, relevant) == pytest.approx(
                loss(HINGE, s, relevant), abs=1e-12
            )

    def test_single_relevant_label_equals_ground_truth(self, rng):
        # With |R| = 1 the surrogate per-pair walk IS the true walk.
        for _ in range(5):
            m = int(rng.integers(2, 5))
            n = int(rng.integers(0, 5))
            gamma = float(rng.uniform(0.05, 0.4))
            s = rng.normal(size=m)
            relevant = frozenset({int(rng.integers(m))})
            ev = PotentialEvaluator(HINGE, m, gamma)
            phi = ev.potential(n, s, relevant)
            ups = ground_truth_potential(HINGE, s, relevant, gamma, n)
            assert phi == pytest.approx(ups, abs=1e-10)

    def test_surrogate_upper_bounds_ground_truth(self, rng):
        for _ in range(25):
            m = int(rng.integers(2, 6))
            n = int(rng.integers(0, 6))
            gamma = float(rng.uniform(0.05, min(0.45, 1.0 / m)))
            s, relevant, _ = random_scored_instance(rng, m)
            ev = PotentialEvaluator(HINGE, m, gamma)
            phi = ev.potential(n, s, relevant)
            ups = ground_truth_potential(HINGE, s, relevant, gamma, n)
            assert phi - ups >= -1e-12

    def test_zero_bound_formula(self):
        assert hinge_potential_zero_upper_bound(0, 0.3, 4) == pytest.approx(4.0)
        n, gamma, m = 12, 0.25, 6
        expect = (n + 1) * (m * m / 4.0) * math.exp(-(gamma**2) * n / 2.0)
        assert hinge_potential_zero_upper_bound(n, gamma, m) == pytest.approx(expect, abs=1e-12)


class TestCosts:
    def test_full_costs_definition(self, rng):
        # cost[l] = potential(s + e_l) recomputed from scratch.
        ev = PotentialEvaluator(HINGE, 5, 0.2)
        for n in (0, 2, 4):
            s, relevant, _ = random_scored_instance(rng, 5)
            costs = ev.full_costs(n, s, relevant)
            for l in range(5):
                bumped = s.copy()
                bumped[l] += 1.0
                assert costs[l] == pytest.approx(ev.potential(n, bumped, relevant), abs=1e-12)

    def test_inert_labels_share_one_cost(self, rng):
        ev = PotentialEvaluator(HINGE, 6, 0.15)
        s = rng.normal(size=6)
        relevant = frozenset({0})
        costs = ev.full_costs(3, s, relevant)
        # Labels 1..5 are all irrelevant: bumping any of them only moves its
        # own pair, so no two need be equal -- but with NO mixed pair at all
        # every label is inert and costs are constant.
        flat = ev.full_costs(3, s, frozenset())
        assert np.ptp(flat) == 0.0

    def test_single_pair_cost_ordering(self):
        # One revealed pair (a rel, b irr): raising a helps, raising b hurts,
        # inert labels sit in between.
        ev = PotentialEvaluator(HINGE, 4, 0.2)
        s = np.array([0.1, -0.4, 0.8, 0.0])
        relevant = frozenset({0})
        sub = frozenset({0, 1})  # pretend only labels 0,1 form the pair
        # Build from full_costs with R={0} and irrelevant {1} only by using
        # a 2-label slice; inert labels checked against the middle value.
        costs = ev.full_costs(2, s, relevant)
        # a = 0 relevant; b in {1,2,3} irrelevant
        assert costs[0] == min(costs)
        assert costs.argmax() in (1, 2, 3)

    def test_estimated_costs_unbiased_over_enumeration(self, rng):
        scheme = RandomizationScheme(UNIFORM, 2, 4, 0.25)
        ev = PotentialEvaluator(HINGE, 4, 0.2)
        for _ in range(5):
            s, relevant, base = random_scored_instance(rng, 4)
            n = int(rng.integers(0, 4))
            enum = enumerate_outcomes(scheme, base)

            def estimate(ranking):
                fb = reveal_outcome(ranking, scheme.k, relevant)
                table = PairWeightTable(scheme, base, frozenset(fb.labels))
                return ev.estimate_costs(n, s, table, fb)

            expect = expected_estimator(enum, estimate)
            truth = ev.full_costs(n, s, relevant)
            assert np.max(np.abs(expect - truth)) < 1e-10

    def test_full_information_costs_exact(self, rng):
        scheme = RandomizationScheme(UNIFORM, 5, 5, 0.0)
        ev = PotentialEvaluator(HINGE, 5, 0.25)
        for _ in range(10):
            s, relevant, _ = random_scored_instance(rng, 5)
            base = rank_of_scores(s)
            fb = reveal_outcome(base, 5, relevant)
            table = PairWeightTable(scheme, base, frozenset(fb.labels))
            n = int(rng.integers(0, 5))
            got = ev.estimate_costs(n, s, table, fb)
            want = ev.full_costs(n, s, relevant)
            assert np.max(np.abs(got - want)) < 1e-12

    def test_estimated_potential_zero_without_mixed_pair(self):
        scheme = RandomizationScheme(UNIFORM, 2, 5, 0.2)
        ev = PotentialEvaluator(HINGE, 5, 0.2)
        base = np.arange(5)
        fb = reveal_outcome(base, 2, relevant={0, 1})
        table = PairWeightTable(scheme, base, frozenset(fb.labels))
        assert ev.estimate_potential(3, np.zeros(5), table, fb) == 0.0
        assert np.all(ev.estimate_costs(3, np.zeros(5), table, fb) == 0.0)


class TestStepWeights:
    def test_distribution_normalized(self):
        ev = PotentialEvaluator(HINGE, 5, 0.2)
        for n in (0, 1, 7, 30):
            w = ev.step_weights(n)
            assert w.shape == (2 * n + 1,)
            assert float(w.sum()) == pytest.approx(1.0, abs=1e-12)
            assert np.all(w >= 0.0)

    def test_one_step_weights(self):
        ev = PotentialEvaluator(HINGE, 2, 0.5)
        w = ev.step_weights(1)
        # offsets (-1, 0, +1) = (a-step, neither, b-step) with m=2: no r mass.
        assert w.tolist() == [0.75, 0.0, 0.25]
