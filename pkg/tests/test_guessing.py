import itertools
import math

import numpy as np
import pytest

from indetermination import (
    ConditionHViolation,
    DegenerateInput,
    InvalidDistribution,
    JointDistribution,
    Margin,
    couple_matching_probability,
    independence_coupling,
    indetermination_coupling,
    perturb_coupling,
)
from indetermination.guessing import (
    GuessingInstance,
    Strategy,
    gain,
    k_shot,
    lower_bound_generalized,
    lower_bound_original,
    one_shot,
    one_shot_bounds_margin_strategy,
    one_shot_mc,
    optimal_order,
    plackett_luce_rank_probabilities,
    rho_moment,
    rho_moment_mc,
    sender_optimal_coupling,
)


def single_column_instance(mu: Margin, rho: float = 1.0) -> GuessingInstance:
    return GuessingInstance(JointDistribution(mu.weights[:, None]), rho)


def random_instance(rng, p=4, q=3, rho=1.0) -> GuessingInstance:
    cells = rng.random((p, q)) + 0.02
    return GuessingInstance(JointDistribution(cells / cells.sum()), rho)


def pl_rank_oracle(weights):
    """Oracle: Plackett-Luce rank probabilities by full permutation enumeration."""
    w = np.asarray(weights, dtype=float)
    p = w.size
    rank = np.zeros((p, p))
    for perm in itertools.permutations(range(p)):
        prob = 1.0
        rem = w.sum()
        for u in perm:
            prob *= w[u] / rem if rem > 0 else 0.0
            rem -= w[u]
        for r, u in enumerate(perm):
            rank[u, r] += prob
    return rank


class TestGain:
    def test_worked_example(self):
        # four messages, order (b, c, a, d) as indices (1, 2, 0, 3); u = c
        assert gain((1, 2, 0, 3), 2) == 2

    def test_first_and_last(self):
        order = (3, 1, 0, 2)
        assert gain(order, 3) == 1
        assert gain(order, 2) == 4

    def test_values_cover_all_ranks(self):
        order = (2, 0, 3, 1)
        assert sorted(gain(order, u) for u in range(4)) == [1, 2, 3, 4]


class TestOptimalOrder:
    def test_simple_sort(self):
        assert optimal_order(Margin([0.1, 0.7, 0.2])) == (1, 2, 0)

    def test_uniform_ties_to_identity(self):
        assert optimal_order(Margin.uniform(4)) == (0, 1, 2, 3)

    def test_reference_margin(self, ref_mu):
        assert optimal_order(ref_mu) == (0, 3, 1, 2)


class TestPlackettLuce:
    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(6):
            w = rng.random(4) + 0.05
            np.testing.assert_allclose(
                plackett_luce_rank_probabilities(w), pl_rank_oracle(w), atol=1e-12)

    def test_doubly_stochastic(self):
        r = plackett_luce_rank_probabilities([0.5, 0.3, 0.2, 0.0])
        np.testing.assert_allclose(r.sum(axis=0), 1.0, atol=1e-12)
        np.testing.assert_allclose(r.sum(axis=1), 1.0, atol=1e-12)

    def test_zero_weight_goes_last(self):
        r = plackett_luce_rank_probabilities([0.6, 0.4, 0.0])
        assert r[2, 2] == pytest.approx(1.0, abs=1e-12)

    def test_all_zero_weights_uniform(self):
        r = plackett_luce_rank_probabilities([0.0, 0.0])
        np.testing.assert_allclose(r, 0.5, atol=1e-12)


class TestRhoMoment:
    def test_descending_order_reference(self, ref_mu):
        inst = single_column_instance(ref_mu)
        got = rho_moment(inst, Strategy.sorted_by_posterior())
        # direct summation: 1*(1/3) + 2*(1/3) + 3*(2/9) + 4*(1/9)
        assert got == pytest.approx(19.0 / 9.0, abs=1e-15)

    def test_uniform_margin_any_order(self):
        inst = single_column_instance(Margin.uniform(5))
        fixed = Strategy.deterministic([(4, 2, 0, 1, 3)])
        assert rho_moment(inst, fixed) == pytest.approx(3.0, abs=1e-14)

    def test_point_mass_high_rho(self):
        inst = single_column_instance(Margin([1.0, 0.0, 0.0]), rho=50.0)
        assert rho_moment(inst, Strategy.sorted_by_posterior()) == pytest.approx(1.0)

    def test_random_rule_between_extremes(self, ref_mu):
        inst = single_column_instance(ref_mu)
        best = rho_moment(inst, Strategy.sorted_by_posterior())
        random_rule = rho_moment(inst, Strategy.random_by_posterior())
        worst = rho_moment(
            inst, Strategy.deterministic([optimal_order(ref_mu)[::-1]]))
        assert best - 1e-12 <= random_rule <= worst + 1e-12

    def test_monte_carlo_agrees(self, ref_mu, ref_nu):
        pi = indetermination_coupling(ref_mu, ref_nu)
        inst = GuessingInstance(pi, rho=1.0)
        for strat in (Strategy.sorted_by_posterior(), Strategy.random_by_posterior()):
            exact = rho_moment(inst, strat)
            approx = rho_moment_mc(inst, strat, n=60_000, seed=9)
            assert approx == pytest.approx(exact, rel=0.02)

    def test_order_count_must_match(self, ref_mu, ref_nu):
        pi = indetermination_coupling(ref_mu, ref_nu)
        inst = GuessingInstance(pi)
        with pytest.raises(InvalidDistribution):
            rho_moment(inst, Strategy.deterministic([(0, 1, 2, 3)]))


class TestLowerBounds:
    def test_point_mass(self):
        mu = Margin([1.0, 0.0, 0.0, 0.0])
        for rho in (0.5, 1.0, 2.0):
            assert lower_bound_original(mu, rho) == pytest.approx(
                (1 + math.log(4)) ** (-rho), abs=1e-14)

    def test_uniform_p4(self):
        got = lower_bound_original(Margin.uniform(4), 1.0)
        assert got == pytest.approx(4.0 / (1.0 + math.log(4.0)), abs=1e-12)
        assert got == pytest.approx(1.6762, abs=2e-4)

    def test_reference_value_and_inequality(self, ref_mu):
        bound = lower_bound_original(ref_mu, 1.0)
        assert bound == pytest.approx(1.6090, abs=1e-4)
        assert bound <= 19.0 / 9.0

    def test_generalized_reduces_to_original(self, ref_mu):
        inst = single_column_instance(ref_mu)
        assert lower_bound_generalized(inst.pi, 1.0) == pytest.approx(
            lower_bound_original(ref_mu, 1.0), abs=1e-14)

    def test_generalized_direct_summation_on_independence(self, ref_mu, ref_nu):
        pi = independence_coupling(ref_mu, ref_nu)
        rho = 0.7
        # direct-summation oracle over the cells
        e = 1.0 / (1.0 + rho)
        expected = (1 + math.log(4)) ** (-rho) * sum(
            np.sum(pi.cells[:, v] ** e) ** (1 + rho) for v in range(3))
        assert lower_bound_generalized(pi, rho) == pytest.approx(expected, abs=1e-13)

    def test_bound_below_optimal_strategy_moment(self):
        rng = np.random.default_rng(77)
        for _ in range(50):
            for rho in (0.5, 1.0, 2.0):
                inst = random_instance(rng, rho=rho)
                moment = rho_moment(inst, Strategy.sorted_by_posterior())
                assert lower_bound_generalized(inst.pi, rho) <= moment + 1e-10

    def test_rho_must_be_positive(self, ref_mu):
        with pytest.raises(InvalidDistribution):
            lower_bound_original(ref_mu, 0.0)


class TestOneShot:
    def test_random_rule_on_independence(self, ref_mu, ref_nu):
        pi = independence_coupling(ref_mu, ref_nu)
        got = one_shot(GuessingInstance(pi), Strategy.random_by_posterior())
        assert got == pytest.approx(float(np.sum(ref_mu.weights**2)), abs=1e-14)
        assert got == pytest.approx(23.0 / 81.0, abs=1e-14)

    def test_random_rule_reference_coupling(self, ref_mu, ref_nu):
        pi = indetermination_coupling(ref_mu, ref_nu)
        got = one_shot(GuessingInstance(pi), Strategy.random_by_posterior())
        expected = 23.0 / 243.0 + 45.0 / 351.0 + 1.0 / 15.0
        assert got == pytest.approx(expected, abs=1e-12)

    def test_sorted_rule_point_mass_columns(self):
        pi = JointDistribution(np.diag([0.5, 0.5]))
        assert one_shot(GuessingInstance(pi), Strategy.sorted_by_posterior()) == \
            pytest.approx(1.0, abs=1e-15)

    def test_matches_posterior_square_oracle(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            inst = random_instance(rng)
            nu = inst.pi.col_margin.weights
            oracle = sum(
                np.sum(inst.pi.cells[:, v] ** 2) / nu[v]
                for v in range(len(nu)) if nu[v] > 0)
            assert one_shot(inst, Strategy.random_by_posterior()) == \
                pytest.approx(oracle, abs=1e-13)

    def test_deterministic_orders(self, ref_mu, ref_nu):
        pi = indetermination_coupling(ref_mu, ref_nu)
        orders = [(0, 1, 2, 3)] * 3
        got = one_shot(GuessingInstance(pi), Strategy.deterministic(orders))
        assert got == pytest.approx(float(pi.cells[0].sum()), abs=1e-14)

    def test_sandwich_inequality(self):
        rng = np.random.default_rng(18)
        for _ in range(100):
            inst = random_instance(rng, p=rng.integers(2, 6), q=rng.integers(1, 5))
            margin = one_shot(inst, Strategy.random_by_posterior())
            best = one_shot(inst, Strategy.sorted_by_posterior())
            assert margin <= best + 1e-12
            assert best <= math.sqrt(margin) + 1e-12

    def test_monte_carlo_agrees(self, ref_mu, ref_nu):
        pi = indetermination_coupling(ref_mu, ref_nu)
        inst = GuessingInstance(pi)
        exact = one_shot(inst, Strategy.random_by_posterior())
        assert one_shot_mc(inst, Strategy.random_by_posterior(), 60_000, seed=2) == \
            pytest.approx(exact, rel=0.05)


class TestKShot:
    def test_saturates_at_p(self, ref_mu, ref_nu):
        pi = indetermination_coupling(ref_mu, ref_nu)
        inst = GuessingInstance(pi)
        for strat in (Strategy.sorted_by_posterior(), Strategy.random_by_posterior()):
            assert k_shot(inst, strat, 4) == pytest.approx(1.0, abs=1e-12)
            assert k_shot(inst, strat, 9) == pytest.approx(1.0, abs=1e-12)

    def test_monotone_in_k(self, ref_mu, ref_nu):
        pi = indetermination_coupling(ref_mu, ref_nu)
        inst = GuessingInstance(pi)
        for strat in (Strategy.sorted_by_posterior(), Strategy.random_by_posterior()):
            vals = [k_shot(inst, strat, k) for k in range(1, 5)]
            assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_k1_equals_one_shot(self, ref_mu, ref_nu):
        pi = indetermination_coupling(ref_mu, ref_nu)
        inst = GuessingInstance(pi)
        strat = Strategy.random_by_posterior()
        assert k_shot(inst, strat, 1) == one_shot(inst, strat)


class TestOneShotBounds:
    def test_reference_lower_bound(self, ref_mu, ref_nu):
        pi = indetermination_coupling(ref_mu, ref_nu)
        lower, upper = one_shot_bounds_margin_strategy(pi)
        assert lower == pytest.approx(77.0 / 351.0, abs=1e-14)
        assert lower == pytest.approx((77.0 / 729.0) / (13.0 / 27.0), abs=1e-14)
        assert upper >= lower

    def test_uniform_collapses(self):
        pi = JointDistribution(np.full((4, 4), 1.0 / 16.0))
        lower, upper = one_shot_bounds_margin_strategy(pi)
        assert lower == pytest.approx(0.25, abs=1e-14)
        assert upper == pytest.approx(0.25, abs=1e-14)

    def test_sandwich_on_random_couplings(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            inst = random_instance(rng, p=rng.integers(2, 6), q=rng.integers(2, 5))
            val = one_shot(inst, Strategy.random_by_posterior())
            lower, upper = one_shot_bounds_margin_strategy(inst.pi)
            assert lower - 1e-12 <= val <= upper + 1e-12

    def test_zero_column_dropped(self):
        cells = np.array([[0.5, 0.0], [0.5, 0.0]])
        pi = JointDistribution(cells)
        lower, upper = one_shot_bounds_margin_strategy(pi)
        assert lower == upper == pytest.approx(0.5, abs=1e-14)


class TestSenderOptimalCoupling:
    def test_reference_margins(self, ref_mu, ref_nu, ref_cells):
        pi = sender_optimal_coupling(ref_mu, ref_nu)
        np.testing.assert_allclose(pi.cells, ref_cells, atol=1e-13)

    def test_uniform_margins(self):
        pi = sender_optimal_coupling(Margin.uniform(3), Margin.uniform(4))
        np.testing.assert_allclose(pi.cells, 1.0 / 12.0, atol=1e-15)

    def test_infeasible_margins_raise(self):
        with pytest.raises(ConditionHViolation):
            sender_optimal_coupling(Margin([0.9, 0.1]), Margin([0.9, 0.1]))

    def test_l2_floor_against_perturbations(self, ref_mu, ref_nu):
        plus = sender_optimal_coupling(ref_mu, ref_nu)
        base = couple_matching_probability(plus)
        for k in range(50):
            other = perturb_coupling(plus, seed=k, amplitude=0.02)
            assert couple_matching_probability(other) >= base - 1e-12

    def test_one_shot_floor_universal(self, ref_mu, ref_nu):
        plus = sender_optimal_coupling(ref_mu, ref_nu)
        floor, _ = one_shot_bounds_margin_strategy(plus)
        for k in range(20):
            other = perturb_coupling(plus, seed=1000 + k, amplitude=0.03)
            val = one_shot(GuessingInstance(other), Strategy.random_by_posterior())
            assert val >= floor - 1e-12


def test_strategy_validation():
    with pytest.raises(InvalidDistribution):
        Strategy()
    with pytest.raises(InvalidDistribution):
        Strategy.deterministic([(0, 0, 1)])
    with pytest.raises(InvalidDistribution):
        GuessingInstance(JointDistribution([[1.0]]), rho=-1.0)


def test_degenerate_bounds_unreachable():
    # a valid joint law always has a positive column, so the bound is defined
    pi = JointDistribution([[1.0]])
    lower, upper = one_shot_bounds_margin_strategy(pi)
    assert lower == upper == 1.0
