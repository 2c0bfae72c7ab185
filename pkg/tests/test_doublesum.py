"""
Tests for exceedance estimation, double-sum bracketing and the
inequality checkers.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from pickands_lab.doublesum import (
    bivariate_normal_rectangle,
    block_exceedance_ratio,
    bonferroni_lower,
    bonferroni_oracle,
    borell_bound,
    borell_check,
    brute_force_union,
    default_step,
    exceedance_bracketing,
    interval_partition,
    joint_bound_check,
    joint_exceedance_counts,
    lemdlak_constant,
    lemdlak_scale,
    mc_joint_exceedance,
    mc_sup_exceedance,
    mc_sup_exceedance_levels,
    pickands_approximation,
    pickands_upper_envelope,
    random_finite_space,
    slepian_check,
)
from pickands_lab.exceptions import ConfigError
from pickands_lab.gauss import conditional_gaussian, std_normal_cdf, std_normal_pdf, std_normal_tail
from pickands_lab.pickands import h_exact_alpha2, h_quadrature_alpha1
from pickands_lab.process import ExpAlpha
from pickands_lab.rng import RngStream
from pickands_lab.scheduler import ChunkScheduler


def ou_covariance(times: np.ndarray, rate: float) -> np.ndarray:
    return np.exp(-rate * np.abs(times[:, None] - times[None, :]))


class TestSupExceedance:
    """Test cases for direct Monte Carlo of P(sup X > u)."""

    def setup_method(self):
        """Set up test fixtures."""
        self.model = ExpAlpha(1.0)
        self.scheduler = ChunkScheduler(1, 20_000)

    def test_low_level_is_certain(self):
        """Test u = -10 gives probability 1 with zero stderr."""
        estimate = mc_sup_exceedance(self.model, 1.0, -10.0, 0.01, 2000, RngStream(1), self.scheduler)
        assert estimate.mean == 1.0
        assert estimate.stderr == 0.0

    def test_single_point(self):
        """Test p = 0 reduces to one standard normal."""
        estimate = mc_sup_exceedance(self.model, 0.0, 1.0, 0.01, 40_000, RngStream(2), self.scheduler)
        assert abs(estimate.mean - std_normal_tail(1.0)) <= 4.0 * estimate.stderr

    def test_unreliable_flag(self):
        """Test fewer than 10 hits is flagged."""
        estimate = mc_sup_exceedance(self.model, 0.1, 4.0, 0.005, 1000, RngStream(3), self.scheduler)
        assert not estimate.reliable

    def test_monotone_levels_on_shared_ensemble(self):
        """Test hit counts never increase with the level on one ensemble."""
        levels = np.linspace(-1.0, 3.0, 9)
        estimates = mc_sup_exceedance_levels(self.model, 1.0, levels, 0.01, 10_000, RngStream(4), self.scheduler)
        means = [e.mean for e in estimates]
        assert all(a >= b for a, b in zip(means, means[1:]))

    def test_levels_match_single_level(self):
        """Test the level sweep agrees with mc_sup_exceedance on the same stream."""
        swept = mc_sup_exceedance_levels(self.model, 1.0, [1.5], 0.01, 5000, RngStream(5), self.scheduler)[0]
        single = mc_sup_exceedance(self.model, 1.0, 1.5, 0.01, 5000, RngStream(5), self.scheduler)
        assert swept.mean == single.mean

    def test_deterministic_across_workers(self):
        """Test identical output for different worker counts."""
        a = mc_sup_exceedance(self.model, 1.0, 2.0, 0.01, 6000, RngStream(6), ChunkScheduler(1, 1000))
        b = mc_sup_exceedance(self.model, 1.0, 2.0, 0.01, 6000, RngStream(6), ChunkScheduler(4, 1000))
        assert a == b


class TestPickandsApproximation:
    """Test cases for the asymptotic formula and its envelope."""

    def test_examples(self):
        """Test worked values and linearity in p."""
        assert pickands_approximation(1.0, 1.0, 3.0, 1.0) == pytest.approx(9.0 * std_normal_tail(3.0), rel=1e-12)
        assert pickands_approximation(1.0, 1.0, 3.0, 1.0) == pytest.approx(0.0121491, abs=1e-7)
        assert pickands_approximation(2.0, 2.0, 3.0, 0.5642) == pytest.approx(0.00457, rel=1e-3)
        assert pickands_approximation(1.5, 2.0, 3.0, 0.7) == 2.0 * pickands_approximation(1.5, 1.0, 3.0, 0.7)

    def test_domain(self):
        """Test non-positive arguments are rejected."""
        with pytest.raises(ConfigError):
            pickands_approximation(1.0, 0.0, 3.0, 1.0)
        with pytest.raises(ConfigError):
            pickands_approximation(1.0, 1.0, 3.0, -1.0)

    def test_envelope(self):
        """Test the envelope is the approximation with H(T)/T in place of H."""
        value = pickands_upper_envelope(2.0, 1.0, 3.0, 2.0, h_exact_alpha2(2.0))
        assert value == pytest.approx(pickands_approximation(2.0, 1.0, 3.0, h_exact_alpha2(2.0) / 2.0))
        assert value > pickands_approximation(2.0, 1.0, 3.0, 1.0 / math.sqrt(math.pi))


class TestIntervalPartition:
    """Test cases for the Pickands block partition."""

    def test_examples(self):
        """Test block length and N_p."""
        partition = interval_partition(10.0, 2.0, 1.0, 5.0)
        assert partition.block_length == pytest.approx(1.25)
        assert partition.N_p == 8
        assert len(partition.blocks) == 9
        assert not partition.degenerate

    def test_degenerate(self):
        """Test N_p = 0 is flagged."""
        partition = interval_partition(1.0, 2.0, 1.0, 5.0)
        assert partition.N_p == 0
        assert partition.degenerate

    def test_exact_division(self):
        """Test p an exact multiple of the block length."""
        partition = interval_partition(1.0, 3.0, 1.0, 1.0)
        assert partition.block_length == pytest.approx(1.0 / 9.0)
        assert partition.N_p == 9
        partition = interval_partition(1.0, 3.0, 2.0, 1.0)
        assert partition.block_length == pytest.approx(1.0 / 3.0)
        assert partition.N_p == 3

    def test_blocks_cover_horizon(self):
        """Test blocks 0..N_p lie in [0, p + L] and cover [0, p]."""
        partition = interval_partition(1.0, 2.5, 1.5, 0.7)
        L = partition.block_length
        assert partition.blocks[0][0] == 0.0
        assert partition.blocks[-1][1] <= 1.0 + L + 1e-12
        assert partition.blocks[-1][1] >= 1.0


class TestBonferroni:
    """Test cases for the Bonferroni lower bound and the finite-space oracle."""

    def test_four_point_space(self):
        """Test the uniform 4-point example is exact."""
        singles = [0.5, 0.5, 0.5]
        pairs = np.array([[0.0, 0.25, 0.0], [0.0, 0.0, 0.25], [0.0, 0.0, 0.0]])
        assert bonferroni_lower(singles, pairs) == pytest.approx(1.0)
        union, brute_singles, brute_pairs = brute_force_union([0.25] * 4, [[0, 1], [1, 2], [2, 3]])
        assert union == pytest.approx(1.0)
        assert brute_singles == pytest.approx(singles)
        np.testing.assert_allclose(brute_pairs, pairs)

    def test_identical_events(self):
        """Test maximal overlap gives 0."""
        pairs = np.triu(np.full((3, 3), 0.5), 1)
        assert bonferroni_lower([0.5, 0.5, 0.5], pairs) == pytest.approx(0.0)

    def test_disjoint_events(self):
        """Test additivity for disjoint events."""
        assert bonferroni_lower([0.3, 0.4], np.zeros((2, 2))) == pytest.approx(0.7)

    def test_lower_triangle_ignored(self):
        """Test only the strict upper triangle is read."""
        assert bonferroni_lower([0.3, 0.4], np.array([[0.3, 0.1], [0.1, 0.4]])) == pytest.approx(0.6)

    def test_malformed(self):
        """Test malformed inputs are rejected."""
        with pytest.raises(ConfigError):
            bonferroni_lower([0.5, 0.5], np.zeros((3, 3)))
        with pytest.raises(ConfigError):
            bonferroni_lower([1.5, 0.5], np.zeros((2, 2)))

    def test_empty_event_list(self):
        """Test the union of no events is 0."""
        union, singles, pairs = brute_force_union([0.5, 0.5], [])
        assert union == 0.0
        assert singles == []
        assert pairs.shape == (0, 0)

    def test_random_spaces(self):
        """Test the bracket on 1000 random finite spaces."""
        report = bonferroni_oracle(1000, RngStream(2024))
        assert report.holds
        assert report.min_gap >= -1e-12

    def test_random_space_shape(self):
        """Test generated spaces respect the atom and event limits."""
        for i in range(50):
            atoms, events = random_finite_space(RngStream(1).child(i))
            assert 1 <= len(atoms) <= 16
            assert 1 <= len(events) <= 6
            assert sum(atoms) == pytest.approx(1.0)

    def test_invalid_space(self):
        """Test bad atom masses and indices are rejected."""
        with pytest.raises(ConfigError):
            brute_force_union([0.5, 0.6], [[0]])
        with pytest.raises(ConfigError):
            brute_force_union([0.5, 0.5], [[2]])


class TestExceedanceBracketing:
    """Test cases for the double-sum bracket on a shared ensemble."""

    def setup_method(self):
        """Set up test fixtures."""
        self.model = ExpAlpha(1.0)
        self.scheduler = ChunkScheduler(1, 25_000)

    def test_pathwise_ordering(self):
        """Test lower <= union <= full <= upper on integer counts."""
        report = exceedance_bracketing(
            self.model, 1.0, 3.0, 1.0, 1.0, 0.005, 50_000, 1.0, RngStream(7), self.scheduler
        )
        assert report.partition.N_p == 9
        assert report.lower_count <= report.union_count <= report.full_count <= report.upper_count
        assert report.bonferroni_lower <= report.mc.mean + 1e-12
        assert report.mc.mean <= report.union_upper
        assert report.bonferroni_lower == pytest.approx(report.lower_count / 50_000, abs=1e-12)
        assert report.union_upper == pytest.approx((report.partition.N_p + 1) * report.single)
        assert "degenerate_partition" not in report.flags

    def test_double_sum_matches_lag_weighting(self):
        """Test the lag-weighted double sum and the Bonferroni term on integer counts."""
        n = 20_000
        report = exceedance_bracketing(
            self.model, 1.0, 2.0, 1.0, 1.0, 0.01, n, 1.0, RngStream(8), self.scheduler
        )
        N_p = report.partition.N_p
        assert N_p == 4
        assert len(report.pair_lags) == N_p - 1
        assert report.sigma2 == pytest.approx(
            math.fsum((N_p - k) * lag for k, lag in enumerate(report.pair_lags, start=1))
        )
        assert report.sigma2 >= 0.0
        assert report.bonferroni_lower == pytest.approx(report.lower_count / n, abs=1e-12)
        # Stationarity: lag-pair probabilities decrease with separation.
        assert report.pair_lags[0] >= report.pair_lags[-1]

    def test_stationary_bonferroni_form(self):
        """Test N_p * single - sigma2 is reported beside the pathwise Bonferroni term."""
        report = exceedance_bracketing(
            self.model, 1.0, 2.0, 1.0, 1.0, 0.01, 20_000, 1.0, RngStream(8), self.scheduler
        )
        N_p = report.partition.N_p
        stationary = report.bonferroni_lower_stationary
        assert stationary == pytest.approx(N_p * report.single - report.sigma2)
        assert stationary <= report.union_upper
        assert report.to_dict()["bonferroni_lower_stationary"] == stationary
        # Same double sum; only the single-block average differs.
        assert abs(stationary - report.bonferroni_lower) <= 0.1 * report.union_upper

    def test_degenerate_partition_flagged(self):
        """Test N_p < 2 is reported, and the ordering still holds."""
        report = exceedance_bracketing(
            self.model, 1.0, 3.0, 1.0, 5.0, 0.005, 20_000, 1.0, RngStream(9), self.scheduler,
            H_T=h_quadrature_alpha1(5.0),
        )
        assert report.partition.N_p == 1
        assert "degenerate_partition" in report.flags
        assert report.lower_count <= report.full_count <= report.upper_count
        assert report.upper_envelope > report.pickands_value

    def test_alpha_mismatch(self):
        """Test the partition alpha must match the model."""
        with pytest.raises(ConfigError):
            exceedance_bracketing(self.model, 1.0, 3.0, 2.0, 1.0, 0.005, 100, 1.0, RngStream(1))

    def test_deterministic_across_workers(self):
        """Test bit-identical reports across worker counts."""
        a = exceedance_bracketing(self.model, 1.0, 2.5, 1.0, 1.0, 0.01, 4000, 1.0, RngStream(10), ChunkScheduler(1, 1000))
        b = exceedance_bracketing(self.model, 1.0, 2.5, 1.0, 1.0, 0.01, 4000, 1.0, RngStream(10), ChunkScheduler(3, 1000))
        assert a.to_dict() == b.to_dict()

    def test_asymptotic_ratio_stabilizes(self):
        """Test mc / (p u^2 Psi(u)) at u = 3 and 3.5 agree within 25% and lie in [0.25, 2]."""
        ratios = []
        for i, u in enumerate((3.0, 3.5)):
            estimate = mc_sup_exceedance(self.model, 1.0, u, 0.004, 200_000, RngStream(11).child(i), self.scheduler)
            ratios.append(estimate.mean / (u * u * std_normal_tail(u)))
        assert all(0.25 <= r <= 2.0 for r in ratios)
        assert abs(ratios[1] - ratios[0]) / ratios[0] < 0.25

    @pytest.mark.acceptance
    def test_full_size_bracketing(self):
        """Test the ExpAlpha(1), p=1, u=3, T=5 bracket at n = 10^6."""
        report = exceedance_bracketing(
            self.model, 1.0, 3.0, 1.0, 5.0, 0.005, 1_000_000, 1.0, RngStream(12), ChunkScheduler(1, 50_000)
        )
        assert report.lower_count <= report.full_count <= report.upper_count
        assert report.mc.mean > 0
        assert 0.5 <= report.pickands_value / report.mc.mean <= 2.0


class TestBlockRatio:
    """Test cases for the local lemma ratio."""

    def test_alpha1_block_ratio(self):
        """Test P(sup over one block > u)/Psi(u) is near H(T) for OU at u = 3."""
        estimate = block_exceedance_ratio(ExpAlpha(1.0), 3.0, 1.0, None, 200_000, RngStream(13), ChunkScheduler(1, 50_000))
        oracle = h_quadrature_alpha1(1.0)
        assert 0.5 * oracle <= estimate.mean <= 1.5 * oracle

    def test_default_step(self):
        """Test the default step is u^(-2/alpha)/20."""
        assert default_step(3.0, 1.0) == pytest.approx(1.0 / 180.0)
        assert default_step(3.0, 2.0) == pytest.approx(1.0 / 60.0)


class TestJointExceedance:
    """Test cases for joint block exceedance and its explicit constant."""

    def setup_method(self):
        """Set up test fixtures."""
        self.model = ExpAlpha(1.0)
        self.scheduler = ChunkScheduler(1, 20_000)

    def test_certain_at_low_level(self):
        """Test u = -10 gives 1."""
        estimate = mc_joint_exceedance(self.model, (0.0, 0.2), (1.0, 1.2), -10.0, 0.01, 1000, RngStream(1), self.scheduler)
        assert estimate.mean == 1.0

    def test_joint_below_marginals(self):
        """Test joint <= each marginal on shared paths."""
        joint, first, second = joint_exceedance_counts(
            self.model, (0.0, 0.3), (0.5, 0.8), 1.5, 0.01, 20_000, RngStream(2), self.scheduler
        )
        assert joint.mean <= min(first.mean, second.mean)

    def test_far_blocks_nearly_independent(self):
        """Test far-apart blocks behave like a product of marginals."""
        joint, first, second = joint_exceedance_counts(
            self.model, (0.0, 0.2), (5.0, 5.2), 1.0, 0.01, 20_000, RngStream(3), self.scheduler
        )
        assert abs(joint.mean - first.mean * second.mean) <= 4.0 * joint.stderr + 0.005

    def test_overlap_rejected(self):
        """Test overlapping intervals are rejected."""
        with pytest.raises(ConfigError):
            mc_joint_exceedance(self.model, (0.0, 1.0), (0.5, 1.5), 1.0, 0.01, 10, RngStream(1))

    def test_constant_scale(self):
        """Test C for alpha = 2 and alpha = 1."""
        assert lemdlak_scale(2.0) == pytest.approx(4.27618, abs=1e-5)
        assert lemdlak_scale(1.0) == pytest.approx(128.0 / 7.0, rel=1e-12)

    def test_constant_formula(self):
        """Test the explicit constant and its decrease in t0."""
        C = lemdlak_scale(1.0)
        expected = 4.0 * math.ceil(C) * math.ceil(4.0 * C) * math.exp(-2.0 / 8.0) * 2.5
        assert lemdlak_constant(1.0, 3.0, 1.0, 2.5) == pytest.approx(expected)
        values = [lemdlak_constant(1.5, t0, 1.0, 2.0) for t0 in (4.0, 8.0, 16.0)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_constant_domain(self):
        """Test t0 <= T is rejected."""
        with pytest.raises(ConfigError):
            lemdlak_constant(1.0, 1.0, 1.0, 2.0)

    def h_square(self, alpha):
        H1 = h_exact_alpha2(1.0) if alpha == 2.0 else h_quadrature_alpha1(1.0)
        return H1 * H1

    @pytest.mark.parametrize("alpha", [1.0, 2.0])
    @pytest.mark.parametrize("t0", [3.0, 5.0])
    def test_first_block_ratio_below_constant(self, alpha, t0):
        """Test the first-block ratio, which dominates the joint ratio, decides the bound at u = 2.5."""
        report = joint_bound_check(
            ExpAlpha(alpha), 1.0, t0, 2.5, self.h_square(alpha), 20_000, RngStream(5), scheduler=self.scheduler
        )
        assert report.first.reliable
        assert report.ratio <= report.first_ratio
        assert report.first_ratio <= report.constant
        assert report.marginal_holds is True
        assert report.holds is True
        assert report.joint.mean <= min(report.first.mean, report.second.mean)

    def test_sparse_hits_leave_bound_undecided(self):
        """Test a run with almost no exceedances at u = 4 reports holds=None instead of passing."""
        report = joint_bound_check(
            ExpAlpha(2.0), 1.0, 5.0, 4.0, self.h_square(2.0), 20_000, RngStream(4), scheduler=self.scheduler
        )
        assert not report.joint.reliable
        assert not report.first.reliable
        assert report.holds is None
        assert report.marginal_holds is None
        assert "unreliable" in report.flags
        assert report.to_dict()["holds"] is None

    def test_level_floor(self):
        """Test the proven level ((t0 - T) / epsilon)^(alpha/2) and its flag."""
        model = ExpAlpha(1.0)
        eps = model.local_condition_epsilon()
        near = joint_bound_check(model, 1.0, 3.0, 2.5, self.h_square(1.0), 2000, RngStream(6), scheduler=self.scheduler)
        far = joint_bound_check(model, 1.0, 5.0, 2.5, self.h_square(1.0), 2000, RngStream(6), scheduler=self.scheduler)
        assert near.epsilon == eps
        assert near.level_floor == pytest.approx((2.0 / eps) ** 0.5)
        assert "below_level_floor" not in near.flags
        assert far.level_floor == pytest.approx((4.0 / eps) ** 0.5)
        assert "below_level_floor" in far.flags

    @pytest.mark.acceptance
    def test_joint_ratio_with_enough_hits(self):
        """Test the joint ratio itself against C for OU at u = 4, with at least 10 joint hits."""
        report = joint_bound_check(
            ExpAlpha(1.0), 1.0, 3.0, 4.0, self.h_square(1.0), 4_000_000, RngStream(7),
            scheduler=ChunkScheduler(1, 200_000),
        )
        assert report.joint.reliable
        assert report.ratio <= report.constant
        assert report.holds is True

    @pytest.mark.acceptance
    @pytest.mark.parametrize("alpha", [1.0, 2.0])
    @pytest.mark.parametrize("t0", [3.0, 5.0])
    @pytest.mark.parametrize("u", [4.0, 5.0])
    def test_bound_at_high_levels(self, alpha, t0, u):
        """
        Test the bound is never refuted at u = 4, 5 and is decided at u = 4.

        Joint hits at u = 5 stay below 10 for any affordable n, so there
        the run may end undecided, and must then say so.
        """
        report = joint_bound_check(
            ExpAlpha(alpha), 1.0, t0, u, self.h_square(alpha), 1_000_000, RngStream(8),
            scheduler=ChunkScheduler(1, 200_000),
        )
        assert report.holds is not False
        if u == 4.0:
            assert report.holds is True
        if report.holds is None:
            assert "unreliable" in report.flags


class TestBorell:
    """Test cases for the Borell bound."""

    def test_examples(self):
        """Test w = m and the worked value."""
        assert borell_bound(0.3, 1.0, 0.3) == 1.0
        assert borell_bound(1.0, 1.0, 3.0) == pytest.approx(math.exp(-2.0))

    def test_below_mean_rejected(self):
        """Test w < m is rejected."""
        with pytest.raises(ConfigError):
            borell_bound(1.0, 1.0, 0.5)

    def test_shared_ensemble_dominance(self):
        """Test empirical tails stay under the bound at 10 levels."""
        report = borell_check(ExpAlpha(1.0), 1.0, 0.01, 20_000, RngStream(5), scheduler=ChunkScheduler(1, 20_000))
        assert len(report.levels) == 10
        assert report.dominated
        assert report.levels[0].bound == 1.0


class TestSlepian:
    """Test cases for the Slepian checker and the rectangle oracle."""

    def setup_method(self):
        """Set up test fixtures."""
        self.scheduler = ChunkScheduler(1, 50_000)

    def test_equal_covariances(self):
        """Test covX = covY gives identical estimates."""
        cov = ou_covariance(np.linspace(0.0, 1.0, 4), 1.0)
        report = slepian_check(cov, cov, np.zeros(4), 1.0, 20_000, RngStream(1), self.scheduler)
        assert report.consistent
        assert report.pX.mean == report.pY.mean

    def test_two_dimensional_case(self):
        """Test rho 0.2 vs 0.8 at u = 1 against the rectangle oracle."""
        covX = np.array([[1.0, 0.2], [0.2, 1.0]])
        covY = np.array([[1.0, 0.8], [0.8, 1.0]])
        report = slepian_check(covX, covY, np.zeros(2), 1.0, 100_000, RngStream(2), self.scheduler)
        exactX = bivariate_normal_rectangle(0.2, 1.0)
        exactY = bivariate_normal_rectangle(0.8, 1.0)
        assert exactX < exactY
        assert report.consistent
        assert abs(report.pX.mean - exactX) <= 4.0 * report.pX.stderr
        assert abs(report.pY.mean - exactY) <= 4.0 * report.pY.stderr

    def test_ten_point_ou(self):
        """Test r_X = e^{-t} <= r_Y = e^{-t/2} on 10 points at u = 2."""
        times = np.linspace(0.0, 0.9, 10)
        report = slepian_check(
            ou_covariance(times, 1.0), ou_covariance(times, 0.5), np.zeros(10), 2.0, 100_000, RngStream(3), self.scheduler
        )
        assert report.consistent

    def test_precondition_diagnostics(self):
        """Test violations name the failing entry."""
        covY = np.array([[1.0, 0.5], [0.5, 1.0]])
        with pytest.raises(ConfigError, match=r"\(1,1\)"):
            slepian_check(np.array([[1.0, 0.2], [0.2, 2.0]]), covY, np.zeros(2), 1.0, 10, RngStream(1))
        with pytest.raises(ConfigError, match=r"\(0,1\)"):
            slepian_check(np.array([[1.0, 0.7], [0.7, 1.0]]), covY, np.zeros(2), 1.0, 10, RngStream(1))
        with pytest.raises(ConfigError, match="positive semidefinite"):
            slepian_check(np.array([[1.0, -2.0], [-2.0, 1.0]]), covY, np.zeros(2), 1.0, 10, RngStream(1))

    def test_rectangle_against_conditioning(self):
        """Test the 2-D quadrature against a 1-D integral from the conditional decomposition."""
        for rho in (-0.5, 0.0, 0.3, 0.8):
            d = conditional_gaussian(0.0, 0.0, 1.0, 1.0, rho)
            sd = math.sqrt(d.residual_variance)

            def integrand(x):
                return std_normal_pdf(x) * std_normal_cdf((1.0 - d.slope * x) / sd)

            expected, _ = quad(integrand, -12.0, 1.0, epsabs=1e-13)
            assert bivariate_normal_rectangle(rho, 1.0) == pytest.approx(expected, abs=1e-8)
        assert bivariate_normal_rectangle(0.0, 1.0) == pytest.approx(std_normal_cdf(1.0) ** 2, abs=1e-8)

    def test_rectangle_domain(self):
        """Test |rho| < 1 is required."""
        with pytest.raises(ConfigError):
            bivariate_normal_rectangle(1.0, 1.0)
