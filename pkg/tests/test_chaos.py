"""
Tests for Wiener Chaos Decompositions
"""

import math

import pytest
import numpy as np
from numpy.polynomial import hermite_e
from scipy import special
import sys
sys.path.insert(0, '..')

from core.chaos import (
    block_moment, chaos_project_F, classify_resonances, count_resonant_tuples, hermite,
    hypercontractivity_check, l2k_block_decomposition, l4_block_decomposition,
    pair_free_fast, shell_moment, wick_abs2n, wick_orthogonality
)
from core.errors import (
    InsufficientSamplesError, InvalidArgumentError, UnsupportedDimensionError,
    UnsupportedOrderError
)
from core.spectral import GaussianFamily, gaussian_stream, sample_family
from core.stats import x_statistic


class TestHermiteAndWick:
    """Test suite for Hermite polynomials and Wick powers."""

    def test_low_degrees(self):
        """Test He_2, He_3, He_4 against their closed forms."""
        x = np.linspace(-3.0, 3.0, 13)
        assert np.allclose(hermite(2, x), x ** 2 - 1)
        assert np.allclose(hermite(3, x), x ** 3 - 3 * x)
        assert np.allclose(hermite(4, x), x ** 4 - 6 * x ** 2 + 3)
        assert isinstance(hermite(3, 2.0), float)

    def test_orthogonality_under_gaussian_weight(self):
        """Test E[He_m He_n] = n! delta_mn with Gauss-Hermite quadrature."""
        nodes, weights = hermite_e.hermegauss(20)
        weights = weights / np.sqrt(2.0 * np.pi)
        for m in range(6):
            for n in range(6):
                value = np.sum(weights * hermite(m, nodes) * hermite(n, nodes))
                expected = math.factorial(n) if m == n else 0.0
                assert value == pytest.approx(expected, abs=1e-9)

    def test_wick_powers_are_laguerre(self):
        """Test :|g|^{2n}: = (-1)^n n! 2^n L_n(|g|^2 / 2)."""
        g = gaussian_stream(5, 50)
        a = np.abs(g) ** 2
        for n in (1, 2, 3):
            expected = (-1) ** n * math.factorial(n) * 2 ** n * special.eval_laguerre(n, a / 2.0)
            assert np.allclose(wick_abs2n(g, n), expected, rtol=1e-10, atol=1e-9)

    def test_wick_scalar(self):
        """Test a scalar argument gives a float."""
        assert wick_abs2n(1.0 + 1.0j, 1) == pytest.approx(0.0)

    def test_unsupported_order(self):
        """Test Wick powers stop at n = 3."""
        with pytest.raises(UnsupportedOrderError):
            wick_abs2n(1.0, 4)

    def test_orthogonality_monte_carlo(self):
        """Test every Wick moment is within five standard errors of zero."""
        moments = wick_orthogonality(gaussian_stream(17, 200_000))
        assert (1, 2) in moments and (3, 0) in moments
        for mean, se in moments.values():
            assert abs(mean) <= 5 * se


class TestResonances:
    """Test suite for the resonance classifier."""

    def setup_method(self):
        """Set up test fixtures."""
        self.family = sample_family(2024, 1, 64)

    def test_classes_cover_every_resonant_tuple(self):
        """Test the class counts add up to all solutions of sum n = sum m."""
        for j, k in ((3, 2), (4, 2), (2, 3), (3, 3)):
            points, draws = self.family.shell(j)
            resonances = classify_resonances(points[:, 0], draws, k)
            assert resonances.total_count == count_resonant_tuples(points[:, 0], k)

    def test_quartic_class_counts(self):
        """Test k = 2: 2m(m-1) paired tuples, m diagonal ones, no partial pairs."""
        points, draws = self.family.shell(3)
        m = len(draws)
        resonances = classify_resonances(points[:, 0], draws, 2)
        assert resonances.counts["paired"] == 2 * m * (m - 1)
        assert resonances.counts["error_i"] == m
        assert resonances.counts["error_ii"] == 0

    def test_unsupported_order(self):
        """Test the classifier handles k = 2 and 3 only."""
        with pytest.raises(UnsupportedOrderError):
            classify_resonances([1, 2], [1.0, 1.0], 4)


class TestBlockDecompositions:
    """Test suite for the L^4 and L^6 block splits."""

    def setup_method(self):
        """Set up test fixtures."""
        self.family = sample_family(99, 1, 64)

    def test_l4_identity(self):
        """Test lhs = I + II + III to 1e-9 for j = 1..6."""
        for j in range(1, 7):
            decomposition = l4_block_decomposition(self.family, j)
            assert decomposition.rel_residual <= 1e-9
            assert decomposition.imag_residual <= 1e-9 * decomposition.lhs

    def test_l4_leading_coefficient(self):
        """Test I = 2 * 2^{-2j} (sum |g|^2)^2."""
        decomposition = l4_block_decomposition(self.family, 4)
        _, draws = self.family.shell(4)
        energy = float(np.sum(np.abs(draws) ** 2))
        assert decomposition.leading_coefficient(energy) == pytest.approx(2.0)

    def test_exhaustive_k2_matches_closed_form(self):
        """Test the classifier reproduces II and I + III at k = 2."""
        closed = l4_block_decomposition(self.family, 4)
        exhaustive = l2k_block_decomposition(self.family, 4, 2)
        assert exhaustive.II == pytest.approx(closed.II, rel=1e-9, abs=1e-12)
        assert exhaustive.I + exhaustive.error_i == pytest.approx(closed.I + closed.III, rel=1e-12)
        assert exhaustive.error_ii == 0.0

    def test_l6_identity(self):
        """Test the four k = 3 classes sum to ||X_j||_6^6."""
        for j in range(1, 4):
            decomposition = l2k_block_decomposition(self.family, j, 3)
            assert decomposition.rel_residual <= 1e-8

    def test_l6_cap(self):
        """Test k = 3 enumeration is capped at j = 6."""
        with pytest.raises(InvalidArgumentError):
            l2k_block_decomposition(sample_family(1, 1, 128), 7, 3)

    def test_pair_free_fast(self):
        """Test lhs - I - III agrees with the exhaustive pair-free sum."""
        for j in (2, 5):
            fast = pair_free_fast(self.family, j)
            exact = l4_block_decomposition(self.family, j)
            assert abs(fast - exact.II) <= 1e-9 * exact.lhs

    def test_single_mode_moment(self):
        """Test one unit draw in S_j gives ||X_j||_4^4 = 2^{-2j}."""
        family = GaussianFamily.from_draws({8: 1.0}, dim=1, truncation=8)
        assert block_moment(family, 3, 2) == pytest.approx(2.0 ** -6, rel=1e-12)

    def test_single_frequency_has_no_pair_free_part(self):
        """Test a family with one nonzero draw gives II = error_ii = 0 for k = 2, 3."""
        family = GaussianFamily.from_draws({6: 1.5 - 0.5j}, dim=1, truncation=8)
        for k in (2, 3):
            decomposition = l2k_block_decomposition(family, 3, k)
            assert decomposition.II == 0.0
            assert decomposition.error_ii == 0.0
            assert decomposition.rel_residual <= 1e-9

    def test_pair_free_mean_and_scaling(self):
        """Test E[II_j] = 0 and E[II_j^2] decays like 2^{-j} for j = 4..8."""
        js = np.arange(4, 9)
        second = []
        for j in js:
            values = np.array([pair_free_fast(sample_family(seed, 1, 2 ** j), j)
                               for seed in range(400)])
            se = np.std(values, ddof=1) / np.sqrt(values.size)
            assert abs(np.mean(values)) <= 5 * se
            second.append(np.mean(values ** 2))
        slope = np.polyfit(js, np.log2(second), 1)[0]
        assert -1.35 <= slope <= -0.65

    def test_needs_one_dimension(self):
        """Test block decompositions refuse d = 2."""
        with pytest.raises(UnsupportedDimensionError):
            l4_block_decomposition(sample_family(1, 2, 4), 1)


class TestChaosProjections:
    """Test suite for chaos projections of shell averages."""

    def setup_method(self):
        """Set up test fixtures."""
        self.family = sample_family(8, 1, 256)

    @pytest.mark.parametrize("k", [1, 2])
    def test_reconstruction(self, k):
        """Test the chaos components sum back to F_j."""
        for j in range(0, 9):
            F = shell_moment(self.family, j, k)
            parts = sum(value for _, value in chaos_project_F(self.family, j, k))
            assert abs(parts - F) <= 1e-12 * max(1.0, F)

    def test_first_order_centering(self):
        """Test k = 1 gives F^(0) = 2 #S_j / 2^j and F^(1) = X_j^(2) - F^(0)."""
        for j in (0, 3, 8):
            components = dict(chaos_project_F(self.family, j, 1))
            stat = x_statistic(self.family, j, 2.0)
            assert components[0] == pytest.approx(2.0 * stat.shell_size / 2.0 ** j)
            assert components[1] == pytest.approx(stat.value - components[0], rel=1e-12, abs=1e-12)

    def test_constant_term(self):
        """Test F^(0) = 8 #S_j / 2^j for k = 2."""
        components = dict(chaos_project_F(self.family, 5, 2))
        assert components[0] == pytest.approx(8.0)

    def test_unsupported_order(self):
        """Test only k = 1, 2 are projected."""
        with pytest.raises(UnsupportedOrderError):
            chaos_project_F(self.family, 3, 3)


class TestHypercontractivity:
    """Test suite for hypercontractive moment checks."""

    def setup_method(self):
        """Set up test fixtures."""
        self.gaussians = np.random.default_rng(0).standard_normal(20_000)

    def test_first_chaos_passes(self):
        """Test ||g||_4 / ||g||_2 = 3^{1/4} <= sqrt(3)."""
        report = hypercontractivity_check(self.gaussians, 1, 4.0)
        assert report.passed
        assert report.ratio == pytest.approx(3.0 ** 0.25, rel=0.05)
        assert report.bound == pytest.approx(np.sqrt(3.0))

    def test_pair_free_block(self):
        """Test the fourth-order block II_4 stays below (4 - 1)^{4/2}."""
        samples = [pair_free_fast(sample_family(seed, 1, 16), 4) for seed in range(10_000)]
        report = hypercontractivity_check(samples, 4, 4.0)
        assert report.passed
        assert report.bound == pytest.approx(9.0)

    def test_violation_detected(self):
        """Test an order-0 bound of 1 is violated by a Gaussian."""
        report = hypercontractivity_check(self.gaussians, 0, 4.0)
        assert not report.passed

    def test_too_few_samples(self):
        """Test the sample floor."""
        with pytest.raises(InsufficientSamplesError):
            hypercontractivity_check(self.gaussians[:100], 1, 4.0)

    def test_q_below_two(self):
        """Test q must be at least 2."""
        with pytest.raises(InvalidArgumentError):
            hypercontractivity_check(self.gaussians, 1, 1.5)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
