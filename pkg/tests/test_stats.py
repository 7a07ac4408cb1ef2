"""
Tests for Shell Statistics
"""

import pytest
import numpy as np
import sys
sys.path.insert(0, '..')

from core.errors import CoverageError, InvalidArgumentError
from core.lattice import lattice_points
from core.spectral import GaussianFamily, sample_family
from core.stats import (
    block_sum, c_p_exact, decay_ratio, levy_ratio, x_statistic, y_statistic, z_statistic
)


def unit_family(N: int) -> GaussianFamily:
    """Family with every g_n = 1."""
    return GaussianFamily.from_draws(np.ones(len(lattice_points(1, N))), dim=1, truncation=N)


class TestMoments:
    """Test suite for exact Gaussian moments."""

    def test_known_values(self):
        """Test c_p = E|g|^p for Var(g) = 2."""
        assert c_p_exact(0) == pytest.approx(1.0)
        assert c_p_exact(1) == pytest.approx(np.sqrt(np.pi / 2.0))
        assert c_p_exact(2) == pytest.approx(2.0)
        assert c_p_exact(4) == pytest.approx(8.0)
        assert c_p_exact(6) == pytest.approx(48.0)

    def test_negative_order(self):
        """Test negative moment orders are rejected."""
        with pytest.raises(InvalidArgumentError):
            c_p_exact(-1)


class TestShellStatistics:
    """Test suite for X, Y and Z statistics."""

    def setup_method(self):
        """Set up test fixtures."""
        self.family = sample_family(31, 1, 4096)

    def test_x_on_unit_family(self):
        """Test X_j^(p) = #S_j / 2^j when every |g_n| = 1."""
        family = unit_family(64)
        assert x_statistic(family, 0, 3.0).value == pytest.approx(2.0)
        for j in range(1, 7):
            stat = x_statistic(family, j, 3.0)
            assert stat.value == pytest.approx(1.0)
            assert stat.normalized_count == 1.0

    def test_x_converges_to_c_p(self):
        """Test X_12^(2) is within five standard errors of c_2."""
        stat = x_statistic(self.family, 12, 2.0)
        se = 2.0 / np.sqrt(2 ** 12)
        assert abs(stat.value - c_p_exact(2.0)) <= 5 * se

    def test_telescoping_identity(self):
        """Test X_j = 2 Y_{j+1} - Y_j."""
        for p in (1.0, 2.0, 4.0):
            for j in range(0, 8):
                x = x_statistic(self.family, j, p).value
                y = 2.0 * y_statistic(self.family, j + 1, p) - y_statistic(self.family, j, p)
                assert x == pytest.approx(y, rel=1e-12)

    def test_coverage(self):
        """Test a shell beyond the truncation is rejected."""
        with pytest.raises(CoverageError):
            x_statistic(sample_family(31, 1, 16), 5, 2.0)

    def test_z_of_single_mode(self):
        """Test Z_j^(q) = 2^{-jq/2} for one unit draw in S_j."""
        family = GaussianFamily.from_draws({4: 1.0}, dim=1, truncation=4)
        for q in (1.0, 2.0):
            assert z_statistic(family, 2, q) == pytest.approx(2.0 ** (-q), rel=1e-12)

    @pytest.mark.parametrize("theta", [0.3, np.pi / 2, 2.0])
    def test_z_invariant_under_rotation(self, theta):
        """Test g_n -> e^{i theta} g_n leaves Z_j^(q) unchanged."""
        rotated = self.family.rotate(theta)
        for j in (3, 6, 9):
            for q in (1.0, 2.0):
                assert z_statistic(rotated, j, q) == pytest.approx(
                    z_statistic(self.family, j, q), rel=1e-12)

    def test_block_sum_grid(self):
        """Test the block sum is sampled on at least 8 * 2^j points."""
        grid = block_sum(self.family, 5)
        assert grid.m >= 8 * 2 ** 5


class TestDecayAndLevy:
    """Test suite for the decay ratio and the Levy ratio."""

    def test_decay_ratio_unit_family(self):
        """Test M^{2 delta} max / sum = 2^{2 delta j} / 2^j for equal draws."""
        family = unit_family(16)
        assert decay_ratio(family, 4, 0.25) == pytest.approx(4.0 / 16.0)

    def test_decay_ratio_small_for_gaussians(self):
        """Test the ratio at delta = 0.25 is well below 1 at j = 12."""
        assert decay_ratio(sample_family(3, 1, 4096), 12, 0.25) < 0.5

    def test_decay_ratio_delta_range(self):
        """Test delta must lie in [0, 1/2)."""
        with pytest.raises(InvalidArgumentError):
            decay_ratio(unit_family(16), 4, 0.5)

    def test_levy_ratio_linear_path(self):
        """Test a linear path gives eps / sqrt(-2 eps log eps)."""
        M = 1000
        samples = np.arange(M + 1) / M
        eps = 0.1
        expected = eps / np.sqrt(-2.0 * eps * np.log(eps))
        assert levy_ratio(samples, eps, 1.0 / M) == pytest.approx(expected, rel=1e-9)

    def test_levy_ratio_eps_range(self):
        """Test eps must exceed the grid spacing."""
        with pytest.raises(InvalidArgumentError):
            levy_ratio(np.zeros(101), 0.001, 0.01)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
