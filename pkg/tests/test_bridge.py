"""
Tests for the Brownian Bridge Cross-Validation
"""

import pytest
import numpy as np
import sys
sys.path.insert(0, '..')

from config.settings import BRIDGE_SETTINGS
from core.bridge import (
    BridgePath, bridge_to_spectrum, covariance_report, expected_second_moment,
    fourier_wiener_to_bridge, fourth_moment_ratio, levy_experiment, sample_bridge,
    sample_bridge_spectra, spectrum_to_gaussians, unit_interval_samples
)
from core.errors import InsufficientSamplesError, InvalidArgumentError, UndersampledError
from core.lattice import lattice_points
from core.spectral import gaussian_stream, sample_family, sample_path


class TestBridgePath:
    """Test suite for time-domain bridge construction."""

    def setup_method(self):
        """Set up test fixtures."""
        self.path = sample_bridge(42, 256)

    def test_loop_closes(self):
        """Test beta(0) = beta(2 pi) = 0."""
        assert self.path.beta[0] == 0
        assert self.path.periodicity_residual <= 1e-12

    def test_loop_is_centered(self):
        """Test u has zero mean."""
        assert abs(np.mean(self.path.u)) <= 1e-12

    def test_increment_variance(self):
        """Test increments have variance 2 * 2 pi / M."""
        increments = np.concatenate([sample_bridge(s, 1024).increments for s in range(20)])
        energy = np.abs(increments) ** 2
        se = np.std(energy, ddof=1) / np.sqrt(energy.size)
        assert abs(np.mean(energy) - 4.0 * np.pi / 1024) <= 5 * se

    def test_supplied_increments(self):
        """Test explicit increments of the wrong length are rejected."""
        with pytest.raises(InvalidArgumentError):
            sample_bridge(0, 16, increments=np.ones(8))

    def test_grid_size(self):
        """Test M < 2 is rejected."""
        with pytest.raises(InvalidArgumentError):
            sample_bridge(0, 1)
        with pytest.raises(InvalidArgumentError):
            sample_bridge(1, 0)

    def test_default_grid_size(self):
        """Test an omitted M takes the configured grid size."""
        assert sample_bridge(3).grid_size == BRIDGE_SETTINGS['default_grid_size']

    @pytest.mark.parametrize("M", [256, 4096])
    def test_periodicity_residual_scale(self, M):
        """Test |beta(2 pi) - beta(0)| <= 1e-9 sqrt(M) over 100 seeds."""
        worst = max(sample_bridge(seed, M).periodicity_residual for seed in range(100))
        assert worst <= 1e-9 * np.sqrt(M)


class TestBridgeSpectrum:
    """Test suite for the bridge DFT and the Fourier-Wiener conversion."""

    def test_injected_mode(self):
        """Test exp(it) gives c_1 = 1 and nothing else."""
        M = 64
        t = 2.0 * np.pi * np.arange(M) / M
        spectrum = bridge_to_spectrum(BridgePath.from_loop(np.exp(1j * t)), 8)
        frequencies = spectrum.points[:, 0]
        assert spectrum.coeffs[frequencies == 1][0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.abs(spectrum.coeffs[frequencies != 1]) <= 1e-10)

    def test_undersampled(self):
        """Test N > M / 8 is rejected."""
        with pytest.raises(UndersampledError):
            bridge_to_spectrum(sample_bridge(0, 64), 16)

    def test_conversion_recovers_draws(self):
        """Test sqrt(2 pi) i n c_n returns g_n after the convention change."""
        path = sample_path(9, 16, 1.0)
        gaussians = spectrum_to_gaussians(fourier_wiener_to_bridge(path))
        assert np.allclose(gaussians, sample_family(9, 1, 16).draws, rtol=1e-12)

    def test_conversion_needs_brownian_exponent(self):
        """Test the conversion is only defined for alpha = 1."""
        with pytest.raises(InvalidArgumentError):
            fourier_wiener_to_bridge(sample_path(9, 16, 0.5))

    def test_expected_second_moment(self):
        """Test E|c_n|^2 = 1 / (pi n^2)."""
        assert expected_second_moment(1) == pytest.approx(1.0 / np.pi)
        assert expected_second_moment(3) == pytest.approx(1.0 / (9.0 * np.pi))


class TestBridgeStatistics:
    """Test suite for the Monte Carlo bridge checks."""

    def setup_method(self):
        """Set up test fixtures."""
        self.N = 8
        self.spectra = sample_bridge_spectra(2000, 512, self.N, seed=3)
        self.frequencies = lattice_points(1, self.N)[:, 0]

    def test_shape(self):
        """Test one row of 2N coefficients per sample."""
        assert self.spectra.shape == (2000, 2 * self.N)

    def test_covariance_diagonal(self):
        """Test E|c_n|^2 within five standard errors of 1 / (pi n^2)."""
        entries = covariance_report(self.spectra, self.frequencies, [1, 2, 5])
        for entry in entries:
            if entry.m == entry.n:
                assert entry.deviation_in_se <= 5.0
        assert len(entries) == 9

    def test_covariance_row_keeps_imaginary_part(self):
        """Test rows carry both parts of E[c_m conj(c_n)]."""
        entry = covariance_report(self.spectra, self.frequencies, [1, 2])[1]
        row = entry.to_row()
        assert list(row) == ["m", "n", "re", "im", "se", "expected"]
        assert row["re"] == entry.value.real
        assert row["im"] == entry.value.imag
        assert row["im"] != 0.0

    def test_fourth_moment(self):
        """Test E|g|^4 / (E|g|^2)^2 is close to 2."""
        assert fourth_moment_ratio(gaussian_stream(6, 100_000)) == pytest.approx(2.0, abs=0.05)

    def test_too_few_samples(self):
        """Test the covariance report needs 1000 samples by default."""
        with pytest.raises(InsufficientSamplesError):
            covariance_report(self.spectra[:10], self.frequencies, [1])

    def test_unknown_frequency(self):
        """Test a frequency outside the spectrum is rejected."""
        with pytest.raises(InvalidArgumentError):
            covariance_report(self.spectra, self.frequencies, [20])


class TestLevy:
    """Test suite for the Levy modulus experiment."""

    def test_ratios(self):
        """Test Levy ratios are positive and of order one."""
        ratios = levy_experiment([2.0 ** -4, 2.0 ** -6], 20, M=4096, seed=1)
        assert ratios.shape == (20, 2)
        assert np.all(ratios > 0)
        assert 0.3 < np.median(ratios) < 2.0

    def test_eps_range(self):
        """Test eps must lie in (1/M, 1)."""
        with pytest.raises(InvalidArgumentError):
            levy_experiment([1.0 / 8192], 2, M=4096)

    def test_zero_grid_size(self):
        """Test M = 0 is rejected instead of falling back to the default."""
        with pytest.raises(InvalidArgumentError):
            levy_experiment([0.1], 2, M=0)

    def test_stable_under_halving(self):
        """Test the median ratio moves by less than 30% when eps is halved."""
        ratios = levy_experiment([2.0 ** -6, 2.0 ** -7], 40, M=4096, seed=5)
        coarse, fine = np.median(ratios, axis=0)
        assert abs(fine - coarse) / coarse < 0.3

    def test_loop_only_path(self):
        """Test a periodic sample has no time-domain bridge."""
        with pytest.raises(InvalidArgumentError):
            unit_interval_samples(BridgePath.from_loop(np.ones(8)))


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
