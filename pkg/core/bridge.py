"""
Brownian Bridge Module

Time-domain construction of the Brownian loop on [0, 2 pi) from exact
Gaussian increments, and its discrete Fourier coefficients. For the loop

    beta(t) = b(t) - t b(2 pi) / (2 pi),    u = beta - mean(beta),

the coefficients satisfy c_n = g_n / (sqrt(2 pi) i n) with Var(g_n) = 2, so
E|c_n|^2 = 1 / (pi n^2). All constant bookkeeping between the two
representations lives in the conversion functions below.
"""

from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import fft as sfft

import sys
sys.path.append('..')
from config.settings import BRIDGE_SETTINGS, MONTE_CARLO_SETTINGS, SPECTRAL_SETTINGS
from core.errors import InsufficientSamplesError, InvalidArgumentError, UndersampledError
from core.lattice import lattice_points
from core.montecarlo import run_samples
from core.spectral import SpectralPath, keyed_normals
from core.stats import levy_ratio
from utils.logger import get_logger

logger = get_logger(__name__)

TWO_PI = 2.0 * np.pi
SQRT_TWO_PI = np.sqrt(TWO_PI)


@dataclass
class BridgePath:
    """
    Sampled loop on the grid t_k = 2 pi k / M.

    b and beta hold M + 1 values (k = 0..M, both endpoints); u holds the M
    periodic samples k = 0..M-1.
    """
    grid_size: int
    increments: Optional[np.ndarray]
    b: Optional[np.ndarray]
    beta: Optional[np.ndarray]
    u: np.ndarray
    seed: Optional[int] = None

    @property
    def b_end(self) -> Optional[complex]:
        """b(2 pi); the g_0 term of the non-periodic decomposition is b(2 pi) / (2 pi)."""
        return None if self.b is None else complex(self.b[-1])

    @property
    def periodicity_residual(self) -> float:
        if self.beta is None:
            return 0.0
        return float(abs(self.beta[-1] - self.beta[0]))

    @classmethod
    def from_loop(cls, values: Sequence[complex]) -> 'BridgePath':
        """Wrap periodic samples u(t_k) directly (used for injected modes)."""
        values = np.asarray(values, dtype=np.complex128)
        if values.size < 2:
            raise InvalidArgumentError(f"need at least 2 grid points (got {values.size})")
        return cls(values.size, None, None, None, values - np.mean(values))


def sample_bridge(seed: int, M: int = None, increments: Sequence[complex] = None) -> BridgePath:
    """
    Brownian loop from iid complex increments of variance 2 * (2 pi / M).

    Args:
        seed: 64-bit seed (its own generator domain, apart from the spectral family)
        M: Grid size, at least 2
        increments: Replaces the sampled increments (stubs)
    """
    if M is None:
        M = BRIDGE_SETTINGS['default_grid_size']
    if M < 2:
        raise InvalidArgumentError(f"grid size must be >= 2 (got {M})", {"M": M})
    if increments is None:
        normals = keyed_normals(seed, np.arange(M), SPECTRAL_SETTINGS['bridge_domain'])
        increments = normals * np.sqrt(TWO_PI / M)
    else:
        increments = np.asarray(increments, dtype=np.complex128)
        if increments.shape != (M,):
            raise InvalidArgumentError(f"expected {M} increments (got {increments.shape})")

    b = np.concatenate(([0.0 + 0.0j], np.cumsum(increments)))
    t = TWO_PI * np.arange(M + 1) / M
    beta = b - t * b[-1] / TWO_PI
    loop = beta[:M]
    return BridgePath(M, increments, b, beta, loop - np.mean(loop), seed)


def bridge_to_spectrum(path: BridgePath, N: int) -> SpectralPath:
    """c_n = (1/M) sum_k u(t_k) e^{-i n t_k} for 0 < |n| <= N, with N <= M / 8."""
    oversampling = SPECTRAL_SETTINGS['oversampling']
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1 (got {N})")
    if oversampling * N > path.grid_size:
        raise UndersampledError(
            f"N={N} exceeds grid_size / {oversampling} = {path.grid_size // oversampling}",
            {"N": N, "M": path.grid_size}
        )
    spectrum = sfft.fft(path.u, norm="forward")
    points = lattice_points(1, N)
    coeffs = spectrum[np.mod(points[:, 0], path.grid_size)]
    return SpectralPath(1, N, 1.0, points, coeffs, path.seed)


def to_gaussian_scale(frequencies, coeffs) -> np.ndarray:
    """g_n = sqrt(2 pi) i n c_n; broadcasts over leading sample axes."""
    n = np.asarray(frequencies, dtype=np.float64)
    return SQRT_TWO_PI * 1j * n * np.asarray(coeffs)


def spectrum_to_gaussians(spectrum: SpectralPath) -> np.ndarray:
    return to_gaussian_scale(spectrum.points[:, 0], spectrum.coeffs)


def fourier_wiener_to_bridge(path: SpectralPath) -> SpectralPath:
    """
    Map u_n = g_n / |n| to the bridge convention c_n = g_n / (sqrt(2 pi) i n).
    Defined for the Brownian exponent alpha = 1 in d = 1.
    """
    if path.dim != 1 or path.alpha != 1.0:
        raise InvalidArgumentError(
            f"conversion needs dim = 1 and alpha = 1 (got dim={path.dim}, alpha={path.alpha})"
        )
    n = path.points[:, 0].astype(np.float64)
    coeffs = path.coeffs * np.abs(n) / (SQRT_TWO_PI * 1j * n)
    return SpectralPath(1, path.truncation, 1.0, path.points, coeffs, path.seed)


def expected_second_moment(n: int) -> float:
    """E|c_n|^2 = 2 / (2 pi n^2) = 1 / (pi n^2)."""
    return 1.0 / (np.pi * n * n)


def bridge_spectrum_sample(M: int, N: int, seed: int) -> np.ndarray:
    """Coefficients c_n, 0 < |n| <= N, of one sampled loop (lattice order)."""
    return bridge_to_spectrum(sample_bridge(seed, M), N).coeffs


def sample_bridge_spectra(samples: int, M: int, N: int, seed: int = None,
                          workers: int = None) -> np.ndarray:
    """Array (samples, 2N) of bridge coefficients over independent seeds."""
    seed = MONTE_CARLO_SETTINGS['default_seed'] if seed is None else seed
    logger.info(f"Sampling {samples} bridges (M={M}, N={N})")
    out = run_samples(partial(bridge_spectrum_sample, M, N), seed, samples, workers)
    return out.reshape(samples, 2 * N)


@dataclass
class CovarianceEntry:
    """Empirical E[c_m conj(c_n)] with its standard error."""
    m: int
    n: int
    value: complex
    se: float
    expected: float

    @property
    def deviation_in_se(self) -> float:
        if self.se == 0.0:
            return 0.0 if self.value == self.expected else float('inf')
        return abs(self.value - self.expected) / self.se

    def to_row(self) -> Dict:
        return {"m": self.m, "n": self.n, "re": float(self.value.real),
                "im": float(self.value.imag), "se": self.se, "expected": self.expected}


def covariance_report(spectra: np.ndarray, frequencies: Sequence[int], n_list: Sequence[int],
                      min_samples: int = None) -> List[CovarianceEntry]:
    """
    Second moments E[c_m conj(c_n)] for every pair in n_list.

    Args:
        spectra: Array (samples, K) of coefficients
        frequencies: Frequency of each column
        n_list: Frequencies to report
        min_samples: Lower bound on samples (default from settings)
    """
    min_samples = min_samples or MONTE_CARLO_SETTINGS['min_covariance_samples']
    spectra = np.atleast_2d(np.asarray(spectra, dtype=np.complex128))
    if spectra.shape[0] < min_samples:
        raise InsufficientSamplesError(
            f"covariance report needs at least {min_samples} samples (got {spectra.shape[0]})",
            {"required": min_samples, "got": spectra.shape[0]}
        )
    column = {int(f): i for i, f in enumerate(frequencies)}
    missing = [n for n in n_list if int(n) not in column]
    if missing:
        raise InvalidArgumentError(f"frequencies {missing} are not in the spectrum")

    count = spectra.shape[0]
    entries = []
    for m in n_list:
        for n in n_list:
            products = spectra[:, column[int(m)]] * np.conj(spectra[:, column[int(n)]])
            value = complex(np.mean(products))
            if count > 1:
                se = float(np.sqrt((np.var(products.real, ddof=1) + np.var(products.imag, ddof=1)) / count))
            else:
                se = 0.0
            expected = expected_second_moment(m) if m == n else 0.0
            entries.append(CovarianceEntry(int(m), int(n), value, se, expected))
    return entries


def fourth_moment_ratio(gaussians: np.ndarray) -> float:
    """E|g|^4 / (E|g|^2)^2; 2 for a complex Gaussian."""
    a = np.abs(np.asarray(gaussians)) ** 2
    return float(np.mean(a * a) / np.mean(a) ** 2)


# =============================================================================
# LEVY MODULUS
# =============================================================================

def unit_interval_samples(path: BridgePath) -> np.ndarray:
    """Re beta(2 pi s) / sqrt(2 pi) at s = k / M, k = 0..M: a standard real bridge on [0, 1]."""
    if path.beta is None:
        raise InvalidArgumentError("path has no time-domain loop")
    return path.beta.real / SQRT_TWO_PI


def levy_sample(M: int, eps_list: Sequence[float], seed: int) -> np.ndarray:
    """Levy ratios of one bridge for each eps."""
    samples = unit_interval_samples(sample_bridge(seed, M))
    return np.array([levy_ratio(samples, eps, 1.0 / M) for eps in eps_list])


def levy_experiment(eps_list: Sequence[float], seeds: int, M: int = None, seed: int = None,
                    workers: int = None) -> np.ndarray:
    """Array (seeds, len(eps_list)) of Levy ratios."""
    if M is None:
        M = BRIDGE_SETTINGS['levy_grid_size']
    if M < 2:
        raise InvalidArgumentError(f"grid size must be >= 2 (got {M})", {"M": M})
    seed = MONTE_CARLO_SETTINGS['default_seed'] if seed is None else seed
    for eps in eps_list:
        if not (1.0 / M < eps < 1.0):
            raise InvalidArgumentError(f"eps={eps} must lie in (1/M, 1) for M={M}")
    out = run_samples(partial(levy_sample, M, list(eps_list)), seed, seeds, workers)
    return out.reshape(seeds, len(eps_list))
