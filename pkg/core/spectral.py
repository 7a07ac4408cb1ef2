"""
Spectral Module

Reproducible complex Gaussian families g_n on the punctured lattice and the
Fourier-Wiener series built from them:

    u(t) = sum_{0 < |n| <= N} g_n / |n|^alpha * e^{i n.t}

alpha = 1 is the Brownian loop, alpha = 1/2 the Benjamin-Ono field,
alpha = 0 white noise. Var(g_n) = 2 throughout.

Draws are keyed by (seed, n) through numpy's counter-based Philox generator,
so a coefficient never depends on N, on evaluation order or on worker count.
"""

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np
from scipy import fft as sfft

import sys
sys.path.append('..')
from config.settings import SPECTRAL_SETTINGS
from core.errors import (
    InvalidArgumentError, UnsupportedDimensionError, UndersampledError
)
from core.lattice import (
    lattice_points, flat_index, euclidean_norms, shell_mask, squared_norms
)
from utils.logger import get_logger

logger = get_logger(__name__)

SEED_MASK = (1 << 64) - 1


def philox_generator(seed: int, domain: int = 0, block: int = 0) -> np.random.Generator:
    """
    Generator for one block of a keyed stream. The key is (seed, domain), the
    block number sits in the second counter word so blocks never overlap.
    """
    if seed < 0 or seed > SEED_MASK:
        raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer (got {seed})")
    key = (int(seed) & SEED_MASK) | (int(domain) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=int(block) << 64))


def keyed_normals(seed: int, indices: np.ndarray, domain: int = 0,
                  block_size: int = None) -> np.ndarray:
    """
    Complex standard Gaussians (Var = 2) for each flat index, as a pure
    function of (seed, domain, index).
    """
    block_size = block_size or SPECTRAL_SETTINGS['block_size']
    indices = np.asarray(indices, dtype=np.int64)
    out = np.empty(indices.shape, dtype=np.complex128)
    blocks = indices // block_size
    offsets = indices - blocks * block_size
    for block in np.unique(blocks):
        mask = blocks == block
        normals = philox_generator(seed, domain, int(block)).standard_normal(2 * block_size)
        pos = offsets[mask]
        out[mask] = normals[2 * pos] + 1j * normals[2 * pos + 1]
    return out


def gaussian_stream(seed: int, count: int, domain: int = None,
                    block_size: int = None) -> np.ndarray:
    """
    keyed_normals(seed, arange(count), domain) generated block by block;
    for long contiguous runs of draws.
    """
    domain = SPECTRAL_SETTINGS['wick_domain'] if domain is None else domain
    block_size = block_size or SPECTRAL_SETTINGS['block_size']
    out = np.empty(count, dtype=np.complex128)
    for block, start in enumerate(range(0, count, block_size)):
        stop = min(start + block_size, count)
        normals = philox_generator(seed, domain, block).standard_normal(2 * block_size)
        out[start:stop] = normals[0:2 * (stop - start):2] + 1j * normals[1:2 * (stop - start):2]
    return out


@dataclass
class GaussianFamily:
    """Independent complex Gaussians g_n for 0 < |n| <= N."""
    seed: Optional[int]
    dim: int
    truncation: int
    points: np.ndarray
    draws: np.ndarray

    @classmethod
    def from_draws(cls, draws: Union[Dict, np.ndarray], dim: int = 1,
                   truncation: int = None) -> 'GaussianFamily':
        """
        Build a deterministic family (no seed), mainly for stubs. ``draws`` is
        either a mapping n -> value (n an int or a tuple) for 0 < |n| <= N,
        with missing entries set to zero, or an array aligned with
        lattice_points(dim, truncation).
        """
        if isinstance(draws, dict):
            keys = [k if isinstance(k, tuple) else (k,) for k in draws]
            if truncation is None:
                truncation = int(np.ceil(max(np.sqrt(sum(c * c for c in k)) for k in keys)))
            points = lattice_points(dim, truncation)
            values = np.zeros(len(points), dtype=np.complex128)
            lookup = {tuple(p): i for i, p in enumerate(points.tolist())}
            for key, value in zip(keys, draws.values()):
                if key not in lookup:
                    raise InvalidArgumentError(f"index {key} is outside the punctured lattice")
                values[lookup[key]] = value
            return cls(None, dim, truncation, points, values)

        points = lattice_points(dim, truncation)
        values = np.asarray(draws, dtype=np.complex128)
        if values.shape != (len(points),):
            raise InvalidArgumentError(
                f"expected {len(points)} draws for dim={dim}, N={truncation}"
            )
        return cls(None, dim, truncation, points, values.copy())

    @property
    def size(self) -> int:
        return len(self.draws)

    @property
    def norms(self) -> np.ndarray:
        return euclidean_norms(self.points)

    def covers_shell(self, j: int) -> bool:
        return self.truncation >= 2 ** j

    def shell_mask(self, j: int) -> np.ndarray:
        return shell_mask(self.points, j)

    def shell(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        """(points, draws) restricted to S_j."""
        mask = self.shell_mask(j)
        return self.points[mask], self.draws[mask]

    def restrict(self, N: int) -> 'GaussianFamily':
        """Sub-family for 0 < |n| <= N; entries are unchanged since draws are keyed by n."""
        if N > self.truncation:
            raise InvalidArgumentError(
                f"cannot extend a family truncated at {self.truncation} to {N}"
            )
        keep = squared_norms(self.points) <= N * N
        return GaussianFamily(self.seed, self.dim, N, self.points[keep], self.draws[keep])

    def rotate(self, theta: float) -> 'GaussianFamily':
        """Global phase rotation g_n -> e^{i theta} g_n."""
        return GaussianFamily(self.seed, self.dim, self.truncation,
                              self.points, self.draws * np.exp(1j * theta))

    def as_mapping(self) -> Dict:
        if self.dim == 1:
            return {int(p[0]): complex(v) for p, v in zip(self.points, self.draws)}
        return {tuple(int(c) for c in p): complex(v) for p, v in zip(self.points, self.draws)}


def sample_family(seed: int, dim: int, N: int, settings: Dict = None) -> GaussianFamily:
    """
    Sample g_n for 0 < |n| <= N.

    Args:
        seed: 64-bit master seed
        dim: Lattice dimension d >= 1
        N: Truncation radius N >= 1

    Returns:
        GaussianFamily whose entries depend only on (seed, n)
    """
    settings = settings or SPECTRAL_SETTINGS
    if N < 1 or dim < 1:
        raise InvalidArgumentError(
            f"sample_family needs N >= 1 and dim >= 1 (got N={N}, dim={dim})",
            {"N": N, "dim": dim}
        )
    points = lattice_points(dim, N)
    draws = keyed_normals(seed, flat_index(points), settings['family_domain'],
                          settings['block_size'])
    logger.debug(f"Sampled family seed={seed} dim={dim} N={N} ({len(points)} draws)")
    return GaussianFamily(int(seed), dim, N, points, draws)


@dataclass
class SpectralPath:
    """Truncated Fourier coefficients u_n of a random Fourier series."""
    dim: int
    truncation: int
    alpha: float
    points: np.ndarray
    coeffs: np.ndarray
    seed: Optional[int] = None

    @classmethod
    def from_mapping(cls, coeffs: Dict, dim: int = 1, truncation: int = None,
                     alpha: float = 0.0) -> 'SpectralPath':
        """Deterministic path from a mapping n -> u_n (missing entries are zero)."""
        family = GaussianFamily.from_draws(coeffs, dim=dim, truncation=truncation)
        return cls(dim, family.truncation, alpha, family.points, family.draws, None)

    @property
    def norms(self) -> np.ndarray:
        return euclidean_norms(self.points)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def scale(self, factor: complex) -> 'SpectralPath':
        return SpectralPath(self.dim, self.truncation, self.alpha, self.points,
                            self.coeffs * factor, self.seed)

    def high_pass(self, M0: float) -> 'SpectralPath':
        """Dirichlet projection onto |n| > M0 (the other coefficients are zeroed)."""
        keep = squared_norms(self.points) > M0 * M0
        return SpectralPath(self.dim, self.truncation, self.alpha, self.points,
                            np.where(keep, self.coeffs, 0.0), self.seed)

    def to_dict(self) -> Dict:
        rows = [[*map(int, p), float(c.real), float(c.imag)]
                for p, c in zip(self.points.tolist(), self.coeffs)]
        return {
            "dim": self.dim,
            "N": self.truncation,
            "alpha": self.alpha,
            "seed": self.seed,
            "coeffs": rows,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict) -> 'SpectralPath':
        dim, N = int(data["dim"]), int(data["N"])
        rows = np.asarray(data["coeffs"], dtype=np.float64).reshape(-1, dim + 2)
        points = lattice_points(dim, N)
        lookup = {tuple(p): i for i, p in enumerate(points.tolist())}
        coeffs = np.zeros(len(points), dtype=np.complex128)
        for row in rows:
            coeffs[lookup[tuple(int(c) for c in row[:dim])]] = row[dim] + 1j * row[dim + 1]
        return cls(dim, N, float(data["alpha"]), points, coeffs, data.get("seed"))


def build_path(family: GaussianFamily, alpha: float) -> SpectralPath:
    """u_n = g_n |n|^{-alpha} for every stored n."""
    if alpha < 0:
        raise InvalidArgumentError(f"alpha must be >= 0 (got {alpha})", {"alpha": alpha})
    weights = family.norms ** (-float(alpha))
    return SpectralPath(family.dim, family.truncation, float(alpha), family.points,
                        family.draws * weights, family.seed)


def sample_path(seed: int, N: int, alpha: float = None, dim: int = 1) -> SpectralPath:
    """Shortcut for build_path(sample_family(seed, dim, N), alpha)."""
    if alpha is None:
        alpha = SPECTRAL_SETTINGS['default_alpha']
    return build_path(sample_family(seed, dim, N), alpha)


@dataclass
class TimeGrid:
    """Samples u(t_k) at t_k = 2 pi k / M on [0, 2 pi)."""
    values: np.ndarray
    requested_m: Optional[int] = None

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def points(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.m) / self.m

    def lp_norm(self, p: float) -> float:
        """((1/M) sum_k |u_k|^p)^{1/p}, or max_k |u_k| for p = inf."""
        return lp_quadrature(self.values, p)


def lp_quadrature(values: np.ndarray, p: float) -> float:
    """Normalized-measure L^p quadrature on a uniform grid."""
    magnitudes = np.abs(values)
    if np.isinf(p):
        return float(np.max(magnitudes)) if magnitudes.size else 0.0
    if p < 1:
        raise InvalidArgumentError(f"p must be in [1, inf] (got {p})")
    peak = float(np.max(magnitudes)) if magnitudes.size else 0.0
    if peak == 0.0:
        return 0.0
    # factor the peak out so large p does not overflow
    return peak * float(np.mean((magnitudes / peak) ** p)) ** (1.0 / p)


def check_grid(M: int, top_frequency: int, oversampling: int = None) -> int:
    """Validate the oversampling contract and return a transform-friendly M."""
    oversampling = oversampling or SPECTRAL_SETTINGS['oversampling']
    if M < oversampling * top_frequency:
        raise UndersampledError(
            f"grid of {M} points is below {oversampling} x {top_frequency}",
            {"M": M, "required": oversampling * top_frequency}
        )
    return int(sfft.next_fast_len(int(M)))


def synthesize_coefficients(frequencies: np.ndarray, coeffs: np.ndarray, M: int) -> np.ndarray:
    """values[k] = sum_n c_n e^{i n t_k} on an M-point grid (no checks)."""
    spectrum = np.zeros(M, dtype=np.complex128)
    np.add.at(spectrum, np.mod(np.asarray(frequencies, dtype=np.int64), M), coeffs)
    return sfft.ifft(spectrum, norm="forward")


def synthesize(path: SpectralPath, M: int) -> TimeGrid:
    """
    Inverse discrete Fourier synthesis of a one-dimensional path.

    Args:
        path: SpectralPath with dim = 1
        M: Requested grid size, at least 8 N

    Returns:
        TimeGrid; its length may be rounded up to a fast FFT size
    """
    if path.dim != 1:
        raise UnsupportedDimensionError(
            f"synthesis is only defined for dim = 1 (got {path.dim})", {"dim": path.dim}
        )
    actual = check_grid(M, path.truncation)
    values = synthesize_coefficients(path.points[:, 0], path.coeffs, actual)
    return TimeGrid(values=values, requested_m=M)
