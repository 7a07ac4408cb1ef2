"""
Norms Module

Sequence-side and physical-side norms of a SpectralPath:

- Fourier-Lebesgue FL^{s,q}; on the torus the modulation space M^{p,q}_s and
  the Wiener amalgam W^{p,q}_s coincide with it, so those specs evaluate
  through the same code path.
- Fourier-Besov b^s_{p,q}: l^q over dyadic shells of l^p norms of the
  weighted coefficients, with either <n>^s or 2^{js} weights.
- Classical Besov B^s_{p,q} (d = 1): l^q over j of 2^{js} ||phi_j(D) u||_{L^p},
  each block synthesized on an oversampled grid.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np

import sys
sys.path.append('..')
from config.settings import NORM_SETTINGS, SPECTRAL_SETTINGS
from core.errors import InvalidArgumentError, UnsupportedDimensionError
from core.lattice import japanese_bracket
from core.partition import DyadicPartition, PartitionMode
from core.spectral import (
    SpectralPath, TimeGrid, check_grid, lp_quadrature, synthesize_coefficients
)

INF = float('inf')


class NormSpace(Enum):
    """Function spaces the toolkit can evaluate."""
    FOURIER_LEBESGUE = "FourierLebesgue"
    MODULATION = "Modulation"
    WIENER_AMALGAM = "WienerAmalgam"
    FOURIER_BESOV = "FourierBesov"
    BESOV = "Besov"

    @property
    def short(self) -> str:
        return {
            NormSpace.FOURIER_LEBESGUE: "fl",
            NormSpace.MODULATION: "mod",
            NormSpace.WIENER_AMALGAM: "wam",
            NormSpace.FOURIER_BESOV: "fbesov",
            NormSpace.BESOV: "besov",
        }[self]

    @property
    def is_fourier_lebesgue_like(self) -> bool:
        return self in (NormSpace.FOURIER_LEBESGUE, NormSpace.MODULATION,
                        NormSpace.WIENER_AMALGAM)


_PLACEHOLDERS = {"", "·", "-", "_", "*", "none"}


def parse_exponent(text: str) -> Optional[float]:
    """Parse a p/q field: "inf" is infinity, a placeholder means unused."""
    text = str(text).strip().lower()
    if text in _PLACEHOLDERS:
        return None
    if text in ("inf", "infinity", "∞"):
        return INF
    try:
        return float(text)
    except ValueError:
        raise InvalidArgumentError(f"cannot parse exponent {text!r}")


def format_exponent(value: Optional[float]) -> str:
    if value is None:
        return "·"
    if np.isinf(value):
        return "inf"
    return f"{value:g}"


def check_exponent(name: str, value: float):
    if value is None or not (value >= 1):
        raise InvalidArgumentError(f"{name} must be in [1, inf] (got {value})", {name: value})


@dataclass(frozen=True)
class NormSpec:
    """(space, s, p, q, dim) identifying one norm."""
    space: NormSpace
    s: float
    p: Optional[float]
    q: float
    dim: int = 1

    def __post_init__(self):
        check_exponent("q", self.q)
        if self.p is not None:
            check_exponent("p", self.p)
        elif not self.space.is_fourier_lebesgue_like:
            raise InvalidArgumentError(f"{self.space.value} needs an explicit p")
        if self.space == NormSpace.BESOV and self.dim != 1:
            raise UnsupportedDimensionError("Besov norms are only defined for dim = 1")

    @classmethod
    def parse(cls, text: str, dim: int = 1) -> 'NormSpec':
        """Parse "space:s:p:q", e.g. "fbesov:0.5:2:inf" or "fl:0.3:·:2"."""
        parts = str(text).strip().split(":")
        if len(parts) != 4:
            raise InvalidArgumentError(f"norm spec {text!r} is not of the form space:s:p:q")
        key = parts[0].strip().lower()
        aliases = NORM_SETTINGS['space_aliases']
        if key not in aliases:
            raise InvalidArgumentError(f"unknown space {parts[0]!r}")
        try:
            s = float(parts[1])
        except ValueError:
            raise InvalidArgumentError(f"cannot parse regularity {parts[1]!r}")
        return cls(NormSpace(aliases[key]), s, parse_exponent(parts[2]),
                   parse_exponent(parts[3]), dim)

    def __str__(self) -> str:
        return f"{self.space.short}:{self.s:g}:{format_exponent(self.p)}:{format_exponent(self.q)}"

    @property
    def effective_p(self) -> float:
        """The exponent that controls the dyadic threshold."""
        if self.space.is_fourier_lebesgue_like:
            return self.q
        return self.p


def _lp_vector(values: np.ndarray, p: float) -> float:
    """l^p norm of a nonnegative vector without overflow."""
    values = np.abs(np.asarray(values, dtype=np.float64))
    if values.size == 0:
        return 0.0
    peak = float(np.max(values))
    if np.isinf(p) or peak == 0.0 or np.isinf(peak):
        return peak
    return peak * float(np.sum((values / peak) ** p)) ** (1.0 / p)


def fl_norm(path: SpectralPath, s: float, q: float) -> float:
    """
    Fourier-Lebesgue norm (sum_n <n>^{sq} |u_n|^q)^{1/q}; sup when q = inf.
    """
    check_exponent("q", q)
    return _lp_vector(japanese_bracket(path.points) ** s * np.abs(path.coeffs), q)


def fourier_besov_blocks(path: SpectralPath, s: float, p: float,
                         partition: DyadicPartition = None,
                         weight: str = None) -> np.ndarray:
    """Per-shell l^p norms ||w_n phi_j(n) u_n||_{l^p}, j = 0..jmax."""
    check_exponent("p", p)
    weight = weight or NORM_SETTINGS['default_weight']
    partition = partition or DyadicPartition.covering(path.truncation)
    partition.check_coverage(path.truncation)
    windows = partition.windows(path.points)
    if weight == "dyadic":
        scale = 2.0 ** (s * np.arange(partition.jmax + 1))[:, None]
        weighted = scale * windows * np.abs(path.coeffs)[None, :]
    elif weight == "bracket":
        weighted = windows * (japanese_bracket(path.points) ** s * np.abs(path.coeffs))[None, :]
    else:
        raise InvalidArgumentError(f"weight must be 'bracket' or 'dyadic' (got {weight!r})")
    return np.array([_lp_vector(row, p) for row in weighted])


def fourier_besov_norm(path: SpectralPath, s: float, p: float, q: float,
                       partition: DyadicPartition = None, weight: str = None) -> float:
    """
    Fourier-Besov norm || ||<n>^s phi_j(n) u_n||_{l^p_n} ||_{l^q_j}.

    Args:
        path: SpectralPath (any dimension)
        s: Regularity
        p, q: Exponents in [1, inf]
        partition: DyadicPartition covering the truncation (default: sharp)
        weight: "bracket" for <n>^s, "dyadic" for 2^{js}
    """
    check_exponent("q", q)
    return _lp_vector(fourier_besov_blocks(path, s, p, partition, weight), q)


def littlewood_paley_blocks(path: SpectralPath, partition: DyadicPartition,
                            M: int) -> List[TimeGrid]:
    """phi_j(D) u synthesized on an M-point grid for every shell."""
    if path.dim != 1:
        raise UnsupportedDimensionError(
            f"Littlewood-Paley synthesis needs dim = 1 (got {path.dim})", {"dim": path.dim}
        )
    partition.check_coverage(path.truncation)
    partition.check_unity(path.points)
    actual = check_grid(M, partition.radius)
    windows = partition.windows(path.points)
    frequencies = path.points[:, 0]
    return [
        TimeGrid(values=synthesize_coefficients(frequencies, windows[j] * path.coeffs, actual),
                 requested_m=M)
        for j in range(partition.jmax + 1)
    ]


def besov_norm(path: SpectralPath, s: float, p: float, q: float,
               partition: DyadicPartition = None, M: int = None) -> float:
    """
    Classical Besov norm || 2^{js} ||phi_j(D) u||_{L^p} ||_{l^q_j}, with the
    L^p norm taken by normalized quadrature on an oversampled grid.
    """
    check_exponent("p", p)
    check_exponent("q", q)
    partition = partition or DyadicPartition.covering(path.truncation, PartitionMode.SMOOTH)
    if M is None:
        M = SPECTRAL_SETTINGS['oversampling'] * partition.radius
    blocks = littlewood_paley_blocks(path, partition, M)
    terms = np.array([2.0 ** (s * j) * lp_quadrature(block.values, p)
                      for j, block in enumerate(blocks)])
    return _lp_vector(terms, q)


def evaluate_norm(spec: NormSpec, path: SpectralPath,
                  partition: DyadicPartition = None, M: int = None) -> float:
    """Dispatch a NormSpec to the matching norm routine."""
    if spec.space.is_fourier_lebesgue_like:
        return fl_norm(path, spec.s, spec.q)
    if spec.space == NormSpace.FOURIER_BESOV:
        return fourier_besov_norm(path, spec.s, spec.p, spec.q, partition)
    return besov_norm(path, spec.s, spec.p, spec.q, partition, M)
