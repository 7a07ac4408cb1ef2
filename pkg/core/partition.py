"""
Dyadic Partition Module

Sharp shells S_j = {2^{j-1} < |n| <= 2^j} and smooth Littlewood-Paley windows
phi_0, phi_j(xi) = phi(2^{-j} xi) summing to one on the retained lattice.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List

import numpy as np

import sys
sys.path.append('..')
from config.settings import NORM_SETTINGS
from core.errors import CoverageError, InvalidArgumentError, NumericsError
from core.lattice import euclidean_norms, shell_indices


class PartitionMode(Enum):
    """Shell indicator or smooth window."""
    SHARP = "sharp"
    SMOOTH = "smooth"


def _transition(x: np.ndarray) -> np.ndarray:
    """exp(-1/x) for x > 0, else 0; the building block of the mollifier."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_cutoff(r: np.ndarray) -> np.ndarray:
    """
    C-infinity radial cutoff psi: 1 on r <= 1, 0 on r >= 2, monotone between.
    """
    r = np.asarray(r, dtype=np.float64)
    up = _transition(2.0 - r)
    down = _transition(r - 1.0)
    return up / (up + down)


def window_phi0(r: np.ndarray) -> np.ndarray:
    """phi_0 = psi, supported in |xi| <= 2."""
    return smooth_cutoff(r)


def window_phi(r: np.ndarray) -> np.ndarray:
    """phi(xi) = psi(xi) - psi(2 xi), supported in 1/2 <= |xi| <= 2."""
    return smooth_cutoff(r) - smooth_cutoff(2.0 * r)


@dataclass
class DyadicPartition:
    """Shell structure up to 2^jmax."""
    mode: PartitionMode
    jmax: int

    @classmethod
    def covering(cls, N: int, mode: PartitionMode = None) -> 'DyadicPartition':
        """Smallest partition whose top shell reaches radius N (mode defaults from settings)."""
        if N < 1:
            raise InvalidArgumentError(f"N must be >= 1 (got {N})")
        jmax = int(np.ceil(np.log2(N))) if N > 1 else 0
        while 2 ** jmax < N:
            jmax += 1
        if mode is None:
            mode = NORM_SETTINGS['partition_mode']
        if isinstance(mode, str):
            mode = PartitionMode(mode.lower())
        return cls(mode=mode, jmax=jmax)

    @property
    def radius(self) -> int:
        return 2 ** self.jmax

    @property
    def shells(self) -> List[int]:
        return list(range(self.jmax + 1))

    def check_coverage(self, truncation: int):
        if truncation > self.radius:
            raise CoverageError(
                f"partition reaches |n| <= {self.radius} but the spectrum goes to {truncation}",
                {"jmax": self.jmax, "N": truncation}
            )

    def window(self, points: np.ndarray, j: int) -> np.ndarray:
        """Values of the j-th window at the lattice points."""
        if self.mode == PartitionMode.SHARP:
            return (shell_indices(points) == j).astype(np.float64)
        r = euclidean_norms(points)
        if j == 0:
            return window_phi0(r)
        return window_phi(r / 2.0 ** j)

    def windows(self, points: np.ndarray) -> np.ndarray:
        """Array of shape (jmax + 1, K) with every window sampled on the points."""
        if self.mode == PartitionMode.SHARP:
            j = shell_indices(points)
            return (j[None, :] == np.arange(self.jmax + 1)[:, None]).astype(np.float64)
        # telescoping form psi(2^{-j} r) - psi(2^{-j+1} r) keeps the sum exact
        r = euclidean_norms(points)
        cut = np.array([smooth_cutoff(r / 2.0 ** j) for j in range(self.jmax + 1)])
        out = cut.copy()
        out[1:] -= cut[:-1]
        return out

    def check_unity(self, points: np.ndarray, atol: float = None):
        """Raise NumericsError unless the windows sum to one at every point."""
        atol = NORM_SETTINGS['unity_atol'] if atol is None else atol
        gap = float(np.max(np.abs(self.windows(points).sum(axis=0) - 1.0), initial=0.0))
        if gap > atol:
            raise NumericsError(
                f"{self.mode.value} windows miss unity by {gap:.3g} (atol {atol:g})",
                {"gap": gap, "atol": atol, "jmax": self.jmax}
            )
