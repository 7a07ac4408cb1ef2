"""
Shell Statistics Module

Scalar statistics behind the regularity thresholds:

- X_j^(p) = 2^{-j} sum_{S_j} |g_n|^p, converging to c_p = E|g|^p
- Y_j^(p) = 2^{-j} sum_{1 <= |n| <= 2^{j-1}} |g_n|^p, with X_j = 2 Y_{j+1} - Y_j
- block sums X~_j(t) = 2^{-j/2} sum_{S_j} g_n e^{int} and Z_j^(q) = ||X~_j||_{L^1}^q
- the max/sum decay ratio over a dyadic shell
- the Levy modulus-of-continuity ratio of a sampled path

All counts keep the explicit factor #S_j / 2^j (in d = 1, #S_0 = 2).
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy import special

import sys
sys.path.append('..')
from config.settings import SPECTRAL_SETTINGS
from core.errors import (
    CoverageError, InvalidArgumentError, UnsupportedDimensionError
)
from core.lattice import squared_norms
from core.spectral import (
    GaussianFamily, TimeGrid, check_grid, lp_quadrature, synthesize_coefficients
)


@dataclass
class ShellStatistic:
    """X_j^(p) for one family."""
    j: int
    p: float
    value: float
    shell_size: int
    seed: int = None

    @property
    def normalized_count(self) -> float:
        """#S_j / 2^j."""
        return self.shell_size / 2.0 ** self.j

    def to_row(self, statistic: str = "X") -> Dict:
        return {"statistic": statistic, "j": self.j, "p_or_q": self.p,
                "seed": self.seed, "value": self.value}


def c_p_exact(p: float) -> float:
    """E|g|^p = 2^{p/2} Gamma(p/2 + 1) for Var(g) = 2."""
    if p < 0:
        raise InvalidArgumentError(f"moment order must be >= 0 (got {p})", {"p": p})
    return float(2.0 ** (p / 2.0) * special.gamma(p / 2.0 + 1.0))


def _require_shell(family: GaussianFamily, j: int):
    if j < 0:
        raise InvalidArgumentError(f"shell index must be >= 0 (got {j})")
    if not family.covers_shell(j):
        raise CoverageError(
            f"family truncated at N={family.truncation} does not cover shell {j}",
            {"N": family.truncation, "j": j}
        )


def x_statistic(family: GaussianFamily, j: int, p: float) -> ShellStatistic:
    """X_j^(p) = 2^{-j} sum_{S_j} |g_n|^p."""
    _require_shell(family, j)
    if p < 0:
        raise InvalidArgumentError(f"p must be >= 0 (got {p})")
    _, draws = family.shell(j)
    value = float(np.sum(np.abs(draws) ** p)) / 2.0 ** j
    return ShellStatistic(j=j, p=p, value=value, shell_size=len(draws), seed=family.seed)


def y_statistic(family: GaussianFamily, j: int, p: float) -> float:
    """Y_j^(p) = 2^{-j} sum_{1 <= |n| <= 2^{j-1}} |g_n|^p (empty for j = 0)."""
    if j < 0:
        raise InvalidArgumentError(f"shell index must be >= 0 (got {j})")
    if j == 0:
        return 0.0
    if family.truncation < 2 ** (j - 1):
        raise CoverageError(f"family does not reach |n| = {2 ** (j - 1)}")
    inside = squared_norms(family.points) <= 4 ** (j - 1)
    return float(np.sum(np.abs(family.draws[inside]) ** p)) / 2.0 ** j


def block_sum(family: GaussianFamily, j: int, M: int = None) -> TimeGrid:
    """
    X~_j(t_k) = 2^{-j/2} sum_{S_j} g_n e^{i n t_k} on an M-point grid.
    """
    if family.dim != 1:
        raise UnsupportedDimensionError(
            f"block sums need dim = 1 (got {family.dim})", {"dim": family.dim}
        )
    _require_shell(family, j)
    top = 2 ** j
    if M is None:
        M = SPECTRAL_SETTINGS['oversampling'] * top
    actual = check_grid(M, top)
    points, draws = family.shell(j)
    values = synthesize_coefficients(points[:, 0], draws * 2.0 ** (-j / 2.0), actual)
    return TimeGrid(values=values, requested_m=M)


def z_statistic(family: GaussianFamily, j: int, q: float, M: int = None) -> float:
    """Z_j^(q) = ||X~_j||_{L^1_t}^q under the normalized measure."""
    if q <= 0:
        raise InvalidArgumentError(f"q must be > 0 (got {q})")
    grid = block_sum(family, j, M)
    return lp_quadrature(grid.values, 1.0) ** q


def decay_ratio(family: GaussianFamily, j: int, delta: float) -> float:
    """M^{2 delta} max_{S_j} |g_n|^2 / sum_{S_j} |g_n|^2 with M = 2^j."""
    if not (0.0 <= delta < 0.5):
        raise InvalidArgumentError(f"delta must lie in [0, 1/2) (got {delta})")
    _require_shell(family, j)
    _, draws = family.shell(j)
    if draws.size == 0:
        raise CoverageError(f"shell {j} is empty")
    energy = np.abs(draws) ** 2
    total = float(np.sum(energy))
    if total == 0.0:
        return 0.0
    return float((2.0 ** j) ** (2.0 * delta) * np.max(energy) / total)


def levy_ratio(samples: np.ndarray, eps: float, spacing: float = None) -> float:
    """
    sup_{0 < t - t' <= eps} |b(t) - b(t')| / sqrt(-2 eps log eps) on a uniform
    grid. The sup runs over grid pairs only, so it is a lower bound for the
    continuum sup.

    Args:
        samples: Path values on [0, 1] (real or complex)
        eps: Window length in (spacing, 1)
        spacing: Grid step (default 1 / len(samples))
    """
    samples = np.asarray(samples)
    if spacing is None:
        spacing = 1.0 / len(samples)
    if eps >= 1.0 or eps <= spacing:
        raise InvalidArgumentError(
            f"eps must lie in (grid spacing, 1) (got eps={eps}, spacing={spacing})",
            {"eps": eps, "spacing": spacing}
        )
    max_lag = min(int(np.floor(eps / spacing + 1e-9)), len(samples) - 1)
    sup = 0.0
    for lag in range(1, max_lag + 1):
        sup = max(sup, float(np.max(np.abs(samples[lag:] - samples[:-lag]))))
    return sup / np.sqrt(-2.0 * eps * np.log(eps))
