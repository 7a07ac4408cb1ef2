"""
Wiener Chaos Module

Hermite polynomials, Wick powers of |g|^2 (Var(g) = 2), the exact multilinear
split of L^{2k} block norms by resonance class, chaos projections of shell
averages, and hypercontractive moment checks.

For the block X~_j = 2^{-j/2} sum_{S_j} g_n e^{int},

    ||X~_j||_{L^{2k}}^{2k} = 2^{-kj} sum_{sum n = sum m} prod g_{n_a} prod conj(g_{m_b}).

Resonant tuples fall into four classes:
    paired     multiset{n} = multiset{m}, n's distinct        -> I
    error (i)  multiset{n} = multiset{m}, some n repeated     -> four of a kind or more
    pair-free  no n_a equals any m_b                          -> II
    error (ii) some n_a = m_b but the multisets differ        -> partial pairs
For k = 2 the closed form is I + II + III with I = 2 (X_j^(2))^2 and
III = -2^{-2j} sum |g_n|^4; error (ii) is always empty there.
"""

import math
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import sys
sys.path.append('..')
from config.settings import MONTE_CARLO_SETTINGS
from core.errors import (
    InsufficientSamplesError, InvalidArgumentError, UnsupportedDimensionError,
    UnsupportedOrderError
)
from core.spectral import GaussianFamily, lp_quadrature
from core.stats import _require_shell, block_sum
from utils.logger import get_logger

logger = get_logger(__name__)

CLASSES = ("paired", "error_i", "pair_free", "error_ii")


def hermite(n: int, x):
    """
    Probabilists' Hermite polynomial He_n(x), generating function
    exp(t x - t^2 / 2), via He_{n+1} = x He_n - n He_{n-1}.
    """
    if n < 0:
        raise InvalidArgumentError(f"Hermite degree must be >= 0 (got {n})")
    x = np.asarray(x, dtype=np.float64)
    prev, curr = np.ones_like(x), x.copy()
    if n == 0:
        return prev if prev.ndim else float(prev)
    for m in range(1, n):
        prev, curr = curr, x * curr - m * prev
    return curr if curr.ndim else float(curr)


def wick_abs2n(g, n: int):
    """
    Wick power :|g|^{2n}: for a complex Gaussian with Var(g) = 2:

        :|g|^2: = |g|^2 - 2
        :|g|^4: = |g|^4 - 8|g|^2 + 8
        :|g|^6: = |g|^6 - 18|g|^4 + 72|g|^2 - 48
    """
    a = np.abs(np.asarray(g)) ** 2
    if n == 1:
        out = a - 2.0
    elif n == 2:
        out = a * a - 8.0 * a + 8.0
    elif n == 3:
        out = a ** 3 - 18.0 * a * a + 72.0 * a - 48.0
    else:
        raise UnsupportedOrderError(f"Wick powers are implemented for n in {{1, 2, 3}} (got {n})")
    return out if np.ndim(out) else float(out)


# =============================================================================
# RESONANCE CLASSIFICATION
# =============================================================================

@dataclass
class ResonanceSums:
    """Class-wise sums of prod g_n prod conj(g_m) over resonant 2k-tuples."""
    k: int
    sums: Dict[str, complex]
    counts: Dict[str, int]

    @property
    def total(self) -> complex:
        return sum(self.sums.values())

    @property
    def total_count(self) -> int:
        return sum(self.counts.values())


def _tuple_table(size: int, k: int) -> np.ndarray:
    """All ordered k-tuples of positions 0..size-1, shape (size^k, k)."""
    return np.indices((size,) * k).reshape(k, -1).T


def classify_resonances(frequencies: Sequence[int], draws: Sequence[complex], k: int,
                        row_chunk: int = 512) -> ResonanceSums:
    """
    Exhaustive classification of every (n_1..n_k, m_1..m_k) drawn from the
    given frequencies with sum n = sum m.

    Cost is the number of resonant pairs, roughly size^{2k-1}; keep size^k
    in the low hundreds of thousands.
    """
    if k not in (2, 3):
        raise UnsupportedOrderError(f"resonance classification supports k in {{2, 3}} (got {k})")
    frequencies = np.asarray(frequencies, dtype=np.int64)
    draws = np.asarray(draws, dtype=np.complex128)
    size = len(frequencies)

    tuples = _tuple_table(size, k)
    tuple_sums = frequencies[tuples].sum(axis=1)
    products = np.prod(draws[tuples], axis=1)
    sorted_tuples = np.sort(tuples, axis=1)
    repeated = np.any(sorted_tuples[:, 1:] == sorted_tuples[:, :-1], axis=1)

    order = np.argsort(tuple_sums, kind='stable')
    boundaries = np.flatnonzero(np.diff(tuple_sums[order])) + 1
    groups = np.split(order, boundaries)

    partial = {name: [] for name in CLASSES}
    counts = {name: 0 for name in CLASSES}
    for group in groups:
        cols = tuples[group]
        cols_sorted = sorted_tuples[group]
        col_conj = np.conj(products[group])
        for start in range(0, len(group), row_chunk):
            rows = group[start:start + row_chunk]
            a = tuples[rows]
            a_sorted = sorted_tuples[rows]
            match = np.zeros((len(rows), len(group)), dtype=bool)
            for alpha in range(k):
                for beta in range(k):
                    match |= a[:, alpha][:, None] == cols[:, beta][None, :]
            same = np.ones_like(match)
            for alpha in range(k):
                same &= a_sorted[:, alpha][:, None] == cols_sorted[:, alpha][None, :]
            rep = repeated[rows][:, None]
            values = products[rows][:, None] * col_conj[None, :]

            masks = {
                "paired": same & ~rep,
                "error_i": same & rep,
                "pair_free": ~match,
                "error_ii": match & ~same,
            }
            for name, mask in masks.items():
                counts[name] += int(np.count_nonzero(mask))
                partial[name].append(complex(np.sum(values[mask])))

    # integer classification first, then compensated summation
    sums = {
        name: complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
        for name, vals in partial.items()
    }
    return ResonanceSums(k=k, sums=sums, counts=counts)


def count_resonant_tuples(frequencies: Sequence[int], k: int) -> int:
    """Number of solutions of sum n = sum m, counted from the tuple-sum histogram."""
    frequencies = np.asarray(frequencies, dtype=np.int64)
    sums = frequencies[_tuple_table(len(frequencies), k)].sum(axis=1)
    _, multiplicity = np.unique(sums, return_counts=True)
    return int(np.sum(multiplicity.astype(np.int64) ** 2))


# =============================================================================
# BLOCK DECOMPOSITIONS
# =============================================================================

@dataclass
class ChaosDecomposition:
    """Split of ||X~_j||_{L^{2k}}^{2k} into resonance classes."""
    j: int
    k: int
    lhs: float
    I: float
    II: float
    error_i: Optional[float] = None
    error_ii: Optional[float] = None
    III: Optional[float] = None
    counts: Dict[str, int] = field(default_factory=dict)
    imag_residual: float = 0.0

    @property
    def total(self) -> float:
        parts = [self.I, self.II, self.error_i, self.error_ii, self.III]
        return float(sum(p for p in parts if p is not None))

    @property
    def rel_residual(self) -> float:
        if self.lhs == 0.0:
            return abs(self.total)
        return abs(self.lhs - self.total) / abs(self.lhs)

    def leading_coefficient(self, shell_energy: float) -> float:
        """Observed c in I = c 2^{-kj} (sum |g|^2)^k."""
        denominator = 2.0 ** (-self.k * self.j) * shell_energy ** self.k
        return self.I / denominator if denominator else float('nan')

    def to_dict(self) -> Dict:
        return {
            "j": self.j, "k": self.k, "lhs": self.lhs, "I": self.I, "II": self.II,
            "error_i": self.error_i, "error_ii": self.error_ii, "III": self.III,
        }


def _shell_arrays(family: GaussianFamily, j: int) -> Tuple[np.ndarray, np.ndarray]:
    if family.dim != 1:
        raise UnsupportedDimensionError(
            f"block decompositions need dim = 1 (got {family.dim})", {"dim": family.dim}
        )
    _require_shell(family, j)
    points, draws = family.shell(j)
    return points[:, 0], draws


def block_moment(family: GaussianFamily, j: int, k: int, M: int = None) -> float:
    """||X~_j||_{L^{2k}}^{2k} by quadrature (exact for an 8x grid and k <= 3)."""
    grid = block_sum(family, j, M)
    return lp_quadrature(grid.values, 2.0 * k) ** (2 * k)


def l4_block_decomposition(family: GaussianFamily, j: int) -> ChaosDecomposition:
    """
    ||X~_j||_{L^4}^4 = I + II + III with
    I = 2 * 2^{-2j} (sum |g|^2)^2, II the pair-free resonant sum,
    III = -2^{-2j} sum |g|^4.
    """
    frequencies, draws = _shell_arrays(family, j)
    scale = 2.0 ** (-2 * j)
    energy = np.abs(draws) ** 2
    resonances = classify_resonances(frequencies, draws, 2)
    pair_free = resonances.sums["pair_free"]
    decomposition = ChaosDecomposition(
        j=j, k=2,
        lhs=block_moment(family, j, 2),
        I=float(2.0 * scale * np.sum(energy) ** 2),
        II=float(scale * pair_free.real),
        III=float(-scale * np.sum(energy ** 2)),
        counts=resonances.counts,
        imag_residual=float(scale * abs(pair_free.imag)),
    )
    logger.debug(f"L4 block j={j}: lhs={decomposition.lhs:.6g} residual={decomposition.rel_residual:.2e}")
    return decomposition


def l2k_block_decomposition(family: GaussianFamily, j: int, k: int) -> ChaosDecomposition:
    """
    ||X~_j||_{L^{2k}}^{2k} split by exhaustive classification into paired (I),
    pair-free (II), error (i) and error (ii). k = 3 is capped at j <= 6.
    """
    if k not in (2, 3):
        raise UnsupportedOrderError(f"k must be 2 or 3 (got {k})")
    if k == 3 and j > 6:
        raise InvalidArgumentError(f"k = 3 enumeration is capped at j <= 6 (got j={j})")
    frequencies, draws = _shell_arrays(family, j)
    scale = 2.0 ** (-k * j)
    resonances = classify_resonances(frequencies, draws, k)
    sums = {name: scale * value for name, value in resonances.sums.items()}
    return ChaosDecomposition(
        j=j, k=k,
        lhs=block_moment(family, j, k),
        I=float(sums["paired"].real),
        II=float(sums["pair_free"].real),
        error_i=float(sums["error_i"].real),
        error_ii=float(sums["error_ii"].real),
        counts=resonances.counts,
        imag_residual=float(max(abs(v.imag) for v in sums.values())),
    )


def pair_free_fast(family: GaussianFamily, j: int) -> float:
    """II_j^(2) as lhs - I - III; agrees with the exhaustive sum to rounding."""
    _, draws = _shell_arrays(family, j)
    scale = 2.0 ** (-2 * j)
    energy = np.abs(draws) ** 2
    return float(block_moment(family, j, 2) - 2.0 * scale * np.sum(energy) ** 2
                 + scale * np.sum(energy ** 2))


# =============================================================================
# CHAOS PROJECTIONS
# =============================================================================

def chaos_project_F(family: GaussianFamily, j: int, k: int) -> List[Tuple[int, float]]:
    """
    Chaos components of F_j = 2^{-j} sum_{S_j} |g_n|^{2k}.

    k = 1: F^(0) = 2 #S_j / 2^j, F^(1) = 2^{-j} sum :|g|^2:
    k = 2: F^(0) = 8 #S_j / 2^j, F^(1) = 8 2^{-j} sum :|g|^2:,
           F^(2) = 2^{-j} sum :|g|^4:
    """
    if k not in (1, 2):
        raise UnsupportedOrderError(f"chaos projection supports k in {{1, 2}} (got {k})")
    _require_shell(family, j)
    _, draws = family.shell(j)
    norm = 2.0 ** (-j)
    count = len(draws)
    first = norm * float(np.sum(wick_abs2n(draws, 1)))
    if k == 1:
        return [(0, 2.0 * count * norm), (1, first)]
    return [
        (0, 8.0 * count * norm),
        (1, 8.0 * first),
        (2, norm * float(np.sum(wick_abs2n(draws, 2)))),
    ]


def shell_moment(family: GaussianFamily, j: int, k: int) -> float:
    """F_j = 2^{-j} sum_{S_j} |g_n|^{2k}."""
    _require_shell(family, j)
    _, draws = family.shell(j)
    return float(np.sum(np.abs(draws) ** (2 * k))) / 2.0 ** j


# =============================================================================
# HYPERCONTRACTIVITY
# =============================================================================

@dataclass
class HypercontractivityReport:
    """Empirical ||F||_q / ||F||_2 against (q - 1)^{n/2}."""
    order: int
    q: float
    ratio: float
    bound: float
    rel_se: float
    n_samples: int
    passed: bool

    def to_dict(self) -> Dict:
        return asdict(self)


def _moment_ratio(samples: np.ndarray, q: float) -> float:
    l2 = float(np.sqrt(np.mean(np.abs(samples) ** 2)))
    if l2 == 0.0:
        return 0.0
    return float(np.mean(np.abs(samples) ** q) ** (1.0 / q)) / l2


def hypercontractivity_check(samples: Sequence[float], order: int, q: float,
                             band_se: float = None,
                             min_samples: int = None) -> HypercontractivityReport:
    """
    Check ||F||_{L^q} <= (q - 1)^{n/2} ||F||_{L^2} for an order-n chaos sample,
    allowing (1 + band_se * relative SE) slack.
    """
    band_se = MONTE_CARLO_SETTINGS['band_se'] if band_se is None else band_se
    min_samples = min_samples or MONTE_CARLO_SETTINGS['min_hyper_samples']
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size < min_samples:
        raise InsufficientSamplesError(
            f"need at least {min_samples} samples (got {samples.size})",
            {"required": min_samples, "got": int(samples.size)}
        )
    if q < 2:
        raise InvalidArgumentError(f"q must be >= 2 (got {q})")
    ratio = _moment_ratio(samples, q)
    batches = np.array_split(samples, MONTE_CARLO_SETTINGS['batch_count'])
    batch_ratios = np.array([_moment_ratio(b, q) for b in batches])
    se = float(np.std(batch_ratios, ddof=1) / np.sqrt(len(batch_ratios)))
    rel_se = se / ratio if ratio > 0 else 0.0
    bound = (q - 1.0) ** (order / 2.0)
    return HypercontractivityReport(
        order=order, q=q, ratio=ratio, bound=bound, rel_se=rel_se,
        n_samples=int(samples.size), passed=bool(ratio <= bound * (1.0 + band_se * rel_se)),
    )


def wick_orthogonality(draws: np.ndarray, orders: Sequence[int] = (1, 2, 3)) -> Dict:
    """
    Monte Carlo means (with SE) of :|g|^{2m}: :|g|^{2n}: for m != n and of
    each :|g|^{2n}: alone.
    """
    draws = np.asarray(draws)
    powers = {n: wick_abs2n(draws, n) for n in orders}
    out = {}
    for m in orders:
        for n in orders:
            if m < n:
                product = powers[m] * powers[n]
                out[(m, n)] = (float(np.mean(product)),
                               float(np.std(product, ddof=1) / np.sqrt(product.size)))
        out[(m, 0)] = (float(np.mean(powers[m])),
                       float(np.std(powers[m], ddof=1) / np.sqrt(powers[m].size)))
    return out
