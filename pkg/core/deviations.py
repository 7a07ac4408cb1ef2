"""
Large Deviations Module

Cramer transform and Chernoff bound for chi-square shell sums, Monte Carlo
tail estimation with a Gaussian-exponent fit for any norm, the tail form for
chaos components, the measurable-seminorm probe, and the endpoint pieces of
the L^4 block split.

The moment generating function used here is E[exp(lambda |g|^2)] = 1/(1 - 2 lambda)
for Var(g) = 2 (normalized density, no extra 2 pi factor), so
H(a) = (a - 2)/2 + ln(2/a).
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

import sys
sys.path.append('..')
from config.settings import DEVIATION_SETTINGS, MONTE_CARLO_SETTINGS
from core.chaos import pair_free_fast
from core.errors import (
    BelowMeanError, InsufficientSamplesError, InvalidArgumentError, NumericsError
)
from core.lattice import shell_size
from core.montecarlo import binomial_se, run_samples, wilson_interval
from core.norms import NormSpace, NormSpec, evaluate_norm
from core.spectral import sample_family, sample_path
from utils.logger import get_logger, log_check

logger = get_logger(__name__)


# =============================================================================
# CRAMER / CHERNOFF
# =============================================================================

@dataclass
class CramerReport:
    """Rate function of |g|^2 at threshold a."""
    a: float
    lambda_star: float
    H: float
    N: Optional[int] = None
    bound: Optional[float] = None

    def to_dict(self) -> Dict:
        return {"a": self.a, "lambda_star": self.lambda_star, "H": self.H,
                "N": self.N, "bound": self.bound}


def chi2_rate(a: float) -> float:
    """H(a) = (a - 2)/2 + ln(2/a) for a >= 2."""
    if a < 2.0:
        raise BelowMeanError(f"threshold {a} is below the mean 2", {"a": a})
    return (a - 2.0) / 2.0 + np.log(2.0 / a)


def cramer_chi2(a: float, N: int = None, tolerance: float = None) -> CramerReport:
    """
    Legendre transform sup_{lambda > 0} {a lambda + ln(1 - 2 lambda)}.

    The closed form is cross-checked against a bounded scalar maximization;
    a disagreement raises NumericsError.
    """
    if not a > 2.0:
        raise BelowMeanError(f"a must exceed the mean 2 (got {a})", {"a": a})
    tolerance = tolerance or DEVIATION_SETTINGS['cramer_tolerance']
    lambda_star = (a - 2.0) / (2.0 * a)
    H = chi2_rate(a)

    result = optimize.minimize_scalar(
        lambda lam: -(a * lam + np.log1p(-2.0 * lam)),
        bounds=(0.0, 0.5 - 1e-12), method='bounded', options={'xatol': 1e-12}
    )
    if abs(-result.fun - H) > tolerance * max(1.0, H):
        raise NumericsError(
            "closed-form Cramer rate disagrees with numerical maximization",
            {"a": a, "closed_form": H, "numerical": float(-result.fun)}
        )

    bound = float(np.exp(-N * H)) if N is not None else None
    return CramerReport(a=float(a), lambda_star=lambda_star, H=float(H), N=N, bound=bound)


def chernoff_shell_bound(j: int, K: float, dim: int = 1) -> float:
    """
    exp(-#S_j H(2^j K^2 / #S_j)), the Chernoff bound for
    P(2^{-j} sum_{S_j} |g_n|^2 > K^2).
    """
    count = shell_size(dim, j)
    mean = 2.0 * count / 2.0 ** j
    K2 = float(K) ** 2
    if np.isclose(K2, mean, rtol=1e-12, atol=0.0):
        return 1.0
    if K2 < mean:
        raise BelowMeanError(
            f"K^2 = {K2} is below the shell mean {mean}", {"j": j, "K2": K2, "mean": mean}
        )
    return float(np.exp(-count * chi2_rate(2.0 ** j * K2 / count)))


def _shell_energy_sample(j: int, dim: int, seed: int) -> float:
    family = sample_family(seed, dim, 2 ** j)
    _, draws = family.shell(j)
    return float(np.sum(np.abs(draws) ** 2)) / 2.0 ** j


def chernoff_check(j: int, K2: float, samples: int, seed: int, workers: int = None,
                   dim: int = 1) -> Dict:
    """Empirical P(X_j^(2) > K^2) next to the Chernoff bound, with 3-SE slack."""
    values = run_samples(partial(_shell_energy_sample, j, dim), seed, samples, workers)
    count = int(np.count_nonzero(values > K2))
    prob = count / samples
    bound = chernoff_shell_bound(j, np.sqrt(K2), dim)
    se = binomial_se(prob, samples)
    passed = prob <= bound + 3.0 * se
    log_check(logger, f"chernoff j={j} K2={K2}", passed, prob=prob, bound=bound)
    return {"j": j, "K2": K2, "count": count, "prob": prob, "se": se,
            "bound": bound, "passed": bool(passed)}


# =============================================================================
# TAIL ESTIMATION
# =============================================================================

@dataclass
class TailEstimate:
    """Empirical exceedance curve with a fitted Gaussian-tail exponent."""
    spec: str
    truncation: Optional[int]
    alpha: Optional[float]
    sample_count: int
    k_grid: np.ndarray
    exceed_counts: np.ndarray
    exceed_prob: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    retained: np.ndarray
    fitted_c: Optional[float] = None
    intercept: Optional[float] = None
    fit_r2: Optional[float] = None

    @property
    def degraded(self) -> bool:
        return self.fitted_c is None

    def rows(self) -> List[Dict]:
        return [
            {"K": float(K), "count": int(c), "prob": float(p), "lo": float(lo), "hi": float(hi)}
            for K, c, p, lo, hi in zip(self.k_grid, self.exceed_counts, self.exceed_prob,
                                       self.lower, self.upper)
        ]

    def summary(self) -> Dict:
        return {"spec": self.spec, "N": self.truncation, "alpha": self.alpha,
                "n_samples": self.sample_count, "fitted_c": self.fitted_c,
                "fit_r2": self.fit_r2, "bins_retained": int(np.count_nonzero(self.retained))}

    def print_summary(self):
        """Print formatted tail summary."""
        print("\n" + "=" * 60)
        print("TAIL ESTIMATE")
        print("=" * 60)
        print(f"Spec: {self.spec} | N: {self.truncation} | alpha: {self.alpha}")
        print(f"Samples:          {self.sample_count}")
        print(f"Bins retained:    {int(np.count_nonzero(self.retained))}/{len(self.k_grid)}")
        print("-" * 60)
        if self.degraded:
            print("Fitted c:         n/a (too few exceedances)")
        else:
            print(f"Fitted c:         {self.fitted_c:.6g}")
            print(f"Fit R^2:          {self.fit_r2:.4f}")
        print("=" * 60 + "\n")


def _weighted_line(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> Tuple[float, float, float]:
    """Least squares y ~ slope x + intercept with weights w; returns (slope, intercept, R^2)."""
    slope, intercept = np.polyfit(x, y, 1, w=np.sqrt(w))
    fitted = slope * x + intercept
    y_bar = np.average(y, weights=w)
    ss_tot = float(np.sum(w * (y - y_bar) ** 2))
    ss_res = float(np.sum(w * (y - fitted) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), r2


def estimate_tail(values: Sequence[float], quantile_range: Tuple[float, float] = None,
                  spec: str = "", truncation: int = None, alpha: float = None,
                  settings: Dict = None) -> TailEstimate:
    """
    Build the K-grid from empirical quantiles and fit -log P ~ c K^2 + b,
    weighting each retained bin by its exceedance count.
    """
    settings = settings or DEVIATION_SETTINGS
    lo_q, hi_q = quantile_range or settings['quantile_range']
    if not (0.0 < lo_q < hi_q < 1.0):
        raise InvalidArgumentError(f"quantile range must satisfy 0 < lo < hi < 1 (got {lo_q}, {hi_q})")
    values = np.asarray(values, dtype=np.float64)
    n = values.size

    k_grid = np.unique(np.quantile(values, np.linspace(lo_q, hi_q, settings['k_grid_size'])))
    counts = np.array([np.count_nonzero(values > K) for K in k_grid], dtype=np.int64)
    prob = counts / n
    intervals = [wilson_interval(int(c), n, settings['confidence']) for c in counts]
    lower = np.array([iv[0] for iv in intervals])
    upper = np.array([iv[1] for iv in intervals])
    retained = (counts >= settings['min_bin_exceedances']) & (counts < n)

    estimate = TailEstimate(
        spec=str(spec), truncation=truncation, alpha=alpha, sample_count=n,
        k_grid=k_grid, exceed_counts=counts, exceed_prob=prob,
        lower=lower, upper=upper, retained=retained,
    )
    if np.count_nonzero(retained) < settings['min_fit_bins']:
        logger.warning(f"Tail fit skipped for {spec}: {int(np.count_nonzero(retained))} usable bins")
        return estimate

    x = k_grid[retained] ** 2
    y = -np.log(prob[retained])
    slope, intercept, r2 = _weighted_line(x, y, counts[retained].astype(np.float64))
    estimate.fitted_c, estimate.intercept, estimate.fit_r2 = slope, intercept, r2
    return estimate


def _norm_sample(spec_text: str, alpha: float, N: int, dim: int, seed: int) -> float:
    spec = NormSpec.parse(spec_text, dim)
    return evaluate_norm(spec, sample_path(seed, N, alpha, dim))


def sample_norms(spec: NormSpec, alpha: float, N: int, samples: int, seed: int,
                 workers: int = None) -> np.ndarray:
    """Norm of `samples` independent paths; sample i always uses the same family."""
    fn = partial(_norm_sample, str(spec), alpha, N, spec.dim)
    return run_samples(fn, seed, samples, workers)


def tail_estimate(spec: NormSpec, alpha: float, N: int, samples: int,
                  quantile_range: Tuple[float, float] = None, seed: int = None,
                  workers: int = None, norm_fn: Callable[[int], float] = None,
                  min_samples: int = None) -> TailEstimate:
    """
    Monte Carlo tail of ||u||_spec over independent paths.

    Args:
        spec: NormSpec to evaluate
        alpha: Spectral exponent
        N: Truncation
        samples: Number of paths (at least 10^4 by default)
        quantile_range: Quantile band for the K-grid
        seed: Master seed
        workers: Process count
        norm_fn: Replaces the path norm with fn(seed_i), e.g. a stub
        min_samples: Lower bound on samples
    """
    min_samples = min_samples or DEVIATION_SETTINGS['min_tail_samples']
    if samples < min_samples:
        raise InsufficientSamplesError(
            f"tail estimation needs at least {min_samples} samples (got {samples})",
            {"required": min_samples, "got": samples}
        )
    seed = MONTE_CARLO_SETTINGS['default_seed'] if seed is None else seed
    logger.info(f"Tail estimate for {spec} (alpha={alpha}, N={N}, samples={samples})")
    if norm_fn is not None:
        values = run_samples(norm_fn, seed, samples, workers)
    else:
        values = sample_norms(spec, alpha, N, samples, seed, workers)
    return estimate_tail(values, quantile_range, str(spec), N, alpha)


# =============================================================================
# CHAOS TAILS
# =============================================================================

@dataclass
class ChaosTailReport:
    """Tail of |F_j^(l)| against C' exp(-c 2^{j/(2l)} lambda^{1/l})."""
    order: int
    j: int
    n_samples: int
    anchors: List[float]
    c: Optional[float]
    C_prime: Optional[float]
    exponent: Optional[float]
    checks: List[Dict] = field(default_factory=list)

    @property
    def exponent_consistent(self) -> Optional[bool]:
        """Fitted power of lambda within a factor 2 of 2 / order."""
        if self.exponent is None:
            return None
        expected = 2.0 / self.order
        return expected / 2.0 <= self.exponent <= 2.0 * expected

    @property
    def passed(self) -> bool:
        return all(check["passed"] for check in self.checks)

    def to_dict(self) -> Dict:
        return {"order": self.order, "j": self.j, "n_samples": self.n_samples,
                "anchors": self.anchors, "c": self.c, "C_prime": self.C_prime,
                "exponent": self.exponent, "passed": self.passed, "checks": self.checks}


def _tail_exponent(magnitudes: np.ndarray, quantiles: Sequence[float], min_count: int) -> Optional[float]:
    """Slope of log(-log P(|F| > lambda)) against log lambda."""
    n = magnitudes.size
    lambdas = np.unique(np.quantile(magnitudes, quantiles))
    lambdas = lambdas[lambdas > 0]
    counts = np.array([np.count_nonzero(magnitudes > lam) for lam in lambdas])
    keep = (counts >= min_count) & (counts < n)
    if np.count_nonzero(keep) < 2:
        return None
    x = np.log(lambdas[keep])
    y = np.log(-np.log(counts[keep] / n))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def chaos_tail_check(samples: Sequence[float], order: int, j: int,
                     anchor_quantiles: Tuple[float, float] = (0.9, 0.99),
                     test_multiples: Sequence[float] = (1.25, 1.5, 2.0),
                     min_samples: int = None, settings: Dict = None) -> ChaosTailReport:
    """
    Fit (c, C') through two quantile anchors of |F| and test the fitted curve
    at larger lambda, allowing 3 binomial standard errors.
    """
    settings = settings or DEVIATION_SETTINGS
    min_samples = min_samples or MONTE_CARLO_SETTINGS['min_chaos_tail_samples']
    if order < 1:
        raise InvalidArgumentError(f"chaos order must be >= 1 (got {order})")
    magnitudes = np.abs(np.asarray(samples, dtype=np.float64))
    n = magnitudes.size
    if n < min_samples:
        raise InsufficientSamplesError(
            f"chaos tail check needs at least {min_samples} samples (got {n})",
            {"required": min_samples, "got": n}
        )

    lam1, lam2 = (float(v) for v in np.quantile(magnitudes, anchor_quantiles))
    scale = 2.0 ** (j / (2.0 * order))
    power = 1.0 / order
    if lam1 <= 0.0 or lam2 <= lam1:
        # degenerate law: record the raw tail probabilities only
        checks = [{"lambda": lam, "prob": float(np.count_nonzero(magnitudes > lam)) / n,
                   "fitted": None, "se": 0.0, "passed": True}
                  for lam in (lam2 * m for m in test_multiples)]
        return ChaosTailReport(order, j, n, [lam1, lam2], None, None, None, checks)

    p1 = np.count_nonzero(magnitudes > lam1) / n
    p2 = np.count_nonzero(magnitudes > lam2) / n
    c = (np.log(p1) - np.log(p2)) / (scale * (lam2 ** power - lam1 ** power))
    log_C = np.log(p1) + c * scale * lam1 ** power

    checks = []
    for multiple in test_multiples:
        lam = lam2 * multiple
        prob = np.count_nonzero(magnitudes > lam) / n
        fitted = float(np.exp(log_C - c * scale * lam ** power))
        se = binomial_se(max(prob, fitted), n)
        checks.append({"lambda": lam, "prob": prob, "fitted": fitted, "se": se,
                       "passed": bool(prob <= fitted + 3.0 * se)})

    exponent = _tail_exponent(magnitudes, np.linspace(anchor_quantiles[0], 0.999, 10),
                              settings['min_bin_exceedances'])
    report = ChaosTailReport(order, j, n, [lam1, lam2], float(c), float(np.exp(log_C)),
                             exponent, checks)
    log_check(logger, f"chaos tail order={order} j={j}", report.passed, c=report.c,
              exponent=exponent)
    return report


# =============================================================================
# MEASURABILITY PROBE
# =============================================================================

@dataclass
class ProbeResult:
    """Estimate of mu(||P_{>M0} u|| > eps)."""
    spec: str
    M0: int
    eps: float
    truncation: int
    samples: int
    count: int
    prob: float
    lo: float
    hi: float

    def to_row(self) -> Dict:
        return {"M0": self.M0, "eps": self.eps, "prob": self.prob,
                "lo": self.lo, "hi": self.hi, "samples": self.samples}


def _probe_sample(spec_text: str, alpha: float, N: int, M0: int, eps: float,
                  dim: int, seed: int) -> bool:
    spec = NormSpec.parse(spec_text, dim)
    tail = sample_path(seed, N, alpha, dim).high_pass(M0)
    return bool(evaluate_norm(spec, tail) > eps)


def measurability_probe(spec: NormSpec, alpha: float, M0: int, eps: float, samples: int,
                        seed: int = None, workers: int = None, N: int = None) -> ProbeResult:
    """
    Probability that the Dirichlet tail P_{>M0} u has norm above eps. The
    series is truncated at N = probe_extension * M0 unless N is given.
    """
    if spec.space == NormSpace.BESOV:
        raise InvalidArgumentError("the measurability probe takes Fourier-Besov or FL specs")
    if M0 < 2:
        raise InvalidArgumentError(f"M0 must be >= 2 (got {M0})")
    if eps < 0:
        raise InvalidArgumentError(f"eps must be >= 0 (got {eps})")
    seed = MONTE_CARLO_SETTINGS['default_seed'] if seed is None else seed
    N = N or DEVIATION_SETTINGS['probe_extension'] * M0
    fn = partial(_probe_sample, str(spec), alpha, N, M0, eps, spec.dim)
    hits = run_samples(fn, seed, samples, workers)
    count = int(np.count_nonzero(hits))
    lo, hi = wilson_interval(count, samples, DEVIATION_SETTINGS['confidence'])
    result = ProbeResult(str(spec), M0, float(eps), N, samples, count,
                         count / samples if samples else float('nan'), lo, hi)
    logger.info(f"Probe {spec} M0={M0} eps={eps:g}: P = {result.prob:.4f} [{lo:.4f}, {hi:.4f}]")
    return result


# =============================================================================
# ENDPOINT PIECES OF THE L^4 SPLIT
# =============================================================================

def _pieces_sample(jmax: int, seed: int) -> np.ndarray:
    family = sample_family(seed, 1, 2 ** jmax)
    sup_I = sup_III = sup_II = 0.0
    for j in range(jmax + 1):
        _, draws = family.shell(j)
        energy = np.abs(draws) ** 2
        scale = 2.0 ** (-2 * j)
        sup_I = max(sup_I, 2.0 * scale * float(np.sum(energy)) ** 2)
        sup_III = max(sup_III, scale * float(np.sum(energy ** 2)))
        sup_II = max(sup_II, abs(pair_free_fast(family, j)))
    return np.array([sup_I, sup_III, sup_II])


def besov4_endpoint_pieces(jmax: int, K: float, samples: int, seed: int = None,
                           workers: int = None) -> Dict[str, Dict]:
    """
    P(sup_j I_j > K^4), P(sup_j |III_j| > K^4) and P(sup_j |II_j| > K^4)
    over j <= jmax, each with a Wilson interval.
    """
    if jmax < 0:
        raise InvalidArgumentError(f"jmax must be >= 0 (got {jmax})")
    seed = MONTE_CARLO_SETTINGS['default_seed'] if seed is None else seed
    sups = run_samples(partial(_pieces_sample, jmax), seed, samples, workers).reshape(samples, 3)
    threshold = float(K) ** 4
    out = {}
    for column, name in enumerate(("I", "III", "II")):
        count = int(np.count_nonzero(sups[:, column] > threshold))
        lo, hi = wilson_interval(count, samples, DEVIATION_SETTINGS['confidence'])
        out[name] = {"count": count, "prob": count / samples, "lo": lo, "hi": hi}
    return out
