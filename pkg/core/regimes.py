"""
Regularity Regimes Module

Predicted and observed behaviour of ||u_N|| as the truncation N grows, for
u = sum g_n |n|^{-alpha} e^{in.t} on the d-dimensional torus:

- FL / modulation / amalgam: finite iff (s - alpha) q < -d
- Fourier-Besov: finite iff (s - alpha) p < -d, plus the endpoint
  (s - alpha) p = -d when q = inf
- Besov (d = 1): finite iff s < alpha - 1/2, plus the endpoint with q = inf

The empirical rule works on per-seed norms over a geometric list of N; the
same seed gives the same coefficients at every N.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Dict, List, Sequence

import numpy as np

import sys
sys.path.append('..')
from config.settings import MONTE_CARLO_SETTINGS, SCAN_SETTINGS
from core.errors import InvalidArgumentError
from core.montecarlo import run_samples
from core.norms import NormSpace, NormSpec, evaluate_norm, format_exponent
from core.spectral import build_path, sample_family
from utils.logger import get_logger

logger = get_logger(__name__)

TOLERANCE = 1e-12


class Verdict(Enum):
    CONVERGE = "converge"
    ENDPOINT_GROWTH = "endpoint-growth"
    DIVERGE = "diverge"


def _sign_verdict(exponent: float, endpoint_finite: bool) -> Verdict:
    if exponent < -TOLERANCE:
        return Verdict.CONVERGE
    if exponent > TOLERANCE:
        return Verdict.DIVERGE
    return Verdict.CONVERGE if endpoint_finite else Verdict.ENDPOINT_GROWTH


def threshold_exponent(spec: NormSpec, alpha: float) -> float:
    """The quantity whose sign decides the regime (zero at the endpoint)."""
    if spec.space == NormSpace.BESOV:
        return spec.s - (alpha - 0.5)
    p = spec.effective_p
    if np.isinf(p):
        return spec.s - alpha
    return (spec.s - alpha) * p + spec.dim


def predict_regime(spec: NormSpec, alpha: float) -> Verdict:
    """Theoretical verdict for ||u_N||_spec as N -> inf."""
    if alpha < 0:
        raise InvalidArgumentError(f"alpha must be >= 0 (got {alpha})")
    exponent = threshold_exponent(spec, alpha)
    if spec.space.is_fourier_lebesgue_like:
        return _sign_verdict(exponent, endpoint_finite=False)
    # endpoint shell terms settle to a constant, so only the sup over j stays bounded
    finite = np.isinf(spec.q) and not np.isinf(spec.p)
    return _sign_verdict(exponent, endpoint_finite=finite)


@dataclass
class EmpiricalVerdict:
    verdict: Verdict
    statistic: float
    rule: str


def empirical_verdict(norms: Dict[int, np.ndarray], q: float,
                      settings: Dict = None) -> EmpiricalVerdict:
    """
    Classify growth from per-seed norms keyed by N.

    q < inf: slope of log2(median per-seed increment of ||u||^q) against log2 N.
    q = inf (or only two N values): relative change of the median norm between
    the first and last N.
    """
    settings = settings or SCAN_SETTINGS
    Ns = sorted(norms)
    if len(Ns) < 2:
        raise InvalidArgumentError("an empirical verdict needs at least two truncations")

    if not np.isinf(q) and len(Ns) >= 3:
        log_n, log_inc = [], []
        for previous, current in zip(Ns[:-1], Ns[1:]):
            increment = np.median(np.asarray(norms[current]) ** q - np.asarray(norms[previous]) ** q)
            if increment > 0:
                log_n.append(np.log2(current))
                log_inc.append(np.log2(increment))
        if len(log_n) < 2:
            return EmpiricalVerdict(Verdict.CONVERGE, float('-inf'), "slope")
        kappa = float(np.polyfit(log_n, log_inc, 1)[0])
        threshold = settings['slope_threshold']
        if kappa < -threshold:
            verdict = Verdict.CONVERGE
        elif kappa > threshold:
            verdict = Verdict.DIVERGE
        else:
            verdict = Verdict.ENDPOINT_GROWTH
        return EmpiricalVerdict(verdict, kappa, "slope")

    first = float(np.median(norms[Ns[0]]))
    last = float(np.median(norms[Ns[-1]]))
    change = (last - first) / first if first > 0 else float('inf')
    if change < settings['converge_change']:
        verdict = Verdict.CONVERGE
    elif change >= settings['diverge_change']:
        verdict = Verdict.DIVERGE
    else:
        verdict = Verdict.ENDPOINT_GROWTH
    return EmpiricalVerdict(verdict, change, "relative-change")


# =============================================================================
# SCAN
# =============================================================================

def _scan_sample(spec_text: str, alpha: float, Ns: List[int], dim: int, seed: int) -> np.ndarray:
    spec = NormSpec.parse(spec_text, dim)
    family = sample_family(seed, dim, max(Ns))
    return np.array([evaluate_norm(spec, build_path(family.restrict(N), alpha)) for N in Ns])


@dataclass
class ScanCell:
    """Per-seed norms of one spec over a list of truncations."""
    spec: NormSpec
    alpha: float
    Ns: List[int]
    norms: np.ndarray                 # shape (n_seeds, len(Ns))
    predicted: Verdict = None
    empirical: EmpiricalVerdict = None

    @property
    def n_seeds(self) -> int:
        return self.norms.shape[0]

    @property
    def by_truncation(self) -> Dict[int, np.ndarray]:
        return {N: self.norms[:, i] for i, N in enumerate(self.Ns)}

    @property
    def agrees(self) -> bool:
        return self.predicted == self.empirical.verdict

    def _labels(self) -> Dict:
        return {"space": self.spec.space.short, "s": self.spec.s,
                "p": format_exponent(self.spec.p), "q": format_exponent(self.spec.q),
                "alpha": self.alpha}

    def rows(self) -> List[Dict]:
        return [
            {**self._labels(), "N": N, "median": float(np.median(self.norms[:, i])),
             "mean": float(np.mean(self.norms[:, i])), "n_seeds": self.n_seeds}
            for i, N in enumerate(self.Ns)
        ]

    def verdict_row(self) -> Dict:
        return {**self._labels(), "predicted": self.predicted.value,
                "empirical": self.empirical.verdict.value,
                "statistic": self.empirical.statistic}

    def median_ratio(self, N_hi: int, N_lo: int) -> float:
        cols = self.by_truncation
        return float(np.median(cols[N_hi]) / np.median(cols[N_lo]))


def scan_cell(spec: NormSpec, alpha: float, Ns: Sequence[int], n_seeds: int,
              seed: int = None, workers: int = None) -> ScanCell:
    """Evaluate spec on n_seeds paths at every N and attach both verdicts."""
    Ns = sorted(int(N) for N in Ns)
    if not Ns or Ns[0] < 1:
        raise InvalidArgumentError(f"truncations must be >= 1 (got {Ns})")
    seed = MONTE_CARLO_SETTINGS['default_seed'] if seed is None else seed
    logger.info(f"Scanning {spec} alpha={alpha} over N={Ns} with {n_seeds} seeds")
    fn = partial(_scan_sample, str(spec), alpha, Ns, spec.dim)
    norms = run_samples(fn, seed, n_seeds, workers).reshape(n_seeds, len(Ns))
    cell = ScanCell(spec, alpha, Ns, norms)
    cell.predicted = predict_regime(spec, alpha)
    if len(Ns) >= 2:
        cell.empirical = empirical_verdict(cell.by_truncation, spec.q)
    return cell
