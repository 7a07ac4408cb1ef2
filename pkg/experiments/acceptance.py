"""
Acceptance Suite

The end-to-end checks behind `main.py accept`. Sample counts come from
ACCEPTANCE_SETTINGS[scale]; "full" is the reference size, "desk" a quicker
pass with the same bands (bands are in standard errors from the same run,
so they stay valid at any size).
"""

from dataclasses import dataclass, field, asdict
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

import sys
sys.path.append('..')
from config.settings import ACCEPTANCE_SETTINGS, MONTE_CARLO_SETTINGS, OUTPUT_SETTINGS
from core.bridge import (
    covariance_report, fourier_wiener_to_bridge, fourth_moment_ratio,
    sample_bridge_spectra, to_gaussian_scale
)
from core.chaos import (
    chaos_project_F, hypercontractivity_check, l2k_block_decomposition,
    l4_block_decomposition, pair_free_fast, shell_moment, wick_abs2n, wick_orthogonality
)
from core.deviations import _norm_sample, chernoff_check, measurability_probe, tail_estimate
from core.errors import ConfigError
from core.lattice import lattice_points, shell_size
from core.montecarlo import mean_and_se, run_samples, sample_seed
from core.norms import NormSpec, besov_norm, fl_norm, fourier_besov_norm
from core.partition import DyadicPartition, PartitionMode
from core.regimes import scan_cell
from core.spectral import SpectralPath, gaussian_stream, sample_family, sample_path
from core.stats import c_p_exact
from utils.logger import get_logger, log_check

logger = get_logger(__name__)


@dataclass
class Check:
    """Outcome of one acceptance check."""
    name: str
    passed: bool
    statistic: float = None
    bound: float = None
    details: Dict = field(default_factory=dict)

    def to_row(self) -> Dict:
        return {"check": self.name, "passed": self.passed,
                "statistic": self.statistic, "bound": self.bound}

    def to_dict(self) -> Dict:
        return asdict(self)


def _record(check: Check) -> Check:
    log_check(logger, check.name, check.passed, statistic=check.statistic, bound=check.bound)
    return check


# =============================================================================
# CHECKS
# =============================================================================

def check_fourier_identity(scale: Dict, seed: int, workers: int = None) -> List[Check]:
    """lhs = I + II + III for the L^4 split; all classes sum to lhs for k = 3."""
    jmax = scale['identity_jmax']
    worst4 = worst6 = 0.0
    for i in range(scale['identity_seeds']):
        family = sample_family(sample_seed(seed, i), 1, 2 ** jmax)
        for j in range(1, jmax + 1):
            worst4 = max(worst4, l4_block_decomposition(family, j).rel_residual)
        if i < 3:
            for j in range(1, scale['l2k_jmax'] + 1):
                worst6 = max(worst6, l2k_block_decomposition(family, j, 3).rel_residual)
    return [
        _record(Check("l4 identity", worst4 <= 1e-9, worst4, 1e-9)),
        _record(Check("l6 identity", worst6 <= 1e-8, worst6, 1e-8)),
    ]


def check_moments(scale: Dict, seed: int, workers: int = None) -> List[Check]:
    """c_p_exact against a Monte Carlo mean of |g|^p, 3 SE."""
    draws = np.abs(gaussian_stream(seed, scale['moment_samples']))
    checks = []
    for p in (1, 2, 3, 4, 6):
        mean, se = mean_and_se(draws ** p)
        deviation = abs(mean - c_p_exact(p)) / se
        checks.append(_record(Check(f"moment p={p}", deviation <= 3.0, deviation, 3.0,
                                    {"mean": mean, "exact": c_p_exact(p)})))
    return checks


def check_norm_identities(scale: Dict, seed: int, workers: int = None) -> List[Check]:
    """FL = Fourier-Besov with p = q; sharp Besov(p=2) = Fourier-Besov(p=2) by Plancherel."""
    N = 256
    sharp = DyadicPartition.covering(N, PartitionMode.SHARP)
    worst_fl = worst_plancherel = 0.0
    for i in range(scale['norm_paths']):
        path = sample_path(sample_seed(seed, i), N, 1.0)
        for p in (1.0, 2.0, 3.0, float('inf')):
            a = fl_norm(path, 0.3, p)
            b = fourier_besov_norm(path, 0.3, p, p, sharp)
            worst_fl = max(worst_fl, abs(a - b) / a)
        for q in (2.0, float('inf')):
            a = besov_norm(path, 0.3, 2.0, q, sharp)
            b = fourier_besov_norm(path, 0.3, 2.0, q, sharp, weight="dyadic")
            worst_plancherel = max(worst_plancherel, abs(a - b) / b)
    return [
        _record(Check("fl = fbesov(p=q)", worst_fl <= 1e-12, worst_fl, 1e-12)),
        _record(Check("besov = fbesov (p=2)", worst_plancherel <= 1e-9, worst_plancherel, 1e-9)),
    ]


def check_regime_contrast(scale: Dict, seed: int, workers: int = None) -> List[Check]:
    """Median change of the Brownian path norm across N at s below, above and at threshold."""
    seeds = scale['regime_seeds']
    below = scan_cell(NormSpec.parse("fbesov:0.4:2:inf"), 1.0, [2 ** 10, 2 ** 14], seeds, seed, workers)
    above = scan_cell(NormSpec.parse("fbesov:0.6:2:inf"), 1.0, [2 ** 10, 2 ** 14], seeds, seed, workers)
    endpoint = scan_cell(NormSpec.parse("fl:0.5:·:2"), 1.0, [2 ** 8, 2 ** 16], seeds, seed, workers)
    change_below = below.median_ratio(2 ** 14, 2 ** 10) - 1.0
    change_above = above.median_ratio(2 ** 14, 2 ** 10) - 1.0
    ratio = endpoint.median_ratio(2 ** 16, 2 ** 8)
    return [
        _record(Check("fbesov s=0.4 stable", abs(change_below) < 0.05, change_below, 0.05)),
        _record(Check("fbesov s=0.6 grows", change_above >= 0.25, change_above, 0.25)),
        _record(Check("fl s=0.5 log growth", 1.3 <= ratio <= 1.7, ratio, 1.7)),
    ]


def check_tails(scale: Dict, seed: int, workers: int = None) -> List[Check]:
    """Gaussian-tail fit at a convergent FL spec and at the Fourier-Besov endpoint."""
    checks = []
    for text in ("fl:0.3:·:2", "fbesov:0.5:2:inf"):
        estimate = tail_estimate(NormSpec.parse(text), 1.0, 2 ** 10, scale['tail_samples'],
                                 seed=seed, workers=workers)
        ok = (not estimate.degraded) and estimate.fitted_c > 0 and estimate.fit_r2 >= 0.9
        checks.append(_record(Check(f"tail {text}", ok, estimate.fit_r2, 0.9, estimate.summary())))
    return checks


def check_chernoff(scale: Dict, seed: int, workers: int = None) -> List[Check]:
    checks = []
    for j in (4, 8):
        for K2 in (3.0, 4.0):
            result = chernoff_check(j, K2, scale['chernoff_samples'], seed, workers)
            checks.append(Check(f"chernoff j={j} K2={K2}", result["passed"],
                                result["prob"], result["bound"], result))
    return checks


def _hyper_wick(seed: int) -> float:
    return wick_abs2n(sample_family(seed, 1, 1).draws[0], 1)


def _hyper_pair_free(seed: int) -> float:
    return pair_free_fast(sample_family(seed, 1, 16), 4)


def _reconstruction_gap(j: int, seed: int) -> np.ndarray:
    family = sample_family(seed, 1, 2 ** j)
    F = shell_moment(family, j, 2)
    parts = sum(value for _, value in chaos_project_F(family, j, 2))
    return np.array([abs(parts - F) / max(1.0, F), F])


def check_wick_chaos(scale: Dict, seed: int, workers: int = None) -> List[Check]:
    """Wick orthogonality, chaos reconstruction, E[F_j] and hypercontractive ratios."""
    band = MONTE_CARLO_SETTINGS['band_se']
    moments = wick_orthogonality(gaussian_stream(seed, scale['wick_samples']))
    worst = max(abs(mean) / se for mean, se in moments.values())
    checks = [_record(Check("wick orthogonality", worst <= band, worst, band))]

    j = 4
    gaps = run_samples(partial(_reconstruction_gap, j), seed, scale['chaos_families'],
                       workers).reshape(-1, 2)
    checks.append(_record(Check("chaos reconstruction", float(gaps[:, 0].max()) <= 1e-12,
                                float(gaps[:, 0].max()), 1e-12)))
    mean, se = mean_and_se(gaps[:, 1])
    expected = c_p_exact(4) * shell_size(1, j) / 2.0 ** j
    checks.append(_record(Check("E[F_j] = c_4", abs(mean - expected) <= 3.0 * se,
                                abs(mean - expected) / se, 3.0)))

    for name, order, fn in ((":|g|^2:", 2, _hyper_wick), ("II_4", 4, _hyper_pair_free)):
        samples = run_samples(fn, seed, scale['hyper_samples'], workers)
        report = hypercontractivity_check(samples, order, 4.0)
        checks.append(_record(Check(f"hypercontractivity {name}", report.passed,
                                    report.ratio, report.bound, report.to_dict())))
    return checks


def check_probe(scale: Dict, seed: int, workers: int = None, full: bool = False) -> List[Check]:
    """Subcritical tails vanish in probability; the endpoint tail does not."""
    samples = scale['probe_samples']
    sub = NormSpec.parse("fbesov:0.25:2:2")
    trail = [measurability_probe(sub, 1.0, M0, 0.5, samples, seed, workers).prob
             for M0 in (2 ** 8, 2 ** 10, 2 ** 12)]
    endpoint = NormSpec.parse("fbesov:0.5:2:inf")
    eps = c_p_exact(2.0) ** 0.5 / 2.0
    M0s = range(4, 15, 2) if full else (4, 8, 12)
    lowest = min(measurability_probe(endpoint, 1.0, 2 ** k, eps, samples, seed, workers).prob
                 for k in M0s)
    decreasing = all(a >= b for a, b in zip(trail, trail[1:]))
    return [
        _record(Check("probe subcritical", decreasing and trail[-1] <= 0.05, trail[-1], 0.05)),
        _record(Check("probe endpoint", lowest >= 0.4, lowest, 0.4)),
    ]


def _direct_fl(N: int, seed: int) -> float:
    return fl_norm(fourier_wiener_to_bridge(sample_path(seed, N, 1.0)), 0.3, 2.0)


def check_bridge(scale: Dict, seed: int, workers: int = None) -> List[Check]:
    """Bridge DFT statistics against the Fourier-Wiener law."""
    N, M = 16, 4096
    n_list = [1, 2, 5, 10]
    spectra = sample_bridge_spectra(scale['bridge_samples'], M, N, seed, workers)
    frequencies = lattice_points(1, N)[:, 0]
    entries = covariance_report(spectra, frequencies, n_list)
    worst = max(e.deviation_in_se for e in entries if e.m == e.n)
    checks = [_record(Check("bridge E|c_n|^2", worst <= 5.0, worst, 5.0))]

    column = {int(f): i for i, f in enumerate(frequencies)}
    gaussians = to_gaussian_scale(np.array(n_list), spectra[:, [column[n] for n in n_list]])
    ratio = fourth_moment_ratio(gaussians.ravel())
    checks.append(_record(Check("bridge fourth moment", 1.9 <= ratio <= 2.1, ratio, 2.1)))

    count = scale['bridge_norm_seeds']
    points = lattice_points(1, N)
    bridge_norms = [fl_norm(SpectralPath(1, N, 1.0, points, s), 0.3, 2.0)
                    for s in spectra[:count]]
    direct_norms = run_samples(partial(_direct_fl, N), seed + 1, count, workers)
    gap = abs(np.median(bridge_norms) / np.median(direct_norms) - 1.0)
    checks.append(_record(Check("bridge FL medians", gap <= 0.05, gap, 0.05)))
    return checks


def check_determinism(scale: Dict, seed: int, workers: int = None) -> List[Check]:
    """Identical CSV text for one and two workers."""
    fn = partial(_norm_sample, "fl:0.3:·:2", 1.0, 256, 1)
    texts = []
    for count in (1, 2):
        values = run_samples(fn, seed, 600, count, chunk_size=64)
        texts.append(pd.DataFrame({"value": values}).to_csv(
            index=False, float_format=OUTPUT_SETTINGS['float_format']))
    return [_record(Check("determinism across workers", texts[0] == texts[1]))]


CHECKS: Dict[str, Callable] = {
    "identity": check_fourier_identity,
    "moments": check_moments,
    "norms": check_norm_identities,
    "regimes": check_regime_contrast,
    "tails": check_tails,
    "chernoff": check_chernoff,
    "chaos": check_wick_chaos,
    "probe": check_probe,
    "bridge": check_bridge,
    "determinism": check_determinism,
}


def run_suite(scale: str = "desk", seed: int = None, workers: int = None,
              only: Optional[Sequence[str]] = None) -> List[Check]:
    """Run the selected checks (all by default) and return their outcomes."""
    if scale not in ACCEPTANCE_SETTINGS:
        raise ConfigError(f"scale must be one of {list(ACCEPTANCE_SETTINGS)} (got {scale!r})")
    names = list(only) if only else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown acceptance checks: {unknown}")
    seed = MONTE_CARLO_SETTINGS['default_seed'] if seed is None else seed
    sizes = ACCEPTANCE_SETTINGS[scale]

    checks: List[Check] = []
    for name in names:
        logger.info(f"Acceptance: {name} ({scale})")
        if name == "probe":
            checks.extend(check_probe(sizes, seed, workers, full=(scale == "full")))
        else:
            checks.extend(CHECKS[name](sizes, seed, workers))
    passed = sum(c.passed for c in checks)
    logger.info(f"Acceptance: {passed}/{len(checks)} checks passed")
    return checks
