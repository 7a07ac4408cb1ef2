"""
Monte Carlo Module

Order-independent replication over seeds. Sample i always receives the seed
derived from (master_seed, i), and results are stored by sample index, so the
output array is the same for any worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy import stats

import sys
sys.path.append('..')
from config.settings import MONTE_CARLO_SETTINGS
from core.errors import InvalidArgumentError
from utils.logger import get_logger

logger = get_logger(__name__)


def sample_seed(master_seed: int, index: int) -> int:
    """64-bit seed for sample ``index`` under ``master_seed``."""
    state = np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1, np.uint64)
    return int(state[0])


def sample_seeds(master_seed: int, n_samples: int, start: int = 0) -> List[int]:
    return [sample_seed(master_seed, i) for i in range(start, start + n_samples)]


def _run_chunk(args: Tuple[Callable, int, int, int]) -> List:
    fn, master_seed, start, stop = args
    return [fn(sample_seed(master_seed, i)) for i in range(start, stop)]


def run_samples(fn: Callable[[int], object], master_seed: int, n_samples: int,
                workers: int = None, chunk_size: int = None) -> np.ndarray:
    """
    Evaluate ``fn(seed_i)`` for i = 0..n_samples-1.

    Args:
        fn: Picklable callable taking a 64-bit seed (module-level function or
            functools.partial of one when workers > 1)
        master_seed: Run seed
        n_samples: Number of samples
        workers: Process count; 1 runs inline
        chunk_size: Samples per task

    Returns:
        Array of results ordered by sample index
    """
    if n_samples < 0:
        raise InvalidArgumentError(f"n_samples must be >= 0 (got {n_samples})")
    workers = workers or MONTE_CARLO_SETTINGS['default_workers']
    chunk_size = chunk_size or MONTE_CARLO_SETTINGS['chunk_size']
    bounds = [(start, min(start + chunk_size, n_samples))
              for start in range(0, n_samples, chunk_size)]
    tasks = [(fn, master_seed, start, stop) for start, stop in bounds]

    logger.debug(f"Running {n_samples} samples in {len(tasks)} chunks on {workers} worker(s)")
    if workers <= 1 or len(tasks) <= 1:
        chunks = [_run_chunk(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map keeps task order, so chunks line up with sample indices
            chunks = list(pool.map(_run_chunk, tasks))

    results = [value for chunk in chunks for value in chunk]
    return np.asarray(results)


def mean_and_se(x: Sequence[float]) -> Tuple[float, float]:
    """Sample mean and its standard error."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < 2:
        return float(np.mean(x)) if x.size else float('nan'), float('nan')
    return float(np.mean(x)), float(np.std(x, ddof=1) / np.sqrt(x.size))


def binomial_se(p: float, n: int) -> float:
    if n <= 0:
        return float('nan')
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / n))


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for k successes in n trials."""
    if n <= 0:
        return 0.0, 1.0
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence,
                                                      method='wilson')
    return float(ci.low), float(ci.high)


def batch_ratio_se(numerator: Callable[[np.ndarray], float], samples: np.ndarray,
                   batches: int = None) -> float:
    """Standard error of a plug-in statistic by batch means."""
    batches = batches or MONTE_CARLO_SETTINGS['batch_count']
    parts = np.array_split(np.asarray(samples), batches)
    values = np.array([numerator(part) for part in parts if len(part)])
    if values.size < 2:
        return float('nan')
    return float(np.std(values, ddof=1) / np.sqrt(values.size))
