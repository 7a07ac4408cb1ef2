"""
Tests for Monte Carlo Replication
"""

from functools import partial

import pytest
import numpy as np
import sys
sys.path.insert(0, '..')

from core.deviations import _norm_sample
from core.errors import InvalidArgumentError
from core.montecarlo import (
    batch_ratio_se, binomial_se, mean_and_se, run_samples, sample_seed, sample_seeds,
    wilson_interval
)


def seed_fraction(seed: int) -> float:
    return (seed % 1000) / 1000.0


class TestSeeds:
    """Test suite for per-sample seed derivation."""

    def test_deterministic(self):
        """Test the same (master, index) always gives the same seed."""
        assert sample_seed(7, 3) == sample_seed(7, 3)
        assert 0 <= sample_seed(7, 3) < 2 ** 64

    def test_distinct(self):
        """Test seeds differ across indices and masters."""
        seeds = sample_seeds(7, 100)
        assert len(set(seeds)) == 100
        assert sample_seed(8, 0) != seeds[0]

    def test_offset(self):
        """Test a later start continues the same sequence."""
        assert sample_seeds(7, 5, start=3) == sample_seeds(7, 8)[3:]


class TestRunSamples:
    """Test suite for order-independent execution."""

    def test_order_and_values(self):
        """Test results follow sample indices."""
        values = run_samples(seed_fraction, 11, 10, workers=1)
        expected = [seed_fraction(s) for s in sample_seeds(11, 10)]
        assert values.tolist() == expected

    def test_chunking_does_not_matter(self):
        """Test different chunk sizes give the same array."""
        a = run_samples(seed_fraction, 11, 37, workers=1, chunk_size=5)
        b = run_samples(seed_fraction, 11, 37, workers=1, chunk_size=64)
        assert np.array_equal(a, b)

    def test_worker_independence(self):
        """Test one and two workers give bit-identical norms."""
        fn = partial(_norm_sample, "fl:0.3:·:2", 1.0, 64, 1)
        serial = run_samples(fn, 5, 12, workers=1, chunk_size=4)
        parallel = run_samples(fn, 5, 12, workers=2, chunk_size=4)
        assert serial.tobytes() == parallel.tobytes()

    def test_empty_and_negative(self):
        """Test zero samples is empty and negative counts are rejected."""
        assert run_samples(seed_fraction, 1, 0).size == 0
        with pytest.raises(InvalidArgumentError):
            run_samples(seed_fraction, 1, -1)


class TestEstimators:
    """Test suite for standard errors and intervals."""

    def test_mean_and_se(self):
        """Test mean 2 and SE 1/sqrt(3) for [1, 2, 3]."""
        mean, se = mean_and_se([1.0, 2.0, 3.0])
        assert mean == pytest.approx(2.0)
        assert se == pytest.approx(1.0 / np.sqrt(3.0))

    def test_mean_of_one_value(self):
        """Test a single value has no standard error."""
        mean, se = mean_and_se([4.0])
        assert mean == 4.0
        assert np.isnan(se)

    def test_binomial_se(self):
        """Test sqrt(p (1 - p) / n)."""
        assert binomial_se(0.5, 100) == pytest.approx(0.05)
        assert binomial_se(0.0, 100) == 0.0
        assert np.isnan(binomial_se(0.5, 0))

    def test_wilson_interval(self):
        """Test the interval brackets k/n and stays in [0, 1]."""
        lo, hi = wilson_interval(30, 100)
        assert 0.0 <= lo < 0.3 < hi <= 1.0
        lo, hi = wilson_interval(0, 50)
        assert lo == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < hi < 0.1
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_batch_ratio_se(self):
        """Test batch means of a sample mean shrink with the sample size."""
        rng = np.random.default_rng(3)
        small = batch_ratio_se(np.mean, rng.standard_normal(2_000))
        large = batch_ratio_se(np.mean, rng.standard_normal(200_000))
        assert large < small
        assert large == pytest.approx(1.0 / np.sqrt(200_000), rel=0.5)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
