"""
Tests for Lattice Enumeration
"""

import pytest
import numpy as np
import sys
sys.path.insert(0, '..')

from core.errors import InvalidArgumentError
from core.lattice import (
    flat_index, japanese_bracket, lattice_points, shell_indices, shell_mask, shell_size
)


def linf_box(dim: int, r: int) -> np.ndarray:
    """All points with max |n_i| <= r except the origin."""
    grid = np.indices((2 * r + 1,) * dim).reshape(dim, -1).T - r
    return grid[np.any(grid != 0, axis=1)]


class TestLatticePoints:
    """Test suite for lattice_points."""

    def test_one_dimensional(self):
        """Test d = 1 gives the punctured interval in order."""
        points = lattice_points(1, 3)
        assert points[:, 0].tolist() == [-3, -2, -1, 1, 2, 3]

    def test_two_dimensional_count(self):
        """Test the Euclidean disc of radius 2 has 12 nonzero points."""
        points = lattice_points(2, 2)
        assert len(points) == 12
        assert not np.any(np.all(points == 0, axis=1))

    def test_lexicographic_order(self):
        """Test points come out sorted lexicographically."""
        points = lattice_points(2, 5)
        order = np.lexsort(points.T[::-1])
        assert np.array_equal(order, np.arange(len(points)))

    def test_invalid_arguments(self):
        """Test dimension and radius must be positive."""
        with pytest.raises(InvalidArgumentError):
            lattice_points(0, 4)
        with pytest.raises(InvalidArgumentError):
            lattice_points(1, 0)

    def test_japanese_bracket(self):
        """Test <n> = sqrt(1 + |n|^2)."""
        assert japanese_bracket(np.array([[3, 4]]))[0] == pytest.approx(np.sqrt(26.0))


class TestShells:
    """Test suite for dyadic shells."""

    def test_shell_indices(self):
        """Test shell membership at the boundaries."""
        points = np.array([[1], [-1], [2], [3], [4], [5], [8], [9]])
        assert shell_indices(points).tolist() == [0, 0, 1, 2, 2, 3, 3, 4]

    def test_shell_size_one_dimensional(self):
        """Test #S_0 = 2 and #S_j = 2^j in d = 1."""
        assert shell_size(1, 0) == 2
        for j in range(1, 8):
            assert shell_size(1, j) == 2 ** j
            points = lattice_points(1, 2 ** j)
            assert np.count_nonzero(shell_mask(points, j)) == 2 ** j

    def test_shells_partition_the_disc(self):
        """Test shells 0..3 cover the d = 2 disc of radius 8 exactly once."""
        points = lattice_points(2, 8)
        total = sum(shell_size(2, j) for j in range(4))
        assert total == len(points)
        memberships = sum(shell_mask(points, j).astype(int) for j in range(4))
        assert np.all(memberships == 1)


class TestFlatIndex:
    """Test suite for the truncation-independent flat index."""

    def test_first_indices(self):
        """Test the innermost points get 0 and 1 in d = 1."""
        assert flat_index(np.array([[-1], [1], [-2], [2]])).tolist() == [0, 1, 2, 3]

    @pytest.mark.parametrize("dim,r", [(1, 6), (2, 1), (2, 4), (3, 2)])
    def test_bijection_on_boxes(self, dim, r):
        """Test the index maps each l-infinity box onto 0..size-1."""
        box = linf_box(dim, r)
        index = np.sort(flat_index(box))
        assert np.array_equal(index, np.arange(len(box)))

    def test_independent_of_truncation(self):
        """Test a point keeps its index whatever disc it is enumerated in."""
        small = lattice_points(2, 3)
        large = lattice_points(2, 9)
        lookup = dict(zip(map(tuple, large.tolist()), flat_index(large).tolist()))
        for point, index in zip(small.tolist(), flat_index(small).tolist()):
            assert lookup[tuple(point)] == index

    def test_origin_rejected(self):
        """Test the origin has no index."""
        with pytest.raises(InvalidArgumentError):
            flat_index(np.array([[0, 0]]))


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
