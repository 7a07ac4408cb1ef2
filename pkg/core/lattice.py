"""
Lattice Module

Enumeration of the punctured lattice {n in Z^d : 0 < |n| <= N}, dyadic shell
membership, and the truncation-independent flat index used to key the
counter-based generator.
"""

import numpy as np

import sys
sys.path.append('..')
from core.errors import InvalidArgumentError


def lattice_points(dim: int, N: int) -> np.ndarray:
    """
    Lattice points with 0 < |n| <= N (Euclidean), in lexicographic order.

    Returns:
        int64 array of shape (K, dim)
    """
    if dim < 1 or N < 1:
        raise InvalidArgumentError(
            f"lattice needs dim >= 1 and N >= 1 (got dim={dim}, N={N})",
            {"dim": dim, "N": N}
        )
    side = 2 * N + 1
    # np.indices in C order is lexicographic with the first coordinate slowest
    grid = np.indices((side,) * dim).reshape(dim, -1).T.astype(np.int64) - N
    r2 = np.sum(grid * grid, axis=1)
    keep = (r2 > 0) & (r2 <= N * N)
    return np.ascontiguousarray(grid[keep])


def squared_norms(points: np.ndarray) -> np.ndarray:
    """Exact integer |n|^2 for each point."""
    points = np.asarray(points, dtype=np.int64)
    return np.sum(points * points, axis=1)


def euclidean_norms(points: np.ndarray) -> np.ndarray:
    return np.sqrt(squared_norms(points).astype(np.float64))


def japanese_bracket(points: np.ndarray) -> np.ndarray:
    """<n> = (1 + |n|^2)^{1/2}."""
    return np.sqrt(1.0 + squared_norms(points).astype(np.float64))


def shell_indices(points: np.ndarray) -> np.ndarray:
    """
    Dyadic shell index j of each point: S_0 = {|n| <= 1},
    S_j = {2^{j-1} < |n| <= 2^j}. Computed on integer |n|^2 so it is exact.
    """
    r2 = squared_norms(points)
    j = np.zeros(r2.shape, dtype=np.int64)
    big = r2 > 1
    if np.any(big):
        guess = np.ceil(np.log2(r2[big].astype(np.float64)) / 2.0).astype(np.int64)
        # one correction step each way absorbs log2 rounding
        guess = np.where(4 ** guess < r2[big], guess + 1, guess)
        guess = np.where((guess > 0) & (4 ** (guess - 1) >= r2[big]), guess - 1, guess)
        j[big] = guess
    return j


def shell_mask(points: np.ndarray, j: int) -> np.ndarray:
    """Boolean mask of the points lying in S_j."""
    r2 = squared_norms(points)
    if j == 0:
        return (r2 > 0) & (r2 <= 1)
    return (r2 > 4 ** (j - 1)) & (r2 <= 4 ** j)


def shell_size(dim: int, j: int) -> int:
    """#S_j, counted by enumeration (in d = 1 this is 2 for j = 0, 2^j otherwise)."""
    if dim == 1:
        return 2 if j == 0 else 2 ** j
    points = lattice_points(dim, 2 ** j)
    return int(np.count_nonzero(shell_mask(points, j)))


def flat_index(points: np.ndarray) -> np.ndarray:
    """
    Bijection Z^d minus the origin onto {0, 1, 2, ...} that does not depend on
    any truncation. Points are ordered by l-infinity shell r = max|n_i|, then
    lexicographically inside the shell.
    """
    p = np.asarray(points, dtype=np.int64)
    if p.ndim == 1:
        p = p[:, None]
    dim = p.shape[1]
    r = np.max(np.abs(p), axis=1)
    if np.any(r == 0):
        raise InvalidArgumentError("the origin has no flat index")

    base = (2 * r - 1) ** dim - 1
    cube_rank = np.zeros_like(r)
    interior_before = np.zeros_like(r)
    prefix_interior = np.ones(r.shape, dtype=bool)
    for i in range(dim):
        stride_cube = (2 * r + 1) ** (dim - 1 - i)
        stride_inner = (2 * r - 1) ** (dim - 1 - i)
        cube_rank += (p[:, i] + r) * stride_cube
        below = np.clip(p[:, i] + r - 1, 0, 2 * r - 1)
        interior_before += np.where(prefix_interior, below * stride_inner, 0)
        prefix_interior &= np.abs(p[:, i]) <= r - 1
    return base + cube_rank - interior_before
