"""Kernel evaluation, Gram matrices and the median-heuristic bandwidth."""
from typing import Iterator, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ..config import GRAM_CHUNK_ROWS, MEDIAN_MAX_POINTS, logger
from ..errors import ArgumentError, DegenerateDataError, DimensionMismatchError
from ..models import KernelFamily, KernelSpec
from ..utils import as_table


def _check_resolved(kernel: KernelSpec) -> None:
    if not kernel.is_resolved:
        raise ArgumentError(
            f"{kernel.family.value} kernel needs a bandwidth; resolve it with median_heuristic first"
        )


def _check_dims(X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatchError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]} columns")


def gram(kernel: KernelSpec, X, Y) -> np.ndarray:
    """Kernel matrix with entry (i, j) = k(x_i, y_j)."""
    _check_resolved(kernel)
    X = as_table(X, "X")
    Y = as_table(Y, "Y")
    _check_dims(X, Y)

    if kernel.family == KernelFamily.RBF:
        return np.exp(-cdist(X, Y, "sqeuclidean") / (2.0 * kernel.bandwidth ** 2))
    if kernel.family == KernelFamily.LAPLACIAN:
        return np.exp(-cdist(X, Y, "cityblock") / kernel.bandwidth)
    if kernel.family == KernelFamily.LINEAR:
        return X @ Y.T
    return (X @ Y.T + kernel.offset) ** kernel.degree


def paired(kernel: KernelSpec, X, Y) -> np.ndarray:
    """Row-aligned kernel values k(x_i, y_i); the diagonal of gram without building it."""
    _check_resolved(kernel)
    X = as_table(X, "X")
    Y = as_table(Y, "Y")
    _check_dims(X, Y)
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatchError(f"paired evaluation needs equal rows: {X.shape[0]} vs {Y.shape[0]}")

    if kernel.family == KernelFamily.RBF:
        return np.exp(-np.sum((X - Y) ** 2, axis=1) / (2.0 * kernel.bandwidth ** 2))
    if kernel.family == KernelFamily.LAPLACIAN:
        return np.exp(-np.sum(np.abs(X - Y), axis=1) / kernel.bandwidth)
    dots = np.einsum("ij,ij->i", X, Y)
    if kernel.family == KernelFamily.LINEAR:
        return dots
    return (dots + kernel.offset) ** kernel.degree


def eval(kernel: KernelSpec, x, y) -> float:
    """k(x, y) for two single points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.ndim != 1 or y.ndim != 1:
        raise ArgumentError("eval takes two points; use gram for tables")
    if x.shape != y.shape:
        raise DimensionMismatchError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return float(paired(kernel, x[None, :], y[None, :])[0])


def gram_chunks(kernel: KernelSpec, X, Y, chunk_rows: int = GRAM_CHUNK_ROWS) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield (row offset, block) of gram(kernel, X, Y) in fixed row order."""
    X = as_table(X, "X")
    for start in range(0, X.shape[0], chunk_rows):
        yield start, gram(kernel, X[start:start + chunk_rows], Y)


def kernel_sum(kernel: KernelSpec, X, Y, exclude_diagonal: bool = False) -> float:
    """Sum of gram(kernel, X, Y) computed block-wise; optionally drops i == j terms (X is Y)."""
    X = as_table(X, "X")
    total = 0.0
    for start, block in gram_chunks(kernel, X, Y):
        total += float(block.sum())
        if exclude_diagonal:
            rows = np.arange(block.shape[0])
            total -= float(block[rows, start + rows].sum())
    return total


def median_heuristic(
    X,
    Y,
    include_diagonal: bool = False,
    max_points: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """
    Median of the squared pairwise distances of the pooled sample, used directly as sigma.

    Pairs i < j are used unless include_diagonal, which adds the n zero self-distances
    (the literal "for all i, j" reading). max_points subsamples the pooled set first.
    """
    X = as_table(X, "X")
    Y = as_table(Y, "Y")
    _check_dims(X, Y)
    Z = np.vstack([X, Y])
    if Z.shape[0] < 2:
        raise ArgumentError("median heuristic needs at least two pooled points")

    if max_points is not None and Z.shape[0] > max_points:
        rng = rng if rng is not None else np.random.default_rng(0)
        # subsample from the lexicographically ordered pool
        Z = Z[np.lexsort(Z.T[::-1])]
        Z = Z[np.sort(rng.choice(Z.shape[0], size=max_points, replace=False))]
        logger.debug(f"Median heuristic on a subsample of {max_points} points")

    sq = pdist(Z, "sqeuclidean")
    if not np.any(sq > 0):
        raise DegenerateDataError("all pooled points are identical; median heuristic is undefined")
    if include_diagonal:
        # Every unordered pair appears twice in the full matrix; duplicating keeps the median unchanged
        sq = np.concatenate([sq, sq, np.zeros(Z.shape[0])])

    sigma = float(np.median(sq))
    if sigma <= 0:
        raise DegenerateDataError("median squared distance is zero (more than half of the pairs coincide)")
    return sigma


def resolve_kernel(kernel: KernelSpec, X, Y, include_diagonal: bool = False) -> KernelSpec:
    """Fill in a median-heuristic bandwidth when the kernel needs one and has none."""
    if kernel.is_resolved:
        return kernel
    sigma = median_heuristic(X, Y, include_diagonal=include_diagonal, max_points=MEDIAN_MAX_POINTS)
    logger.debug(f"Median heuristic bandwidth: {sigma:.6g}")
    return kernel.with_bandwidth(sigma)
