"""
Discrepancy statistics: quantile discrepancies (e-KQD, sup-KQD and their centered forms),
MMD estimators, and one-dimensional / sliced Wasserstein distances.

Quantile-based statistics compare sorted projections: the j-th smallest projected x
against the j-th smallest projected y, weighted by f_nu(j / n).
"""
from typing import List, Optional

import numpy as np

from ..errors import ArgumentError, DimensionMismatchError, UnsupportedConfigurationError
from ..models import KernelSpec, KqdConfig, QuantileWeighting, SlicedMode, SlicingSource, StatisticSpec
from ..utils import SeedLike, as_generator, as_table
from .directions import Direction, data_directions, sphere_directions
from .kernels import kernel_sum, paired
from .quantiles import project_all


def _equal_sizes(X: np.ndarray, Y: np.ndarray) -> int:
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatchError(f"quantile statistics need equal sample sizes, got {X.shape[0]} and {Y.shape[0]}")
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatchError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]} columns")
    if X.shape[0] < 1:
        raise ArgumentError("empty samples")
    return X.shape[0]


def root(value: float, p: int) -> float:
    """p-th root after clamping at zero."""
    return float(max(value, 0.0) ** (1.0 / p))


def level_weights(weighting: QuantileWeighting, n: int) -> np.ndarray:
    """f_nu(j / n) for j = 1..n."""
    return weighting.density(np.arange(1, n + 1) / n)


def sorted_gap_means(px: np.ndarray, py: np.ndarray, p: int, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Per row i: (1/n) sum_j |[px_i]_j - [py_i]_j|^p w_j, for l x n projection matrices.
    """
    gaps = np.abs(np.sort(px, axis=1) - np.sort(py, axis=1)) ** p
    if weights is not None:
        gaps = gaps * weights
    return gaps.mean(axis=1)


def mean_difference_terms(px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Per direction: (mean u(x) - mean u(y))^2."""
    return (px.mean(axis=1) - py.mean(axis=1)) ** 2


def _check_directions(kernel: KernelSpec, directions: List[Direction]) -> None:
    if not directions:
        raise ArgumentError("at least one direction is required")
    for u in directions:
        if u.kernel != kernel:
            raise ArgumentError("directions were sampled with a different kernel than the one supplied")


def kqd_terms(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]) -> np.ndarray:
    """tau_p^p for every direction."""
    X = as_table(X, "X")
    Y = as_table(Y, "Y")
    n = _equal_sizes(X, Y)
    _check_directions(kernel, directions)
    return sorted_gap_means(
        project_all(directions, X), project_all(directions, Y), cfg.p, level_weights(cfg.weighting, n)
    )


def ekqd_p_power(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]) -> float:
    """e-KQD_p^p: average of tau_p^p over the directions."""
    return float(np.mean(kqd_terms(X, Y, kernel, cfg, directions)))


def ekqd_p(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]) -> float:
    """Monte-Carlo e-KQD_p over the given directions."""
    return root(ekqd_p_power(X, Y, kernel, cfg, directions), cfg.p)


def supkqd_p_power(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]) -> float:
    return float(np.max(kqd_terms(X, Y, kernel, cfg, directions)))


def supkqd_p(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]) -> float:
    """Largest directional term over the sampled directions."""
    return root(supkqd_p_power(X, Y, kernel, cfg, directions), cfg.p)


def _centered_parts(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]):
    if cfg.p != 2:
        raise UnsupportedConfigurationError(f"centered KQD is defined for p = 2 only, got p = {cfg.p}")
    X = as_table(X, "X")
    Y = as_table(Y, "Y")
    n = _equal_sizes(X, Y)
    _check_directions(kernel, directions)
    px = project_all(directions, X)
    py = project_all(directions, Y)
    terms = sorted_gap_means(px, py, 2, level_weights(cfg.weighting, n))
    return terms, mean_difference_terms(px, py), mmd2_u(X, Y, kernel)


def ekqd2_centered_squared(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]) -> float:
    """e-KQD_2^2 + MMD_U^2 - mean squared mean-difference; may be negative."""
    terms, mean_diffs, mmd2 = _centered_parts(X, Y, kernel, cfg, directions)
    return float(np.mean(terms) + mmd2 - np.mean(mean_diffs))


def ekqd2_centered(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]) -> float:
    """Centered e-KQD_2, clamped at zero before the root."""
    return root(ekqd2_centered_squared(X, Y, kernel, cfg, directions), 2)


def supkqd2_centered_squared(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]) -> float:
    terms, mean_diffs, mmd2 = _centered_parts(X, Y, kernel, cfg, directions)
    return float(np.max(terms - mean_diffs) + mmd2)


def supkqd2_centered(X, Y, kernel: KernelSpec, cfg: KqdConfig, directions: List[Direction]) -> float:
    """Centered sup-KQD_2 over the sampled directions."""
    return root(supkqd2_centered_squared(X, Y, kernel, cfg, directions), 2)


# MMD estimators

def _mmd_inputs(X, Y):
    X = as_table(X, "X")
    Y = as_table(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatchError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]} columns")
    # Canonical argument order: D(X, Y) and D(Y, X) evaluate identical sums
    if (Y.shape, Y.tobytes()) < (X.shape, X.tobytes()):
        return Y, X
    return X, Y


def mmd2_u(X, Y, kernel: KernelSpec) -> float:
    """Unbiased U-statistic estimate of MMD^2 (within-sample i = j terms excluded)."""
    X, Y = _mmd_inputs(X, Y)
    n, m = X.shape[0], Y.shape[0]
    if n < 2 or m < 2:
        raise ArgumentError(f"U-statistic needs at least two points per sample, got {n} and {m}")
    xx = kernel_sum(kernel, X, X, exclude_diagonal=True) / (n * (n - 1))
    yy = kernel_sum(kernel, Y, Y, exclude_diagonal=True) / (m * (m - 1))
    xy = kernel_sum(kernel, X, Y) / (n * m)
    return float(xx + yy - 2.0 * xy)


def mmd2_v(X, Y, kernel: KernelSpec) -> float:
    """Biased V-statistic estimate of MMD^2."""
    X, Y = _mmd_inputs(X, Y)
    n, m = X.shape[0], Y.shape[0]
    if n < 1 or m < 1:
        raise ArgumentError("empty samples")
    xx = kernel_sum(kernel, X, X) / (n * n)
    yy = kernel_sum(kernel, Y, Y) / (m * m)
    xy = kernel_sum(kernel, X, Y) / (n * m)
    return float(xx + yy - 2.0 * xy)


def gram_block_sums(K: np.ndarray, a: np.ndarray):
    """
    Within-X, within-Y and cross sums of a pooled Gram matrix.

    `a` holds 0/1 indicators of the X side, either one split (N,) or one split per column (N, B).
    """
    b = 1.0 - a
    Ka = K @ a
    Kb = K @ b
    cross = 0.5 * (np.sum(a * Kb, axis=0) + np.sum(b * Ka, axis=0))
    return np.sum(a * Ka, axis=0), np.sum(b * Kb, axis=0), cross


def mmd2_from_gram(K: np.ndarray, a: np.ndarray, unbiased: bool = True):
    """mmd2_u (or mmd2_v) for the split(s) of the pooled points given by indicator(s) `a`."""
    nx = np.sum(a, axis=0)
    ny = K.shape[0] - nx
    s_xx, s_yy, s_xy = gram_block_sums(K, a)
    if not unbiased:
        return s_xx / (nx * nx) + s_yy / (ny * ny) - 2.0 * s_xy / (nx * ny)
    diag = np.diagonal(K)
    tr_x = diag @ a
    tr_y = diag @ (1.0 - a)
    return (s_xx - tr_x) / (nx * (nx - 1)) + (s_yy - tr_y) / (ny * (ny - 1)) - 2.0 * s_xy / (nx * ny)


def split_indicator(n_points: int, ix: np.ndarray) -> np.ndarray:
    a = np.zeros(n_points)
    a[ix] = 1.0
    return a


def mmd2_linear(X, Y, kernel: KernelSpec) -> float:
    """Linear-time MMD^2 over floor(n/2) disjoint pairs; a trailing odd sample is dropped."""
    X, Y = _mmd_inputs(X, Y)
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatchError(f"MMD-Lin needs equal sample sizes, got {X.shape[0]} and {Y.shape[0]}")
    half = X.shape[0] // 2
    if half < 1:
        raise ArgumentError("MMD-Lin needs at least two points per sample")
    x1, x2 = X[0:2 * half:2], X[1:2 * half:2]
    y1, y2 = Y[0:2 * half:2], Y[1:2 * half:2]
    h = paired(kernel, x1, x2) + paired(kernel, y1, y2) - paired(kernel, x1, y2) - paired(kernel, x2, y1)
    return float(h.sum() / half)


def mmd2_multi(X, Y, kernel: KernelSpec, r: Optional[int] = None) -> float:
    """
    Incomplete U-statistic over the first r subdiagonals:
    2 / (r (2n - r - 1)) sum_{j<=r} sum_{i<=n-j} h(i, i + j).
    """
    X, Y = _mmd_inputs(X, Y)
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatchError(f"MMD-Multi needs equal sample sizes, got {X.shape[0]} and {Y.shape[0]}")
    n = X.shape[0]
    if r is None:
        r = StatisticSpec().resolve_r(n)
    if not 1 <= r <= n - 1:
        raise ArgumentError(f"subdiagonal count r must lie in 1..{n - 1}, got {r}")

    total = 0.0
    for j in range(1, r + 1):
        a, b = slice(0, n - j), slice(j, n)
        h = paired(kernel, X[a], X[b]) + paired(kernel, Y[a], Y[b]) - paired(kernel, X[a], Y[b]) - paired(kernel, X[b], Y[a])
        total += float(h.sum())
    return 2.0 * total / (r * (2 * n - r - 1))


# Wasserstein distances

def wasserstein_1d_power(x, y, p: int) -> float:
    """(1/n) sum_j |[x]_j - [y]_j|^p."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] == 0:
        raise ArgumentError("empty samples")
    if p < 1:
        raise ArgumentError(f"power must be at least 1, got {p}")
    return float(sorted_gap_means(x[None, :], y[None, :], p)[0])


def wasserstein_1d(x, y, p: int = 1) -> float:
    """p-Wasserstein distance between two equal-size empirical measures on the line."""
    return root(wasserstein_1d_power(x, y, p), p)


def slicing_projections(X, Y, l: int, rng: SeedLike, source: SlicingSource = SlicingSource.SPHERE) -> np.ndarray:
    """d x l matrix of unit directions for sliced Wasserstein."""
    X = as_table(X, "X")
    Y = as_table(Y, "Y")
    rng = as_generator(rng)
    if source == SlicingSource.DATA:
        return data_directions(np.vstack([X, Y]), l, rng)
    return sphere_directions(X.shape[1], l, rng)


def sliced_terms(X, Y, projections: np.ndarray, p: int) -> np.ndarray:
    """W_p^p of the projected samples for every column of `projections`."""
    X = as_table(X, "X")
    Y = as_table(Y, "Y")
    _equal_sizes(X, Y)
    if projections.shape[0] != X.shape[1]:
        raise DimensionMismatchError(f"projections have dimension {projections.shape[0]}, data {X.shape[1]}")
    return sorted_gap_means((X @ projections).T, (Y @ projections).T, p)


def sliced_wasserstein(
    X,
    Y,
    l: int,
    p: int,
    rng: SeedLike,
    mode: SlicedMode = SlicedMode.EXPECTED,
    projections: Optional[np.ndarray] = None,
    source: SlicingSource = SlicingSource.SPHERE,
) -> float:
    """
    Expected (mean of W_p^p, then root) or max (largest W_p) sliced Wasserstein distance
    over l random directions, or over explicit `projections` (d x l) when given.
    """
    X = as_table(X, "X")
    Y = as_table(Y, "Y")
    if X.shape[1] < 1:
        raise ArgumentError("data must have at least one dimension")
    if projections is None:
        if l < 1:
            raise ArgumentError(f"need at least one direction, got l={l}")
        projections = slicing_projections(X, Y, l, rng, source)
    terms = sliced_terms(X, Y, projections, p)
    if mode == SlicedMode.MAX:
        return root(float(np.max(terms)), p)
    return root(float(np.mean(terms)), p)
