"""Order statistics, empirical quantiles and projections through RKHS directions."""
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import ArgumentError, DimensionMismatchError
from ..models import KernelSpec
from ..utils import as_table
from .directions import Direction
from .kernels import gram


@dataclass(frozen=True)
class ProjectedSample:
    """The numbers u(x_1), ..., u(x_n)."""
    values: np.ndarray
    sorted: bool = False

    def __len__(self) -> int:
        return self.values.shape[0]

    def sort(self) -> "ProjectedSample":
        if self.sorted:
            return self
        return ProjectedSample(np.sort(self.values), sorted=True)

    def quantile(self, alpha: float) -> float:
        s = self.sort()
        return float(s.values[quantile_index(alpha, len(s)) - 1])


def _as_vector(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise ArgumentError(f"expected a vector, got shape {v.shape}")
    return v


def order_statistic(values, j: int) -> float:
    """The j-th smallest element (1-based); ties count with multiplicity."""
    v = _as_vector(values)
    n = v.shape[0]
    if not 1 <= j <= n:
        raise ArgumentError(f"order statistic index {j} outside 1..{n}")
    return float(np.partition(v, j - 1)[j - 1])


def quantile_index(alpha: float, n: int) -> int:
    """max(1, ceil(alpha n)) for alpha in [0, 1]."""
    if not 0.0 <= alpha <= 1.0:
        raise ArgumentError(f"quantile level must lie in [0, 1], got {alpha}")
    if n < 1:
        raise ArgumentError("empirical quantile of an empty sample")
    # round() absorbs float noise such as 0.95 * 300 = 285.00000000000006
    return max(1, math.ceil(round(alpha * n, 9)))


def empirical_quantile(values, alpha: float) -> float:
    """Order-statistic quantile estimator [v]_{ceil(alpha n)}."""
    v = _as_vector(values)
    return order_statistic(v, quantile_index(alpha, v.shape[0]))


def empirical_quantiles(values, alphas: Sequence[float]) -> np.ndarray:
    """empirical_quantile for many levels, sorting once."""
    v = np.sort(_as_vector(values))
    return np.array([v[quantile_index(a, v.shape[0]) - 1] for a in alphas])


def project(direction: Direction, X) -> ProjectedSample:
    """values_i = u(x_i)."""
    return ProjectedSample(direction(X), sorted=False)


def project_all(directions: List[Direction], X) -> np.ndarray:
    """
    Projections of X through every direction as an l x n matrix.

    Directions sharing the same landmark array reuse one kernel matrix k(z, X).
    """
    X = as_table(X, "X")
    if not directions:
        raise ArgumentError("no directions to project on")
    out = np.empty((len(directions), X.shape[0]))
    blocks: Dict[Tuple[int, KernelSpec], np.ndarray] = {}
    for i, u in enumerate(directions):
        if u.dim != X.shape[1]:
            raise DimensionMismatchError(f"direction lives in dimension {u.dim}, data has {X.shape[1]}")
        key = (id(u.landmarks), u.kernel)
        if key not in blocks:
            blocks[key] = gram(u.kernel, u.landmarks, X)
        out[i] = u.coefficients @ blocks[key]
    return out
