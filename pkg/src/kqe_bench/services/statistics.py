"""
Statistic registry and the pooled evaluation engine shared by single evaluations and
permutation tests.

A PreparedStatistic is built once from the pooled sample: bandwidth, directions, projections
and (when small enough) the pooled Gram matrix are fixed, and every relabelling is then
evaluated by index.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..config import GRAM_CACHE_MAX_POINTS, MEDIAN_MAX_POINTS, logger
from ..errors import ArgumentError, DimensionMismatchError, UnsupportedConfigurationError
from ..models import (
    EQUAL_SIZE_STATISTICS,
    KQD_STATISTICS,
    MMD_STATISTICS,
    KernelSpec,
    ReferenceMode,
    StatisticName,
    StatisticSpec,
)
from ..utils import SeedLike, as_generator, as_table
from . import discrepancies as disc
from .discrepancies import slicing_projections
from .directions import Direction, ReferenceMeasure, sample_directions
from .kernels import gram, median_heuristic
from .quantiles import project_all


# Relabellings evaluated per matrix product for Gram-backed MMD
SPLIT_BLOCK = 64


@dataclass(frozen=True)
class StatisticInfo:
    name: StatisticName
    description: str
    cost: str


REGISTRY: Dict[StatisticName, StatisticInfo] = {
    info.name: info
    for info in [
        StatisticInfo(StatisticName.EKQD, "Expected kernel quantile discrepancy over l Gaussian-measure directions", "O(l n log n + l m n)"),
        StatisticInfo(StatisticName.EKQD_CENTERED, "Centered e-KQD_2 (uncentered term + MMD_U^2 - mean differences)", "O(n^2)"),
        StatisticInfo(StatisticName.SUPKQD, "Largest directional quantile discrepancy over the sampled directions", "O(l n log n + l m n)"),
        StatisticInfo(StatisticName.SUPKQD_CENTERED, "Centered sup-KQD_2 over the sampled directions", "O(n^2)"),
        StatisticInfo(StatisticName.MMD_U, "Unbiased U-statistic MMD^2", "O(n^2)"),
        StatisticInfo(StatisticName.MMD_V, "Biased V-statistic MMD^2", "O(n^2)"),
        StatisticInfo(StatisticName.MMD_LIN, "Linear-time MMD^2 over disjoint pairs", "O(n)"),
        StatisticInfo(StatisticName.MMD_MULTI, "Incomplete U-statistic MMD^2 over r subdiagonals", "O(n r)"),
        StatisticInfo(StatisticName.SW, "Expected sliced Wasserstein distance", "O(l n log n + l n d)"),
        StatisticInfo(StatisticName.MAX_SW, "Max sliced Wasserstein over sampled directions", "O(l n log n + l n d)"),
    ]
}


@dataclass(frozen=True)
class Evaluation:
    """One statistic value: `raw` is what permutation tests threshold, `value` is the distance scale."""
    name: StatisticName
    value: float
    raw: float
    bandwidth: Optional[float] = None
    l: Optional[int] = None
    m: Optional[int] = None
    r: Optional[int] = None
    n: int = 0

    def to_dict(self) -> Dict:
        return {
            "statistic": self.name.value,
            "value": self.value,
            "raw": self.raw,
            "bandwidth": self.bandwidth,
            "l": self.l,
            "m": self.m,
            "r": self.r,
            "n": self.n,
        }


def canonical_order(Z: np.ndarray) -> np.ndarray:
    """Row order sorting the pooled points lexicographically (first column most significant)."""
    return np.lexsort(Z.T[::-1])


def _validate_sizes(name: StatisticName, X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatchError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]} columns")
    needs_equal = name in EQUAL_SIZE_STATISTICS or name in (StatisticName.MMD_LIN, StatisticName.MMD_MULTI)
    if needs_equal and X.shape[0] != Y.shape[0]:
        raise DimensionMismatchError(f"{name.value} needs equal sample sizes, got {X.shape[0]} and {Y.shape[0]}")
    if X.shape[0] < 1 or Y.shape[0] < 1:
        raise ArgumentError("empty samples")


class PreparedStatistic:
    """A statistic frozen on the pooled sample of X and Y."""

    def __init__(
        self,
        spec: StatisticSpec,
        X,
        Y,
        rng: SeedLike,
        reference_points: Optional[np.ndarray] = None,
    ):
        X = as_table(X, "X")
        Y = as_table(Y, "Y")
        _validate_sizes(spec.name, X, Y)
        rng = as_generator(rng)

        self.spec = spec
        self.name = spec.name
        self.nx, self.ny = X.shape[0], Y.shape[0]
        pooled = np.vstack([X, Y])
        order = canonical_order(pooled)
        self.points = pooled[order]
        # Positions of the original rows inside the canonical pool, in their input order
        position = np.empty_like(order)
        position[order] = np.arange(order.shape[0])
        self.observed_ix = position[:self.nx]
        self.observed_iy = position[self.nx:]

        self.kernel: Optional[KernelSpec] = None
        self.directions: List[Direction] = []
        self.projections: Optional[np.ndarray] = None
        self.gram: Optional[np.ndarray] = None
        self.weights: Optional[np.ndarray] = None
        self.l: Optional[int] = None
        self.m: Optional[int] = None
        self.r: Optional[int] = None

        if spec.name in KQD_STATISTICS or spec.name in MMD_STATISTICS:
            self.kernel = self._resolve_kernel(spec.kernel)
        if spec.name in KQD_STATISTICS:
            self._prepare_quantiles(rng, reference_points)
        elif spec.name in (StatisticName.SW, StatisticName.MAX_SW):
            self._prepare_slices(rng)
        if spec.name == StatisticName.MMD_MULTI:
            self.r = spec.resolve_r(self.nx)
        if spec.name in (StatisticName.MMD_U, StatisticName.MMD_V, StatisticName.EKQD_CENTERED,
                         StatisticName.SUPKQD_CENTERED):
            if self.points.shape[0] <= GRAM_CACHE_MAX_POINTS:
                self.gram = gram(self.kernel, self.points, self.points)
            else:
                logger.debug(f"Pooled size {self.points.shape[0]} above Gram cache limit; sums are chunked")

    @property
    def bandwidth(self) -> Optional[float]:
        return self.kernel.bandwidth if self.kernel is not None else None

    def _resolve_kernel(self, kernel: KernelSpec) -> KernelSpec:
        if kernel.is_resolved:
            return kernel
        sigma = median_heuristic(
            self.points[:self.nx],
            self.points[self.nx:],
            include_diagonal=self.spec.median_include_diagonal,
            max_points=MEDIAN_MAX_POINTS,
        )
        logger.debug(f"Median heuristic bandwidth for {self.name.value}: {sigma:.6g}")
        return kernel.with_bandwidth(sigma)

    def _prepare_quantiles(self, rng: np.random.Generator, reference_points: Optional[np.ndarray]) -> None:
        cfg = self.spec.kqd
        if cfg.p != 2 and self.name in (StatisticName.EKQD_CENTERED, StatisticName.SUPKQD_CENTERED):
            raise UnsupportedConfigurationError(f"centered KQD is defined for p = 2 only, got p = {cfg.p}")
        n = self.nx
        self.l = cfg.resolve_l(n)
        self.m = cfg.resolve_m(n)
        if cfg.reference == ReferenceMode.USER:
            if reference_points is None:
                raise ArgumentError("user-supplied reference measure needs reference points")
            ref = ReferenceMeasure.user(reference_points)
            if ref.points.shape[1] != self.points.shape[1]:
                raise DimensionMismatchError(
                    f"reference points have {ref.points.shape[1]} columns, data has {self.points.shape[1]}"
                )
        else:
            # landmarks come from the canonical pool so they do not depend on which sample is X
            ref = ReferenceMeasure(cfg.reference, self.points)
        self.directions = sample_directions(self.kernel, ref, self.m, self.l, rng, fresh_landmarks=cfg.fresh_landmarks)
        self.projections = project_all(self.directions, self.points)
        self.weights = disc.level_weights(cfg.weighting, n)

    def _prepare_slices(self, rng: np.random.Generator) -> None:
        n = self.nx
        self.l = self.spec.kqd.resolve_l(n)
        directions = slicing_projections(self.points[:n], self.points[n:], self.l, rng, self.spec.sw_source)
        self.projections = (self.points @ directions).T

    def _mmd2(self, ix: np.ndarray, iy: np.ndarray, unbiased: bool = True) -> float:
        if self.gram is None:
            if unbiased:
                return disc.mmd2_u(self.points[ix], self.points[iy], self.kernel)
            return disc.mmd2_v(self.points[ix], self.points[iy], self.kernel)
        if unbiased and (ix.shape[0] < 2 or iy.shape[0] < 2):
            raise ArgumentError("U-statistic needs at least two points per sample")
        a = disc.split_indicator(self.points.shape[0], ix)
        return float(disc.mmd2_from_gram(self.gram, a, unbiased))

    def evaluate(self, ix: np.ndarray, iy: np.ndarray) -> Evaluation:
        """Statistic for the split of the pooled points into rows ix (X side) and iy (Y side)."""
        name = self.name
        p = self.spec.kqd.p

        if name in KQD_STATISTICS:
            px = self.projections[:, ix]
            py = self.projections[:, iy]
            terms = disc.sorted_gap_means(px, py, p, self.weights)
            if name == StatisticName.EKQD:
                raw = float(np.mean(terms))
            elif name == StatisticName.SUPKQD:
                raw = float(np.max(terms))
            else:
                mean_diffs = disc.mean_difference_terms(px, py)
                mmd2 = self._mmd2(ix, iy)
                if name == StatisticName.EKQD_CENTERED:
                    raw = float(np.mean(terms) + mmd2 - np.mean(mean_diffs))
                else:
                    raw = float(np.max(terms - mean_diffs) + mmd2)
            return self._result(raw, disc.root(raw, p))

        if name in (StatisticName.SW, StatisticName.MAX_SW):
            terms = disc.sorted_gap_means(self.projections[:, ix], self.projections[:, iy], p)
            raw = float(np.max(terms)) if name == StatisticName.MAX_SW else float(np.mean(terms))
            return self._result(raw, disc.root(raw, p))

        if name in (StatisticName.MMD_U, StatisticName.MMD_V):
            raw = self._mmd2(ix, iy, unbiased=name == StatisticName.MMD_U)
        elif name == StatisticName.MMD_LIN:
            raw = disc.mmd2_linear(self.points[ix], self.points[iy], self.kernel)
        else:
            raw = disc.mmd2_multi(self.points[ix], self.points[iy], self.kernel, self.r)
        return self._result(raw, disc.root(raw, 2))

    def evaluate_splits(self, perms: Sequence[np.ndarray]) -> np.ndarray:
        """
        Raw statistic for each relabelling; perm[:nx] is the X side of the split.

        Gram-backed MMD statistics are evaluated in blocks of splits with one matrix product.
        """
        if self.gram is not None and self.name in (StatisticName.MMD_U, StatisticName.MMD_V):
            if self.nx < 2 or self.ny < 2:
                raise ArgumentError("U-statistic needs at least two points per sample")
            out = np.empty(len(perms))
            for start in range(0, len(perms), SPLIT_BLOCK):
                block = perms[start:start + SPLIT_BLOCK]
                A = np.zeros((self.points.shape[0], len(block)))
                for j, perm in enumerate(block):
                    A[perm[:self.nx], j] = 1.0
                out[start:start + len(block)] = disc.mmd2_from_gram(self.gram, A, self.name == StatisticName.MMD_U)
            return out
        return np.array([self.evaluate(perm[:self.nx], perm[self.nx:]).raw for perm in perms])

    def observed(self) -> Evaluation:
        """The statistic on the samples as given (X rows keep their input order)."""
        return self.evaluate(self.observed_ix, self.observed_iy)

    def _result(self, raw: float, value: float) -> Evaluation:
        return Evaluation(
            name=self.name,
            value=value,
            raw=raw,
            bandwidth=self.bandwidth,
            l=self.l,
            m=self.m,
            r=self.r,
            n=self.nx,
        )


def compute_statistic(
    spec: StatisticSpec,
    X,
    Y,
    rng: SeedLike = 0,
    reference_points: Optional[np.ndarray] = None,
) -> Evaluation:
    """Evaluate a registered statistic once on (X, Y)."""
    if spec.name not in REGISTRY:
        raise ArgumentError(f"unknown statistic {spec.name}")
    return PreparedStatistic(spec, X, Y, rng, reference_points).observed()
