"""Unit-norm RKHS directions sampled from a projected Gaussian measure."""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import stats

from ..config import DIRECTION_RESAMPLE_ATTEMPTS, logger
from ..errors import ArgumentError, DegenerateDataError, DimensionMismatchError
from ..models import KernelFamily, KernelSpec, ReferenceMode
from ..utils import as_table
from .kernels import gram

# IQR of the standard normal
_NORMAL_IQR = 1.349


@dataclass(frozen=True, eq=False)
class Direction:
    """u(x) = sum_j c_j k(z_j, x), an RKHS function given by landmarks and coefficients."""
    landmarks: np.ndarray
    coefficients: np.ndarray
    kernel: KernelSpec

    def __post_init__(self):
        if self.landmarks.ndim != 2 or self.landmarks.shape[0] != self.coefficients.shape[0]:
            raise ArgumentError(
                f"{self.landmarks.shape[0]} landmarks need as many coefficients, got {self.coefficients.shape[0]}"
            )

    @property
    def dim(self) -> int:
        return self.landmarks.shape[1]

    def __call__(self, X) -> np.ndarray:
        X = as_table(X, "X")
        if X.shape[1] != self.dim:
            raise DimensionMismatchError(f"direction lives in dimension {self.dim}, data has {X.shape[1]}")
        return self.coefficients @ gram(self.kernel, self.landmarks, X)

    def rkhs_norm(self) -> float:
        K = gram(self.kernel, self.landmarks, self.landmarks)
        return float(np.sqrt(max(self.coefficients @ K @ self.coefficients, 0.0)))

    def inner(self, other: "Direction") -> float:
        """<self, other>_H via the reproducing property."""
        K = gram(self.kernel, self.landmarks, other.landmarks)
        return float(self.coefficients @ K @ other.coefficients)

    @classmethod
    def from_unit_vector(cls, u, kernel: Optional[KernelSpec] = None) -> "Direction":
        """The linear functional x -> <u, x>; unit norm for the linear kernel when |u| = 1."""
        u = np.asarray(u, dtype=float).ravel()
        return cls(landmarks=u[None, :], coefficients=np.ones(1), kernel=kernel or KernelSpec(family=KernelFamily.LINEAR))


@dataclass(frozen=True)
class ReferenceMeasure:
    """Reference measure xi that landmarks are drawn from."""
    mode: ReferenceMode
    points: np.ndarray

    @classmethod
    def pooled(cls, X, Y) -> "ReferenceMeasure":
        """xi = 1/2 P_n + 1/2 Q_n."""
        X = as_table(X, "X")
        Y = as_table(Y, "Y")
        return cls(ReferenceMode.POOLED, np.vstack([X, Y]))

    @classmethod
    def user(cls, points) -> "ReferenceMeasure":
        return cls(ReferenceMode.USER, as_table(points, "reference"))

    @classmethod
    def from_mode(cls, mode: ReferenceMode, X, Y) -> "ReferenceMeasure":
        pooled = np.vstack([as_table(X, "X"), as_table(Y, "Y")])
        if mode == ReferenceMode.USER:
            raise ArgumentError("user-supplied reference measures are built with ReferenceMeasure.user(points)")
        return cls(mode, pooled)

    def draw(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """m landmarks z_1..z_m ~ xi."""
        if self.points.shape[0] == 0:
            raise ArgumentError("reference measure has no points")
        if self.mode in (ReferenceMode.POOLED, ReferenceMode.USER):
            return self.points[rng.integers(0, self.points.shape[0], size=m)]

        center = np.median(self.points, axis=0)
        iqr = stats.iqr(self.points, axis=0)
        if self.mode == ReferenceMode.GAUSSIAN_IQR:
            return center + rng.standard_normal((m, self.points.shape[1])) * (iqr / _NORMAL_IQR)
        return center + rng.uniform(-1.0, 1.0, size=(m, self.points.shape[1])) * iqr


def draw_gaussian_element(kernel: KernelSpec, landmarks: np.ndarray, rng: np.random.Generator) -> Direction:
    """f = m^{-1/2} sum_j lambda_j k(z_j, .) with lambda ~ N(0, I_m): one draw of the Gaussian measure."""
    m = landmarks.shape[0]
    lam = rng.standard_normal(m)
    return Direction(landmarks=landmarks, coefficients=lam / np.sqrt(m), kernel=kernel)


def _normalised(kernel: KernelSpec, landmarks: np.ndarray, K: np.ndarray, rng: np.random.Generator,
                max_attempts: int) -> Direction:
    m = landmarks.shape[0]
    floor = np.finfo(float).eps * max(float(np.trace(K)), 1.0)
    for attempt in range(1, max_attempts + 1):
        lam = rng.standard_normal(m)
        norm_sq = float(lam @ K @ lam) / m
        if np.isfinite(norm_sq) and norm_sq > floor * float(lam @ lam) / m:
            return Direction(landmarks=landmarks, coefficients=lam / (np.sqrt(m) * np.sqrt(norm_sq)), kernel=kernel)
        logger.warning(f"Degenerate Gaussian draw (|f|^2 = {norm_sq:.3g}), resampling ({attempt}/{max_attempts})")
    raise DegenerateDataError(f"RKHS norm of sampled direction vanished after {max_attempts} attempts")


def sample_directions(
    kernel: KernelSpec,
    ref: ReferenceMeasure,
    m: int,
    l: int,
    rng: np.random.Generator,
    fresh_landmarks: bool = False,
    max_attempts: int = DIRECTION_RESAMPLE_ATTEMPTS,
) -> List[Direction]:
    """
    Draw l unit-norm directions u_i = f_i / |f_i|_H with f_i from the Gaussian measure.

    The m landmarks are shared by all directions unless fresh_landmarks is set.
    """
    if m < 1 or l < 1:
        raise ArgumentError(f"need m >= 1 and l >= 1, got m={m}, l={l}")

    landmarks = ref.draw(m, rng)
    K = gram(kernel, landmarks, landmarks)
    directions = []
    for i in range(l):
        if fresh_landmarks and i > 0:
            landmarks = ref.draw(m, rng)
            K = gram(kernel, landmarks, landmarks)
        directions.append(_normalised(kernel, landmarks, K, rng, max_attempts))
    return directions


def sphere_directions(d: int, l: int, rng: np.random.Generator) -> np.ndarray:
    """l directions uniform on S^{d-1}, as a d x l matrix (normalised Gaussian draws)."""
    if d < 1:
        raise ArgumentError(f"dimension must be at least 1, got {d}")
    projections = rng.standard_normal((d, l))
    return projections / np.sqrt(np.sum(projections ** 2, axis=0, keepdims=True))


def data_directions(points, l: int, rng: np.random.Generator) -> np.ndarray:
    """l directions drawn from the data and projected onto the sphere, as a d x l matrix."""
    points = as_table(points, "points")
    norms = np.linalg.norm(points, axis=1)
    candidates = points[norms > 0]
    if candidates.shape[0] == 0:
        raise DegenerateDataError("every data point is the origin; cannot derive directions")
    chosen = candidates[rng.integers(0, candidates.shape[0], size=l)]
    return (chosen / np.linalg.norm(chosen, axis=1, keepdims=True)).T
