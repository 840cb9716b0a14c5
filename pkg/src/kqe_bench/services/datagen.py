"""Synthetic samplers and row-sampling from user tables."""
import math
from typing import Tuple

import numpy as np

from ..errors import ArgumentError
from ..models import GeneratorFamily, GeneratorSpec
from ..utils import SeedLike, as_generator, as_table

# Laplace scale with unit variance (Var = 2 b^2)
UNIT_VARIANCE_LAPLACE_SCALE = 1.0 / math.sqrt(2.0)

Pair = Tuple[np.ndarray, np.ndarray]


def laplace_inverse_cdf(u, b: float = 1.0) -> np.ndarray:
    """F^{-1}(u) = -b sign(u - 1/2) ln(1 - 2|u - 1/2|) for a zero-centred Laplace(b)."""
    if b <= 0:
        raise ArgumentError(f"Laplace scale must be positive, got {b}")
    c = np.asarray(u, dtype=float) - 0.5
    return -b * np.sign(c) * np.log1p(-2.0 * np.abs(c))


def sample(spec: GeneratorSpec, n: int, rng: SeedLike) -> np.ndarray:
    """Draw n points from the generator as an n x d table."""
    if n < 1:
        raise ArgumentError(f"sample size must be at least 1, got {n}")
    rng = as_generator(rng)
    d = spec.d
    mean = np.asarray(spec.mean, dtype=float) if spec.mean is not None else np.zeros(d)

    if spec.family == GeneratorFamily.GAUSSIAN_ISO:
        return mean + spec.scale * rng.standard_normal((n, d))
    if spec.family == GeneratorFamily.GAUSSIAN_DIAG:
        variances = np.asarray(spec.variances, dtype=float) if spec.variances is not None else np.ones(d)
        return mean + np.sqrt(variances) * rng.standard_normal((n, d))
    if spec.family == GeneratorFamily.LAPLACE:
        # keep u strictly inside (0, 1) so the log stays finite
        u = np.clip(rng.random((n, d)), np.finfo(float).eps, 1.0 - np.finfo(float).eps)
        return mean + laplace_inverse_cdf(u, spec.scale)

    points = spec.points
    if n > points.shape[0]:
        raise ArgumentError(f"cannot draw {n} rows without replacement from a table of {points.shape[0]}")
    return points[rng.choice(points.shape[0], size=n, replace=False)]


def sample_pair(gen_p: GeneratorSpec, gen_q: GeneratorSpec, n: int, rng: SeedLike) -> Pair:
    """X ~ P^n and Y ~ Q^n from independent child streams."""
    rx, ry = as_generator(rng).spawn(2)
    return sample(gen_p, n, rx), sample(gen_q, n, ry)


def power_decay_specs(d: int) -> Tuple[GeneratorSpec, GeneratorSpec]:
    if d < 3:
        raise ArgumentError(f"power-decay needs d >= 3, got {d}")
    return (
        GeneratorSpec(family=GeneratorFamily.GAUSSIAN_ISO, d=d),
        GeneratorSpec(family=GeneratorFamily.GAUSSIAN_DIAG, d=d, variances=[4.0] * 3 + [1.0] * (d - 3)),
    )


def gen_power_decay(d: int, n: int, rng: SeedLike) -> Pair:
    """X ~ N(0, I_d), Y ~ N(0, diag(4, 4, 4, 1, ..., 1))."""
    gen_p, gen_q = power_decay_specs(d)
    return sample_pair(gen_p, gen_q, n, rng)


def laplace_gaussian_specs() -> Tuple[GeneratorSpec, GeneratorSpec]:
    return (
        GeneratorSpec(family=GeneratorFamily.GAUSSIAN_ISO, d=1),
        GeneratorSpec(family=GeneratorFamily.LAPLACE, d=1, scale=UNIT_VARIANCE_LAPLACE_SCALE),
    )


def gen_laplace_vs_gaussian(n: int, rng: SeedLike) -> Pair:
    """X ~ N(0, 1), Y ~ Laplace(0, 1/sqrt(2)): same mean and variance, different tails."""
    gen_p, gen_q = laplace_gaussian_specs()
    return sample_pair(gen_p, gen_q, n, rng)


def gen_null_gaussian(d: int, n: int, rng: SeedLike) -> Pair:
    """X, Y ~ N(0, I_d) independently."""
    gen = GeneratorSpec(family=GeneratorFamily.GAUSSIAN_ISO, d=d)
    return sample_pair(gen, gen, n, rng)


def split_table(points, n: int, rng: SeedLike) -> Pair:
    """Two disjoint sets of n rows drawn without replacement from one table."""
    points = as_table(points, "points")
    if 2 * n > points.shape[0]:
        raise ArgumentError(f"need {2 * n} rows to split into two samples of {n}, table has {points.shape[0]}")
    rows = as_generator(rng).choice(points.shape[0], size=2 * n, replace=False)
    return points[rows[:n]], points[rows[n:]]


def table_pair(points_x, points_y, n: int, rng: SeedLike) -> Pair:
    """n rows without replacement from each of two tables."""
    points_x = as_table(points_x, "X")
    points_y = as_table(points_y, "Y")
    gen_p = GeneratorSpec(family=GeneratorFamily.CUSTOM, d=points_x.shape[1], points=points_x)
    gen_q = GeneratorSpec(family=GeneratorFamily.CUSTOM, d=points_y.shape[1], points=points_y)
    return sample_pair(gen_p, gen_q, n, rng)
