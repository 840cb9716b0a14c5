import itertools
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from kqe_bench.errors import ArgumentError, DimensionMismatchError, UnsupportedConfigurationError
from kqe_bench.models import KernelFamily, KqdConfig, QuantileShape, QuantileWeighting, SlicedMode, SlicingSource
from kqe_bench.services import discrepancies as disc
from kqe_bench.services.directions import Direction, ReferenceMeasure, sample_directions
from kqe_bench.services.kernels import gram


def naive_kernel(kernel, a, b):
    if kernel.family == KernelFamily.RBF:
        return math.exp(-sum((ai - bi) ** 2 for ai, bi in zip(a, b)) / (2 * kernel.bandwidth ** 2))
    if kernel.family == KernelFamily.LAPLACIAN:
        return math.exp(-sum(abs(ai - bi) for ai, bi in zip(a, b)) / kernel.bandwidth)
    dot = sum(ai * bi for ai, bi in zip(a, b))
    if kernel.family == KernelFamily.LINEAR:
        return dot
    return (dot + kernel.offset) ** kernel.degree


def naive_mmd2(kernel, X, Y, unbiased):
    n, m = len(X), len(Y)
    xx = sum(naive_kernel(kernel, X[i], X[j]) for i in range(n) for j in range(n) if not unbiased or i != j)
    yy = sum(naive_kernel(kernel, Y[i], Y[j]) for i in range(m) for j in range(m) if not unbiased or i != j)
    xy = sum(naive_kernel(kernel, X[i], Y[j]) for i in range(n) for j in range(m))
    if unbiased:
        return xx / (n * (n - 1)) + yy / (m * (m - 1)) - 2 * xy / (n * m)
    return xx / n ** 2 + yy / m ** 2 - 2 * xy / (n * m)


def h(kernel, X, Y, i, j):
    return (naive_kernel(kernel, X[i], X[j]) + naive_kernel(kernel, Y[i], Y[j])
            - naive_kernel(kernel, X[i], Y[j]) - naive_kernel(kernel, X[j], Y[i]))


def sampled(kernel, X, Y, l=5, m=4, seed=0):
    return sample_directions(kernel, ReferenceMeasure.pooled(X, Y), m=m, l=l, rng=np.random.default_rng(seed))


# Quantile discrepancies

def test_ekqd_hand_example():
    u = Direction.from_unit_vector([1.0])
    X = np.array([[1.0], [0.0]])
    Y = np.array([[5.0], [2.0]])
    cfg = KqdConfig(p=1)
    assert disc.ekqd_p(X, Y, u.kernel, cfg, [u]) == pytest.approx(3.0)
    assert disc.wasserstein_1d([0.0, 1.0], [2.0, 5.0], 1) == pytest.approx(3.0)


def test_supkqd_takes_largest_direction():
    directions = [Direction.from_unit_vector([1.0, 0.0]), Direction.from_unit_vector([0.0, 1.0])]
    X = np.array([[0.0, 0.0], [1.0, 0.0]])
    Y = np.array([[2.0, 4.0], [5.0, 6.0]])
    cfg = KqdConfig(p=1)
    kernel = directions[0].kernel
    np.testing.assert_allclose(disc.kqd_terms(X, Y, kernel, cfg, directions), [3.0, 5.0])
    assert disc.supkqd_p(X, Y, kernel, cfg, directions) == pytest.approx(5.0)
    assert disc.ekqd_p(X, Y, kernel, cfg, directions) == pytest.approx(4.0)


def test_single_direction_sup_equals_expected(rbf, gaussian_pair):
    X, Y = gaussian_pair
    directions = sampled(rbf, X, Y, l=1)
    cfg = KqdConfig()
    assert disc.supkqd_p(X, Y, rbf, cfg, directions) == disc.ekqd_p(X, Y, rbf, cfg, directions)


def test_identity_and_symmetry(rbf, gaussian_pair):
    X, Y = gaussian_pair
    directions = sampled(rbf, X, Y)
    for shape in QuantileShape:
        if shape == QuantileShape.CUSTOM_TABLE:
            continue
        cfg = KqdConfig(weighting=QuantileWeighting(shape=shape))
        assert disc.ekqd_p(X, X, rbf, cfg, directions) == 0.0
        assert disc.supkqd_p(X, X, rbf, cfg, directions) == 0.0
        assert disc.ekqd_p(X, Y, rbf, cfg, directions) == disc.ekqd_p(Y, X, rbf, cfg, directions)
        assert disc.supkqd_p(X, Y, rbf, cfg, directions) == disc.supkqd_p(Y, X, rbf, cfg, directions)
    assert disc.ekqd2_centered(X, X, rbf, KqdConfig(), directions) == 0.0
    assert disc.supkqd2_centered(X, X, rbf, KqdConfig(), directions) == 0.0


def test_raw_power_and_root(rbf, gaussian_pair):
    X, Y = gaussian_pair
    directions = sampled(rbf, X, Y)
    cfg = KqdConfig(p=3)
    power = disc.ekqd_p_power(X, Y, rbf, cfg, directions)
    assert disc.ekqd_p(X, Y, rbf, cfg, directions) == pytest.approx(power ** (1 / 3))


def test_weightings_reweight_levels():
    u = Direction.from_unit_vector([1.0])
    X = np.arange(10.0)[:, None]
    Y = X.copy()
    Y[-1] += 10.0
    uniform = disc.ekqd_p(X, Y, u.kernel, KqdConfig(p=1), [u])
    extremes = disc.ekqd_p(X, Y, u.kernel, KqdConfig(p=1, weighting=QuantileWeighting(shape=QuantileShape.REVERSE_TRIANGLE)), [u])
    middle = disc.ekqd_p(X, Y, u.kernel, KqdConfig(p=1, weighting=QuantileWeighting(shape=QuantileShape.TRIANGLE)), [u])
    # only the largest order statistic differs; f(1) is 2 for reverse-triangle and 0 for triangle
    assert uniform == pytest.approx(1.0)
    assert extremes == pytest.approx(2.0)
    assert middle == 0.0


def test_custom_table_weighting_integrates_to_one():
    w = QuantileWeighting(shape=QuantileShape.CUSTOM_TABLE, table=(0.0, 1.0, 3.0))
    grid = np.linspace(0, 1, 2001)
    assert trapezoid(w.density(grid), grid) == pytest.approx(1.0, abs=1e-6)
    for shape in (QuantileShape.UNIFORM, QuantileShape.TRIANGLE, QuantileShape.REVERSE_TRIANGLE):
        assert trapezoid(QuantileWeighting(shape=shape).density(grid), grid) == pytest.approx(1.0, abs=1e-6)


def test_quantile_errors(rbf, gaussian_pair):
    X, Y = gaussian_pair
    directions = sampled(rbf, X, Y)
    with pytest.raises(DimensionMismatchError):
        disc.ekqd_p(X, Y[:-1], rbf, KqdConfig(), directions)
    with pytest.raises(UnsupportedConfigurationError):
        disc.ekqd2_centered(X, Y, rbf, KqdConfig(p=1), directions)
    with pytest.raises(UnsupportedConfigurationError):
        disc.supkqd2_centered(X, Y, rbf, KqdConfig(p=3), directions)
    with pytest.raises(ArgumentError):
        disc.ekqd_p(X, Y, rbf.with_bandwidth(2.0), KqdConfig(), directions)
    with pytest.raises(ArgumentError):
        disc.ekqd_p(X, Y, rbf, KqdConfig(), [])


def test_centered_detects_translation(linear):
    u = Direction.from_unit_vector([1.0])
    X = np.arange(4.0)[:, None]
    Y = X + 1.0
    # e-KQD_2^2 = 1, mean difference^2 = 1 and the linear-kernel U-statistic is 1/6
    assert disc.ekqd2_centered_squared(X, Y, linear, KqdConfig(), [u]) == pytest.approx(1.0 / 6.0)
    assert disc.ekqd2_centered(X, Y, linear, KqdConfig(), [u]) == pytest.approx(math.sqrt(1.0 / 6.0))
    assert disc.supkqd2_centered(X, Y, linear, KqdConfig(), [u]) == pytest.approx(math.sqrt(1.0 / 6.0))


def test_triangle_inequality_with_fixed_directions(rbf):
    rng = np.random.default_rng(3)
    pool = rng.standard_normal((60, 2))
    directions = sampled(rbf, pool, pool, l=4, m=5)
    cfg = KqdConfig()
    for _ in range(500):
        X, Y, Z = (rng.standard_normal((15, 2)) * rng.uniform(0.5, 2.0) for _ in range(3))
        lhs = disc.ekqd_p(X, Z, rbf, cfg, directions)
        rhs = disc.ekqd_p(X, Y, rbf, cfg, directions) + disc.ekqd_p(Y, Z, rbf, cfg, directions)
        assert lhs <= rhs + 1e-8


# MMD estimators

def test_mmd_matches_naive_double_sums(all_kernels):
    rng = np.random.default_rng(21)
    for kernel in all_kernels:
        for n, m in [(2, 2), (7, 5), (20, 20)]:
            X = rng.standard_normal((n, 2))
            Y = rng.standard_normal((m, 2)) + 0.3
            assert disc.mmd2_u(X, Y, kernel) == pytest.approx(naive_mmd2(kernel, X, Y, True), abs=1e-10)
            assert disc.mmd2_v(X, Y, kernel) == pytest.approx(naive_mmd2(kernel, X, Y, False), abs=1e-10)


def test_mmd_u_two_points(rbf):
    a, b, c, d = (np.array([v]) for v in (0.0, 0.5, 2.0, 2.2))
    k = lambda s, t: naive_kernel(rbf, s, t)
    expected = k(a, b) + k(c, d) - (k(a, c) + k(a, d) + k(b, c) + k(b, d)) / 2
    assert disc.mmd2_u(np.vstack([a, b]), np.vstack([c, d]), rbf) == pytest.approx(expected, abs=1e-14)


def test_mmd_identity(rbf, gaussian_pair):
    X, _ = gaussian_pair
    assert abs(disc.mmd2_v(X, X, rbf)) < 1e-12
    assert disc.mmd2_u(X, X, rbf) <= disc.mmd2_v(X, X, rbf)
    assert disc.mmd2_linear(X, X, rbf) == 0.0
    assert abs(disc.mmd2_multi(X, X, rbf)) < 1e-12
    with pytest.raises(ArgumentError):
        disc.mmd2_u(X[:1], X[:1], rbf)


def test_mmd_gram_forms_match_direct(rbf, gaussian_pair):
    X, Y = gaussian_pair
    Z = np.vstack([X, Y])
    K = gram(rbf, Z, Z)
    a = disc.split_indicator(Z.shape[0], np.arange(X.shape[0]))
    assert disc.mmd2_from_gram(K, a) == pytest.approx(disc.mmd2_u(X, Y, rbf), abs=1e-12)
    assert disc.mmd2_from_gram(K, a, unbiased=False) == pytest.approx(disc.mmd2_v(X, Y, rbf), abs=1e-12)
    batch = disc.mmd2_from_gram(K, np.column_stack([a, 1.0 - a]))
    np.testing.assert_allclose(batch, [disc.mmd2_u(X, Y, rbf), disc.mmd2_u(Y, X, rbf)], atol=1e-12)


def test_mmd_linear(rbf):
    rng = np.random.default_rng(4)
    X = rng.standard_normal((5, 2))
    Y = rng.standard_normal((5, 2))
    assert disc.mmd2_linear(X[:2], Y[:2], rbf) == pytest.approx(h(rbf, X, Y, 0, 1), abs=1e-14)
    # the fifth point has no partner
    assert disc.mmd2_linear(X, Y, rbf) == disc.mmd2_linear(X[:4], Y[:4], rbf)
    assert disc.mmd2_linear(X[:4], Y[:4], rbf) == pytest.approx((h(rbf, X, Y, 0, 1) + h(rbf, X, Y, 2, 3)) / 2, abs=1e-14)
    with pytest.raises(ArgumentError):
        disc.mmd2_linear(X[:1], Y[:1], rbf)
    with pytest.raises(DimensionMismatchError):
        disc.mmd2_linear(X, Y[:4], rbf)


def test_mmd_multi_all_subdiagonals_is_complete_u_statistic(all_kernels):
    rng = np.random.default_rng(8)
    for kernel in all_kernels:
        for n in (3, 8, 12):
            X = rng.standard_normal((n, 2))
            Y = rng.standard_normal((n, 2)) * 1.5
            brute = 2.0 / (n * (n - 1)) * sum(h(kernel, X, Y, i, j) for i in range(n) for j in range(i + 1, n))
            assert disc.mmd2_multi(X, Y, kernel, r=n - 1) == pytest.approx(brute, abs=1e-10)


def test_mmd_multi_first_subdiagonal(rbf):
    rng = np.random.default_rng(9)
    X = rng.standard_normal((3, 1))
    Y = rng.standard_normal((3, 1))
    expected = 2.0 / 4.0 * (h(rbf, X, Y, 0, 1) + h(rbf, X, Y, 1, 2))
    assert disc.mmd2_multi(X, Y, rbf, r=1) == pytest.approx(expected, abs=1e-14)
    with pytest.raises(ArgumentError):
        disc.mmd2_multi(X, Y, rbf, r=3)
    with pytest.raises(ArgumentError):
        disc.mmd2_multi(X, Y, rbf, r=0)


# Wasserstein distances

def test_wasserstein_matches_optimal_assignment():
    rng = np.random.default_rng(10)
    for _ in range(100):
        n = int(rng.integers(1, 8))
        p = int(rng.integers(1, 4))
        x = rng.standard_normal(n)
        y = rng.standard_normal(n) * 2.0
        perms = np.array(list(itertools.permutations(range(n))))
        best = np.min(np.mean(np.abs(x[None, :] - y[perms]) ** p, axis=1)) ** (1.0 / p)
        assert disc.wasserstein_1d(x, y, p) == pytest.approx(best, abs=1e-10)


def test_wasserstein_affine_scaling(rng):
    x = rng.standard_normal(30)
    y = rng.standard_normal(30) + 1.0
    for p in (1, 2, 3):
        base = disc.wasserstein_1d(x, y, p)
        assert disc.wasserstein_1d(2.5 * x - 4.0, 2.5 * y - 4.0, p) == pytest.approx(2.5 * base, rel=1e-12)
    assert disc.wasserstein_1d(x, x, 2) == 0.0
    with pytest.raises(DimensionMismatchError):
        disc.wasserstein_1d(x, y[:-1], 1)


def test_sliced_wasserstein_in_one_dimension(rng):
    X = rng.standard_normal((25, 1))
    Y = rng.standard_normal((25, 1)) * 3.0
    for p in (1, 2):
        sw = disc.sliced_wasserstein(X, Y, l=7, p=p, rng=rng)
        assert sw == pytest.approx(disc.wasserstein_1d(X[:, 0], Y[:, 0], p), rel=1e-12)


def test_sliced_wasserstein_modes(rng):
    X = rng.standard_normal((30, 3))
    Y = rng.standard_normal((30, 3)) + np.array([2.0, 0.0, 0.0])
    P = rng.standard_normal((3, 6))
    P /= np.linalg.norm(P, axis=0)
    expected = disc.sliced_wasserstein(X, Y, l=6, p=2, rng=rng, projections=P)
    largest = disc.sliced_wasserstein(X, Y, l=6, p=2, rng=rng, mode=SlicedMode.MAX, projections=P)
    assert largest >= expected
    assert largest == pytest.approx(max(disc.wasserstein_1d(X @ P[:, i], Y @ P[:, i], 2) for i in range(6)))
    assert disc.sliced_wasserstein(X, X, l=6, p=2, rng=rng) == 0.0
    assert disc.sliced_wasserstein(X, Y, l=6, p=2, rng=0) == disc.sliced_wasserstein(Y, X, l=6, p=2, rng=0)
    assert disc.sliced_wasserstein(X, Y, l=4, p=1, rng=0, source=SlicingSource.DATA) > 0.0


@pytest.mark.parametrize("p", [1, 2])
@pytest.mark.parametrize("d", [2, 5])
def test_linear_ekqd_recovers_sliced_wasserstein(p, d, linear):
    rng = np.random.default_rng(100 + d + p)
    X = rng.standard_normal((50, d))
    Y = rng.standard_normal((50, d)) * 1.5 + 0.2
    P = rng.standard_normal((d, 8))
    P /= np.linalg.norm(P, axis=0)
    directions = [Direction.from_unit_vector(P[:, i], linear) for i in range(8)]
    ekqd = disc.ekqd_p(X, Y, linear, KqdConfig(p=p), directions)
    sw = disc.sliced_wasserstein(X, Y, l=8, p=p, rng=rng, projections=P)
    assert ekqd == pytest.approx(sw, abs=1e-10)


def gaussian_rbf_mmd2(shift: float, scale: float, bandwidth: float, d: int) -> float:
    """MMD^2 between N(0, scale^2 I) and N(shift e_1, scale^2 I) under an RBF kernel."""
    s2 = bandwidth ** 2 + 2.0 * scale ** 2
    c = (bandwidth ** 2 / s2) ** (d / 2)
    return 2.0 * c * (1.0 - math.exp(-shift ** 2 / (2.0 * s2)))


@pytest.mark.slow
@pytest.mark.parametrize("shift", [0.0, 1.0])
def test_mmd_estimators_are_unbiased(rbf, shift):
    rng = np.random.default_rng(42)
    d, n, reps = 1, 40, 400
    truth = gaussian_rbf_mmd2(shift, 1.0, rbf.bandwidth, d)
    estimates = {"u": [], "lin": [], "multi": [], "v": []}
    for _ in range(reps):
        X = rng.standard_normal((n, d))
        Y = rng.standard_normal((n, d)) + shift
        estimates["u"].append(disc.mmd2_u(X, Y, rbf))
        estimates["lin"].append(disc.mmd2_linear(X, Y, rbf))
        estimates["multi"].append(disc.mmd2_multi(X, Y, rbf))
        estimates["v"].append(disc.mmd2_v(X, Y, rbf))

    for name in ("u", "lin", "multi"):
        values = np.asarray(estimates[name])
        stderr = values.std(ddof=1) / math.sqrt(reps)
        assert abs(values.mean() - truth) <= 4.0 * stderr + 1e-12, name
    # the V-statistic keeps the i = j terms and is biased upwards
    assert np.mean(estimates["v"]) > np.mean(estimates["u"])


def test_mmd_estimators_are_exactly_symmetric(rng, all_kernels):
    X = rng.standard_normal((24, 3))
    Y = rng.standard_normal((24, 3)) + 0.3
    Z = rng.standard_normal((17, 3))
    for k in all_kernels:
        assert disc.mmd2_u(X, Y, k) == disc.mmd2_u(Y, X, k)
        assert disc.mmd2_v(X, Y, k) == disc.mmd2_v(Y, X, k)
        assert disc.mmd2_u(X, Z, k) == disc.mmd2_u(Z, X, k)
        assert disc.mmd2_linear(X, Y, k) == disc.mmd2_linear(Y, X, k)
        assert disc.mmd2_multi(X, Y, k, r=5) == disc.mmd2_multi(Y, X, k, r=5)

        K = gram(k, np.vstack([X, Y]), np.vstack([X, Y]))
        a = disc.split_indicator(48, np.arange(24))
        assert disc.mmd2_from_gram(K, a) == disc.mmd2_from_gram(K, 1.0 - a)
        assert disc.mmd2_from_gram(K, a, unbiased=False) == disc.mmd2_from_gram(K, 1.0 - a, unbiased=False)
