"""Monte-Carlo rejection rates and runtime scaling on the benchmark experiments."""
import math

import numpy as np
import pytest

from kqe_bench.models import ExperimentName, KernelFamily, KernelSpec, KqdConfig, RunConfig, StatisticName
from kqe_bench.services import discrepancies as disc
from kqe_bench.services import runner
from kqe_bench.services.directions import ReferenceMeasure, sample_directions
from kqe_bench.utils import median_wall_time

pytestmark = pytest.mark.slow


def rates(cfg: RunConfig):
    reports = runner.run_benchmark(cfg, timing=False).reports
    return {r.method: [p.rejection_rate for p in r.points] for r in reports}


def test_laplace_vs_gaussian_polynomial_kernel():
    cfg = RunConfig(
        command="benchmark",
        experiment=ExperimentName.LAPLACE_GAUSSIAN,
        methods=[StatisticName.EKQD, StatisticName.MMD_U],
        sweep=[100, 500, 2000],
        kernel=KernelSpec(family=KernelFamily.POLYNOMIAL, degree=3),
        trials=100,
        seed=11,
        workers=4,
    )
    result = rates(cfg)
    ekqd, mmd = result["ekqd"], result["mmd-u"]
    # a degree-3 polynomial kernel only sees the first three moments, which agree
    assert mmd[-1] <= 0.10
    assert ekqd[-1] >= mmd[-1] + 0.30
    assert all(b >= a - 0.1 for a, b in zip(ekqd, ekqd[1:]))


def test_power_decays_with_dimension():
    cfg = RunConfig(
        command="benchmark",
        experiment=ExperimentName.POWER_DECAY,
        methods=[StatisticName.EKQD, StatisticName.MMD_MULTI],
        sweep=[32, 128, 512],
        n=200,
        trials=100,
        seed=12,
        workers=4,
    )
    result = rates(cfg)
    for values in result.values():
        assert all(b <= a + 0.1 for a, b in zip(values, values[1:]))
    assert result["ekqd"][1] >= result["mmd-multi"][1]


def test_ekqd_scales_near_linearly_and_mmd_quadratically():
    rng = np.random.default_rng(0)
    kernel = KernelSpec(bandwidth=1.0)

    def ekqd_time(n):
        X = rng.standard_normal((n, 2))
        Y = rng.standard_normal((n, 2))
        cfg = KqdConfig()
        l, m = cfg.resolve_l(n), cfg.resolve_m(n)
        assert l == m == math.ceil(math.log(n))

        def evaluate():
            directions = sample_directions(kernel, ReferenceMeasure.pooled(X, Y), m, l, rng)
            return disc.ekqd_p(X, Y, kernel, cfg, directions)
        return median_wall_time(evaluate)

    def mmd_time(n):
        X = rng.standard_normal((n, 2))
        Y = rng.standard_normal((n, 2))
        return median_wall_time(lambda: disc.mmd2_u(X, Y, kernel))

    assert ekqd_time(16384) / ekqd_time(2048) <= 16
    assert mmd_time(16384) / mmd_time(2048) >= 32
