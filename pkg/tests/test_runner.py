import numpy as np
import pytest

from kqe_bench.errors import ArgumentError
from kqe_bench.models import ExperimentName, KernelFamily, KernelSpec, RunConfig, StatisticName, StatisticSpec
from kqe_bench.services import kernels, runner, statistics
from kqe_bench.services.kernels import resolve_kernel
from kqe_bench.tools import tool_config


def bench_config(**kwargs) -> RunConfig:
    defaults = dict(command="benchmark", trials=1, n_perms=20, seed=4)
    return RunConfig(**{**defaults, **kwargs})


def test_failed_cell_is_recorded():
    rng = np.random.default_rng(0)
    tables = [rng.standard_normal((10, 2)), rng.standard_normal((10, 2)) + 2.0]
    cfg = bench_config(experiment=ExperimentName.CUSTOM_CSV, methods=[StatisticName.MMD_U], sweep=[5, 20])
    result = runner.run_benchmark(cfg, tables)
    (report,) = result.reports
    ok, failed = report.points
    assert ok.rejection_rate is not None and ok.error is None
    assert failed.rejection_rate is None
    assert "trial 0 failed" in failed.error
    assert np.isnan(result.timings[1]["wall_time_median"])
    assert "fail" in runner.summary_table(result.reports)


def test_default_methods_and_grid():
    cfg = bench_config(experiment=ExperimentName.TYPE1_GAUSSIAN, sweep=[8], dim=2)
    assert runner._methods(cfg) == list(StatisticName)
    cfg = bench_config(experiment=ExperimentName.POWER_DECAY)
    assert runner._methods(cfg) == runner.DEFAULT_BENCHMARK_METHODS
    name, sweep, _ = runner.experiment_grid(cfg)
    assert name == "d" and sweep == [32.0, 64.0, 128.0, 256.0, 512.0]


def test_grid_errors():
    with pytest.raises(ArgumentError):
        runner.experiment_grid(bench_config(experiment=ExperimentName.CUSTOM_CSV, sweep=[5]))
    with pytest.raises(ArgumentError):
        runner.experiment_grid(bench_config(experiment=ExperimentName.LAPLACE_GAUSSIAN, sweep=[2.5]))[2](2.5)(0)
    with pytest.raises(ArgumentError):
        runner.run_benchmark(bench_config())


def test_report_order_does_not_depend_on_workers():
    cfg = bench_config(experiment=ExperimentName.LAPLACE_GAUSSIAN, sweep=[10, 20],
                       methods=[StatisticName.EKQD, StatisticName.MMD_LIN], trials=2)
    serial = runner.run_benchmark(cfg, timing=False)
    threaded = runner.run_benchmark(cfg.model_copy(update={"workers": 4}), timing=False)
    assert serial.reports == threaded.reports
    assert [r.method for r in serial.reports] == ["ekqd", "mmd-lin"]
    assert serial.timings == []


def test_summary_table_layout():
    cfg = bench_config(experiment=ExperimentName.TYPE1_GAUSSIAN, sweep=[10], dim=2,
                       methods=[StatisticName.SW, StatisticName.MMD_V])
    table = runner.summary_table(runner.run_benchmark(cfg, timing=False).reports).splitlines()
    assert len(table) == 3
    assert table[0].split()[-1] == "10"
    assert table[1].split()[0] == "sw"
    assert runner.summary_table([]) == ""


def test_write_benchmark_paths(tmp_path):
    cfg = bench_config(experiment=ExperimentName.TYPE1_GAUSSIAN, sweep=[10], dim=2,
                       methods=[StatisticName.MMD_U], out=str(tmp_path / "t.csv"))
    paths = runner.write_benchmark(cfg, runner.run_benchmark(cfg))
    assert paths == [tmp_path / "t.csv", tmp_path / "t.timing.csv"]


def test_default_output_uses_results_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("KQE_RESULTS_DIR", str(tmp_path))
    cfg = bench_config(experiment=ExperimentName.POWER_DECAY)
    assert runner.default_output(cfg) == tmp_path / "power-decay.csv"


def test_run_discrepancy_requires_statistic():
    X = np.zeros((4, 1))
    with pytest.raises(ArgumentError):
        runner.run_discrepancy(RunConfig(command="discrepancy"), X, X)


def test_tool_config_aliases():
    cfg = tool_config("discrepancy", "mmd-u", kernel="poly", degree=2, bandwidth="0.5")
    assert cfg.kernel.family == KernelFamily.POLYNOMIAL
    assert cfg.kernel.degree == 2
    spec = tool_config("discrepancy", "ekqd", bandwidth="0.5").statistic_spec(StatisticName.EKQD)
    assert spec.kernel.bandwidth == 0.5


def _grid_with_sampler(sampler):
    """Two-point sweep whose second point draws data with `sampler`."""
    def null_pair(rng):
        return rng.standard_normal((10, 1)), rng.standard_normal((10, 1))

    def grid(cfg, tables=()):
        return "n", [10.0, 20.0], lambda value: sampler if value == 20.0 else null_pair
    return grid


@pytest.mark.parametrize("error", [ValueError("bad draw"), FloatingPointError("overflow"),
                                   np.linalg.LinAlgError("singular")])
def test_non_kqe_failures_stay_in_their_cell(monkeypatch, error):
    def failing(rng):
        raise error

    monkeypatch.setattr(runner, "experiment_grid", _grid_with_sampler(failing))
    cfg = bench_config(experiment=ExperimentName.LAPLACE_GAUSSIAN, methods=[StatisticName.MMD_V])
    result = runner.run_benchmark(cfg)
    ok, failed = result.reports[0].points
    assert ok.rejection_rate is not None
    assert failed.rejection_rate is None
    assert failed.error == f"trial 0 failed: {error}"
    assert np.isnan(result.timings[1]["wall_time_median"])
    assert not np.isnan(result.timings[0]["wall_time_median"])


def test_reported_bandwidth_matches_the_statistic(monkeypatch):
    monkeypatch.setattr(kernels, "MEDIAN_MAX_POINTS", 64)
    monkeypatch.setattr(statistics, "MEDIAN_MAX_POINTS", 64)
    monkeypatch.setattr(runner, "MEDIAN_MAX_POINTS", 64)
    rng = np.random.default_rng(8)
    X = rng.standard_normal((100, 2))
    Y = rng.standard_normal((100, 2)) + 0.5
    sigma = runner.estimate_bandwidth(X, Y)
    assert resolve_kernel(KernelSpec(), X, Y).bandwidth == sigma
    assert statistics.compute_statistic(StatisticSpec(name=StatisticName.EKQD), X, Y).bandwidth == sigma
    assert statistics.compute_statistic(StatisticSpec(name=StatisticName.EKQD), Y, X).bandwidth == sigma
