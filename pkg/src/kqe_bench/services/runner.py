"""
Command logic shared by the CLI and the tool server: single evaluations, tests and
rejection-rate experiments over a sweep.
"""
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import (
    LAPLACE_SAMPLE_SIZES,
    MEDIAN_MAX_POINTS,
    POWER_DECAY_DIMS,
    POWER_DECAY_N,
    TIMING_REPEATS,
    TYPE1_DIM,
    TYPE1_SAMPLE_SIZES,
    logger,
    results_dir,
)
from ..errors import ArgumentError
from ..models import (
    ExperimentName,
    ExperimentReport,
    RunConfig,
    StatisticName,
    SweepPoint,
    TestResult,
)
from ..utils import median_wall_time, substream
from .datagen import gen_laplace_vs_gaussian, gen_null_gaussian, gen_power_decay, split_table, table_pair
from .dataset_io import timing_path, write_report, write_timing
from .kernels import median_heuristic
from .statistics import compute_statistic
from .testing import CELL_ERRORS, TrialSampler, permutation_test, run_trials

DEFAULT_BENCHMARK_METHODS = [
    StatisticName.EKQD,
    StatisticName.MMD_U,
    StatisticName.MMD_MULTI,
    StatisticName.MMD_LIN,
]


@dataclass
class BenchmarkResult:
    reports: List[ExperimentReport]
    timings: List[Dict] = field(default_factory=list)


def run_discrepancy(cfg: RunConfig, X, Y, reference_points: Optional[np.ndarray] = None) -> Dict:
    """Evaluate cfg.statistic once; value plus bandwidth/direction metadata and timing."""
    if cfg.statistic is None:
        raise ArgumentError("no statistic selected")
    spec = cfg.statistic_spec(cfg.statistic)
    start = time.perf_counter()
    evaluation = compute_statistic(spec, X, Y, cfg.seed, reference_points)
    elapsed = time.perf_counter() - start
    logger.info(f"{cfg.statistic.value} = {evaluation.value:.6g} in {elapsed:.3f}s")
    return {**evaluation.to_dict(), "kernel": spec.kernel.describe(), "seed": cfg.seed, "wall_time": elapsed}


def run_test(cfg: RunConfig, X, Y, reference_points: Optional[np.ndarray] = None) -> TestResult:
    """Permutation test with the configured statistic."""
    if cfg.statistic is None:
        raise ArgumentError("no statistic selected")
    spec = cfg.statistic_spec(cfg.statistic)
    result = permutation_test(X, Y, spec, cfg.n_perms, cfg.level, cfg.seed, reference_points)
    logger.info(
        f"{cfg.statistic.value}: statistic={result.statistic:.6g} threshold={result.threshold:.6g} "
        f"p={result.p_value:.4g} reject={result.reject} ({result.wall_time:.3f}s)"
    )
    return result


def estimate_bandwidth(X, Y, include_diagonal: bool = False) -> float:
    """Median-heuristic bandwidth as the statistics resolve it (same subsampling cap)."""
    return median_heuristic(X, Y, include_diagonal=include_diagonal, max_points=MEDIAN_MAX_POINTS)


def _sample_size(value: float) -> int:
    if value < 1 or not float(value).is_integer():
        raise ArgumentError(f"sample sizes must be positive integers, got {value}")
    return int(value)


def experiment_grid(
    cfg: RunConfig,
    tables: Sequence[np.ndarray] = (),
) -> Tuple[str, List[float], Callable[[float], TrialSampler]]:
    """(parameter name, sweep values, sweep value -> trial sampler) for cfg.experiment."""
    experiment = cfg.experiment
    sweep = list(cfg.sweep)

    if experiment == ExperimentName.POWER_DECAY:
        n = cfg.n or POWER_DECAY_N
        for d in sweep or POWER_DECAY_DIMS:
            _sample_size(d)
        return "d", sweep or [float(d) for d in POWER_DECAY_DIMS], \
            lambda d: (lambda r: gen_power_decay(int(d), n, r))

    if experiment == ExperimentName.LAPLACE_GAUSSIAN:
        return "n", sweep or [float(n) for n in LAPLACE_SAMPLE_SIZES], \
            lambda n: (lambda r: gen_laplace_vs_gaussian(_sample_size(n), r))

    if experiment == ExperimentName.TYPE1_GAUSSIAN:
        d = cfg.dim or TYPE1_DIM
        return "n", sweep or [float(n) for n in TYPE1_SAMPLE_SIZES], \
            lambda n: (lambda r: gen_null_gaussian(d, _sample_size(n), r))

    if experiment == ExperimentName.CUSTOM_CSV:
        if len(tables) != 2:
            raise ArgumentError("custom-csv needs two datasets (--x and --y)")
        if not sweep:
            raise ArgumentError("custom-csv needs a --sweep of sample sizes")
        return "n", sweep, lambda n: (lambda r: table_pair(tables[0], tables[1], _sample_size(n), r))

    if experiment == ExperimentName.TYPE1_CSV:
        if len(tables) != 1:
            raise ArgumentError("type1 on user data needs exactly one dataset (--x)")
        sizes = sweep or [float(min(TYPE1_SAMPLE_SIZES[0], tables[0].shape[0] // 2))]
        return "n", sizes, lambda n: (lambda r: split_table(tables[0], _sample_size(n), r))

    raise ArgumentError(f"unknown experiment {experiment}")


def _methods(cfg: RunConfig) -> List[StatisticName]:
    if cfg.methods:
        return list(cfg.methods)
    if cfg.experiment in (ExperimentName.TYPE1_GAUSSIAN, ExperimentName.TYPE1_CSV):
        return list(StatisticName)
    return list(DEFAULT_BENCHMARK_METHODS)


def run_benchmark(cfg: RunConfig, tables: Sequence[np.ndarray] = (), timing: bool = True) -> BenchmarkResult:
    """
    Rejection rate for every (method, sweep value).

    Cells run on a thread pool of cfg.workers threads; each cell only depends on its
    (seed, sweep index, trial, method index) streams so results do not depend on scheduling.
    A failing cell is recorded with a missing rate and the run continues.
    """
    if cfg.experiment is None:
        raise ArgumentError("no experiment selected")
    param_name, sweep, sampler_for = experiment_grid(cfg, tables)
    methods = _methods(cfg)
    cells = [(si, mi) for si in range(len(sweep)) for mi in range(len(methods))]

    def run_cell(cell: Tuple[int, int]) -> SweepPoint:
        si, mi = cell
        method = methods[mi]
        try:
            rate = run_trials(
                sampler_for(sweep[si]),
                cfg.trials,
                cfg.statistic_spec(method),
                cfg.seed,
                keys=(si,),
                method_index=mi,
                n_perms=cfg.n_perms,
                level=cfg.level,
            )
        except CELL_ERRORS as e:
            logger.warning(f"{method.value} at {param_name}={sweep[si]:g} failed: {e}")
            return SweepPoint(param_value=sweep[si], rejection_rate=None, trials=cfg.trials, error=str(e))
        logger.info(f"{method.value} at {param_name}={sweep[si]:g}: rejection rate {rate:.3f}")
        return SweepPoint(param_value=sweep[si], rejection_rate=rate, trials=cfg.trials)

    logger.info(f"Running {cfg.experiment.value}: {len(methods)} methods x {len(sweep)} sweep values x {cfg.trials} trials")
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        points = list(pool.map(run_cell, cells))

    reports = []
    for mi, method in enumerate(methods):
        reports.append(ExperimentReport(
            experiment=cfg.experiment.value,
            method=method.value,
            param_name=param_name,
            points=[points[si * len(methods) + mi] for si in range(len(sweep))],
            trials=cfg.trials,
            seed=cfg.seed,
            config=cfg.echo(),
        ))

    timings = _time_methods(cfg, methods, param_name, sweep, sampler_for) if timing else []
    return BenchmarkResult(reports=reports, timings=timings)


def _time_methods(cfg: RunConfig, methods: List[StatisticName], param_name: str, sweep: List[float],
                  sampler_for: Callable[[float], TrialSampler]) -> List[Dict]:
    """Median single-evaluation wall time per (method, sweep value) on the first trial's data."""
    rows = []
    for si, value in enumerate(sweep):
        try:
            X, Y = sampler_for(value)(substream(cfg.seed, si, 0))
        except CELL_ERRORS as e:
            logger.warning(f"timing data for {param_name}={value:g} unavailable: {e}")
            X = Y = None
        for mi, method in enumerate(methods):
            spec = cfg.statistic_spec(method)
            wall = math.nan
            if X is not None:
                try:
                    wall = median_wall_time(
                        lambda: compute_statistic(spec, X, Y, substream(cfg.seed, si, 0, mi)),
                        TIMING_REPEATS,
                    )
                except CELL_ERRORS as e:
                    logger.warning(f"timing {method.value} at {param_name}={value:g} failed: {e}")
            rows.append({
                "method": method.value,
                "param_name": param_name,
                "param_value": value,
                "wall_time_median": wall,
                "repeats": TIMING_REPEATS,
            })
    return rows


def default_output(cfg: RunConfig) -> Path:
    name = cfg.experiment.value if cfg.experiment is not None else cfg.command
    return results_dir() / f"{name}.{cfg.format.value}"


def write_benchmark(cfg: RunConfig, result: BenchmarkResult) -> List[Path]:
    """Write the report (and the timing sidecar when there are timings)."""
    out = Path(cfg.out) if cfg.out else default_output(cfg)
    paths = [write_report(result.reports, cfg.format, out)]
    if result.timings:
        paths.append(write_timing(result.timings, timing_path(out)))
    return paths


def summary_table(reports: Sequence[ExperimentReport]) -> str:
    """Plain-text table: one row per method, one column per sweep value."""
    if not reports:
        return ""
    param_name = reports[0].param_name
    values = [p.param_value for p in reports[0].points]
    header = [f"method \\ {param_name}"] + [f"{v:g}" for v in values]
    rows = [header]
    for r in reports:
        rows.append([r.method] + ["fail" if p.rejection_rate is None else f"{p.rejection_rate:.3f}" for p in r.points])
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows)
