"""Command-line frontend: discrepancy, test, benchmark, type1 and serve."""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .config import DEFAULT_LEVEL, DEFAULT_LOG_BASE, DEFAULT_PERMUTATIONS, DEFAULT_TRIALS, logger, set_log_level
from .errors import ArgumentError, DatasetError, KqeError
from .models import (
    ExperimentName,
    KernelSpec,
    QuantileShape,
    ReferenceMode,
    ReportFormat,
    RunConfig,
    SlicingSource,
    StatisticName,
    parse_kernel_family,
)
from .services import runner
from .services.dataset_io import load_csv
from .utils import parse_number_list

BENCHMARK_EXPERIMENTS = [ExperimentName.POWER_DECAY, ExperimentName.LAPLACE_GAUSSIAN, ExperimentName.CUSTOM_CSV]
KERNEL_CHOICES = ["rbf", "laplacian", "linear", "poly", "polynomial"]
WEIGHTING_CHOICES = [s.value for s in QuantileShape if s != QuantileShape.CUSTOM_TABLE]
# Short names accepted by --reference
REFERENCE_CHOICES = {
    "pooled": ReferenceMode.POOLED,
    "user": ReferenceMode.USER,
    "gaussian-iqr": ReferenceMode.GAUSSIAN_IQR,
    "uniform-iqr": ReferenceMode.UNIFORM_IQR,
}


def _statistic_flags(parser: argparse.ArgumentParser, with_stat: bool = True) -> None:
    group = parser.add_argument_group("statistic")
    if with_stat:
        group.add_argument("--stat", default=StatisticName.EKQD.value, choices=[s.value for s in StatisticName],
                           help="statistic to compute (default: ekqd)")
    group.add_argument("--kernel", default="rbf", choices=KERNEL_CHOICES, help="kernel family (default: rbf)")
    group.add_argument("--bandwidth", default="median",
                       help="'median' for the median heuristic on the pooled sample, or a positive number")
    group.add_argument("--median-include-diagonal", action="store_true",
                       help="include the zero self-distances in the median heuristic")
    group.add_argument("--degree", type=int, default=3, help="polynomial kernel degree (default: 3)")
    group.add_argument("--offset", type=float, default=1.0, help="polynomial kernel offset c (default: 1)")
    group.add_argument("--p", type=int, default=2, help="power of the quantile / Wasserstein discrepancies (default: 2)")
    group.add_argument("--l", type=int, default=None, help="number of directions (default: ceil(log n))")
    group.add_argument("--m", type=int, default=None, help="number of landmarks per direction (default: ceil(log n))")
    group.add_argument("--r", type=int, default=None, help="MMD-Multi subdiagonals (default: ceil(log(n)^2))")
    group.add_argument("--log-base", type=float, default=DEFAULT_LOG_BASE,
                       help="logarithm base of the l, m and r defaults (default: e)")
    group.add_argument("--nu", default=QuantileShape.UNIFORM.value, choices=WEIGHTING_CHOICES,
                       help="weighting of quantile levels (default: uniform)")
    group.add_argument("--reference", default="pooled", choices=list(REFERENCE_CHOICES),
                       help="measure landmarks are drawn from (default: pooled)")
    group.add_argument("--reference-points", default=None, help="CSV of landmark candidates for --reference user")
    group.add_argument("--fresh-landmarks", action="store_true", help="draw new landmarks for every direction")
    group.add_argument("--sw-directions", default=SlicingSource.SPHERE.value, choices=[s.value for s in SlicingSource],
                       help="sliced Wasserstein directions: uniform on the sphere or normalised data points")
    group.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")


def _test_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--perms", type=int, default=DEFAULT_PERMUTATIONS, help="permutations per test (default: 300)")
    parser.add_argument("--level", type=float, default=DEFAULT_LEVEL, help="test level (default: 0.05)")


def _experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--methods", default=None, help="comma-separated statistics (default depends on experiment)")
    parser.add_argument("--sweep", default=None, help="comma-separated sweep values (dimensions or sample sizes)")
    parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="tests per sweep value (default: 100)")
    parser.add_argument("--workers", type=int, default=1, help="worker threads for the experiment grid (default: 1)")
    parser.add_argument("--has-header", action="store_true", help="CSV inputs start with a header row")
    parser.add_argument("--out", default=None,
                        help="report path (default: results directory). Wall-clock timings go to a "
                             "<stem>.timing.csv sidecar next to it; only the report is reproducible")
    parser.add_argument("--format", default=ReportFormat.CSV.value, choices=[f.value for f in ReportFormat],
                        help="report format (default: csv)")
    _test_flags(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kqe-bench",
        description="Kernel quantile discrepancies, MMD and sliced Wasserstein two-sample testing",
    )
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="log level (default: $KQE_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discrepancy", help="evaluate one statistic on two CSV samples")
    p.add_argument("x", help="CSV file of the first sample")
    p.add_argument("y", help="CSV file of the second sample")
    p.add_argument("--has-header", action="store_true", help="CSV inputs start with a header row")
    p.add_argument("--out", default=None, help="also write the JSON result to this path")
    _statistic_flags(p)

    p = sub.add_parser("test", help="permutation two-sample test on two CSV samples")
    p.add_argument("x", help="CSV file of the first sample")
    p.add_argument("y", help="CSV file of the second sample")
    p.add_argument("--has-header", action="store_true", help="CSV inputs start with a header row")
    p.add_argument("--out", default=None, help="also write the JSON result to this path")
    _statistic_flags(p)
    _test_flags(p)

    p = sub.add_parser("benchmark", help="rejection rates over a sweep")
    p.add_argument("--experiment", required=True, choices=[e.value for e in BENCHMARK_EXPERIMENTS])
    p.add_argument("--n", type=int, default=None, help="sample size for power-decay (default: 200)")
    p.add_argument("--x", default=None, help="first CSV table (custom-csv)")
    p.add_argument("--y", default=None, help="second CSV table (custom-csv)")
    _statistic_flags(p, with_stat=False)
    _experiment_flags(p)

    p = sub.add_parser("type1", help="Type I error rates under P = Q")
    p.add_argument("--x", default=None, help="CSV table to split into two samples (default: Gaussian data)")
    p.add_argument("--dim", type=int, default=None, help="dimension of the Gaussian data (default: 5)")
    _statistic_flags(p, with_stat=False)
    _experiment_flags(p)

    sub.add_parser("serve", help="run the tool server (streamable HTTP on $PORT, stdio otherwise)")
    return parser


def _methods(raw: Optional[str]) -> List[StatisticName]:
    if not raw:
        return []
    return [StatisticName(name.strip()) for name in raw.split(",") if name.strip()]


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Validated RunConfig for a parsed command line."""
    get = lambda name, default=None: getattr(args, name, default)
    inputs = [v for v in (get("x"), get("y")) if v]

    experiment = None
    if args.command == "benchmark":
        experiment = ExperimentName(args.experiment)
    elif args.command == "type1":
        experiment = ExperimentName.TYPE1_CSV if args.x else ExperimentName.TYPE1_GAUSSIAN

    try:
        methods = _methods(get("methods"))
        family = parse_kernel_family(args.kernel)
        sweep = parse_number_list(get("sweep")) if get("sweep") else []
    except ValueError as e:
        raise ArgumentError(str(e))

    return RunConfig(
        command=args.command,
        statistic=StatisticName(args.stat) if get("stat") else None,
        methods=methods,
        kernel=KernelSpec(family=family, degree=args.degree, offset=args.offset),
        bandwidth_rule=args.bandwidth,
        median_include_diagonal=args.median_include_diagonal,
        p=args.p,
        l=args.l,
        m=args.m,
        r=args.r,
        nu=QuantileShape(args.nu),
        reference=REFERENCE_CHOICES[args.reference],
        fresh_landmarks=args.fresh_landmarks,
        sw_source=SlicingSource(args.sw_directions),
        log_base=args.log_base,
        n_perms=get("perms", DEFAULT_PERMUTATIONS),
        level=get("level", DEFAULT_LEVEL),
        seed=args.seed,
        experiment=experiment,
        sweep=sweep,
        n=get("n"),
        dim=get("dim"),
        trials=get("trials", 1),
        inputs=inputs,
        has_header=get("has_header", False),
        out=get("out"),
        format=ReportFormat(get("format", ReportFormat.CSV.value)),
        workers=get("workers", 1),
    )


def _reference_points(args: argparse.Namespace, cfg: RunConfig):
    if cfg.reference != ReferenceMode.USER:
        return None
    if not args.reference_points:
        raise ArgumentError("--reference user needs --reference-points")
    return load_csv(args.reference_points, cfg.has_header).points


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    print(text)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n")
        logger.info(f"Wrote {out}")


def execute(args: argparse.Namespace) -> int:
    if args.command == "serve":
        from .main import serve
        serve()
        return 0

    cfg = config_from_args(args)
    logger.info(f"Command {cfg.command} (seed {cfg.seed})")

    if cfg.command in ("discrepancy", "test"):
        X = load_csv(args.x, cfg.has_header).points
        Y = load_csv(args.y, cfg.has_header).points
        reference = _reference_points(args, cfg)
        if cfg.command == "discrepancy":
            _emit(runner.run_discrepancy(cfg, X, Y, reference), cfg.out)
        else:
            result = runner.run_test(cfg, X, Y, reference)
            _emit(result.model_dump(mode="json", exclude={"wall_time"}), cfg.out)
        return 0

    if cfg.reference == ReferenceMode.USER:
        raise ArgumentError("--reference user is only available for discrepancy and test")
    tables = [load_csv(path, cfg.has_header).points for path in cfg.inputs]
    result = runner.run_benchmark(cfg, tables)
    runner.write_benchmark(cfg, result)
    print(runner.summary_table(result.reports))
    return 0


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv and run; returns the process exit code (2: bad input, 1: computation failure)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        set_log_level(args.log_level)
    try:
        return execute(args)
    except (DatasetError, ArgumentError, FileNotFoundError, ValidationError) as e:
        logger.error(f"Invalid input: {e}")
        return 2
    except KqeError as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))
