from typing import Any, Dict, List, Optional

import numpy as np

from .config import DEFAULT_LEVEL, DEFAULT_PERMUTATIONS, logger
from .models import (
    ExperimentName,
    KernelSpec,
    QuantileShape,
    RunConfig,
    StatisticName,
    parse_kernel_family,
)
from .server import mcp
from .services import runner

# The tool server only runs synthetic experiments; CSV experiments need files on the server
TOOL_EXPERIMENTS = [ExperimentName.POWER_DECAY, ExperimentName.LAPLACE_GAUSSIAN, ExperimentName.TYPE1_GAUSSIAN]


def tool_config(
    command: str,
    statistic: Optional[str] = None,
    kernel: str = "rbf",
    bandwidth: str = "median",
    degree: int = 3,
    p: int = 2,
    l: Optional[int] = None,
    m: Optional[int] = None,
    nu: str = "uniform",
    seed: int = 0,
    **extra: Any,
) -> RunConfig:
    """RunConfig from tool arguments (names as on the command line)."""
    return RunConfig(
        command=command,
        statistic=StatisticName(statistic) if statistic else None,
        kernel=KernelSpec(family=parse_kernel_family(kernel), degree=degree),
        bandwidth_rule=str(bandwidth),
        p=p,
        l=l,
        m=m,
        nu=QuantileShape(nu),
        seed=seed,
        **extra,
    )


@mcp.tool()
async def compute_discrepancy(
    x: List[List[float]],
    y: List[List[float]],
    statistic: str = "ekqd",
    kernel: str = "rbf",
    bandwidth: str = "median",
    degree: int = 3,
    p: int = 2,
    l: Optional[int] = None,
    m: Optional[int] = None,
    nu: str = "uniform",
    seed: int = 0,
) -> Dict[str, Any]:
    """Evaluate one discrepancy (ekqd, supkqd, mmd-u, sw, ...) between two samples given as rows."""
    try:
        cfg = tool_config("discrepancy", statistic, kernel, bandwidth, degree, p, l, m, nu, seed)
        result = runner.run_discrepancy(cfg, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return {"success": True, **result}
    except Exception as e:
        logger.error(f"Discrepancy error: {e}")
        return {"success": False, "error": str(e)}


@mcp.tool()
async def run_two_sample_test(
    x: List[List[float]],
    y: List[List[float]],
    statistic: str = "ekqd",
    kernel: str = "rbf",
    bandwidth: str = "median",
    degree: int = 3,
    p: int = 2,
    l: Optional[int] = None,
    m: Optional[int] = None,
    nu: str = "uniform",
    n_permutations: int = DEFAULT_PERMUTATIONS,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> Dict[str, Any]:
    """Permutation test of P = Q; returns statistic, threshold, p-value and the decision."""
    try:
        cfg = tool_config("test", statistic, kernel, bandwidth, degree, p, l, m, nu, seed,
                          n_perms=n_permutations, level=level)
        result = runner.run_test(cfg, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return {"success": True, **result.model_dump(mode="json")}
    except Exception as e:
        logger.error(f"Two-sample test error: {e}")
        return {"success": False, "error": str(e)}


@mcp.tool()
async def estimate_bandwidth(
    x: List[List[float]],
    y: List[List[float]],
    include_diagonal: bool = False,
) -> Dict[str, Any]:
    """Median-heuristic bandwidth of the pooled sample."""
    try:
        sigma = runner.estimate_bandwidth(np.asarray(x, dtype=float), np.asarray(y, dtype=float), include_diagonal)
        return {"success": True, "bandwidth": sigma, "include_diagonal": include_diagonal}
    except Exception as e:
        logger.error(f"Bandwidth error: {e}")
        return {"success": False, "error": str(e)}


@mcp.tool()
async def run_benchmark(
    experiment: str = "power-decay",
    methods: Optional[List[str]] = None,
    sweep: Optional[List[float]] = None,
    trials: int = 10,
    n: Optional[int] = None,
    kernel: str = "rbf",
    bandwidth: str = "median",
    degree: int = 3,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
) -> Dict[str, Any]:
    """Rejection rates of several statistics on a synthetic experiment (power-decay, laplace-gaussian, type1-gaussian)."""
    try:
        exp = ExperimentName(experiment)
        if exp not in TOOL_EXPERIMENTS:
            return {"success": False, "error": f"Experiment must be one of {[e.value for e in TOOL_EXPERIMENTS]}"}
        cfg = tool_config(
            "benchmark", None, kernel, bandwidth, degree, seed=seed,
            experiment=exp,
            methods=[StatisticName(name) for name in (methods or [])],
            sweep=list(sweep or []),
            trials=trials,
            n=n,
            n_perms=n_permutations,
            level=level,
        )
        result = runner.run_benchmark(cfg, timing=False)
        return {
            "success": True,
            "summary": runner.summary_table(result.reports),
            "reports": [r.model_dump(mode="json", exclude={"config"}) for r in result.reports],
        }
    except Exception as e:
        logger.error(f"Benchmark error: {e}")
        return {"success": False, "error": str(e)}
