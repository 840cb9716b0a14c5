import json

from . import config
from .models import ExperimentName, KernelFamily, QuantileShape
from .server import mcp
from .services.statistics import REGISTRY


@mcp.resource("kqe://statistics")
async def get_statistics() -> str:
    """Registered two-sample statistics with their cost"""
    return json.dumps(
        [{"name": s.name.value, "description": s.description, "cost": s.cost} for s in REGISTRY.values()],
        indent=2,
    )


@mcp.resource("kqe://kernels")
async def get_kernels() -> str:
    """Available kernel families"""
    return json.dumps([{"name": k.name, "value": k.value} for k in KernelFamily], indent=2)


@mcp.resource("kqe://weightings")
async def get_weightings() -> str:
    """Quantile-level weightings"""
    return json.dumps([{"name": w.name, "value": w.value} for w in QuantileShape], indent=2)


@mcp.resource("kqe://experiments")
async def get_experiments() -> str:
    """Rejection-rate experiments and their default sweeps"""
    return json.dumps([
        {"name": ExperimentName.POWER_DECAY.value, "param": "d", "sweep": config.POWER_DECAY_DIMS, "n": config.POWER_DECAY_N},
        {"name": ExperimentName.LAPLACE_GAUSSIAN.value, "param": "n", "sweep": config.LAPLACE_SAMPLE_SIZES},
        {"name": ExperimentName.CUSTOM_CSV.value, "param": "n", "sweep": None},
        {"name": ExperimentName.TYPE1_GAUSSIAN.value, "param": "n", "sweep": config.TYPE1_SAMPLE_SIZES, "d": config.TYPE1_DIM},
        {"name": ExperimentName.TYPE1_CSV.value, "param": "n", "sweep": None},
    ], indent=2)


@mcp.resource("kqe://defaults")
async def get_defaults() -> str:
    """Default test and estimator settings"""
    return json.dumps({
        "permutations": config.DEFAULT_PERMUTATIONS,
        "level": config.DEFAULT_LEVEL,
        "min_reliable_permutations": config.MIN_RELIABLE_PERMUTATIONS,
        "power": config.DEFAULT_POWER,
        "polynomial_degree": config.DEFAULT_POLY_DEGREE,
        "polynomial_offset": config.DEFAULT_POLY_OFFSET,
        "direction_resample_attempts": config.DIRECTION_RESAMPLE_ATTEMPTS,
        "gram_cache_max_points": config.GRAM_CACHE_MAX_POINTS,
        "median_max_points": config.MEDIAN_MAX_POINTS,
        "trials": config.DEFAULT_TRIALS,
    }, indent=2)
