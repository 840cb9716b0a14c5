import logging
import math
import os
import tempfile
from pathlib import Path

# Logging Configuration
LOG_LEVEL = os.environ.get("KQE_LOG_LEVEL", "INFO").upper()
logging.basicConfig(
    level=LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger("kqe_bench")


def set_log_level(level: str) -> None:
    """Change the package log level at runtime (CLI --log-level)."""
    logger.setLevel(level.upper())


def _get_base_dir() -> Path:
    """Determine the base directory for reports when --out is not given."""
    configured = os.environ.get("KQE_RESULTS_DIR")
    if configured:
        return Path(configured)

    local_dir = Path.cwd() / "results"
    try:
        # Test write access
        local_dir.mkdir(parents=True, exist_ok=True)
        test_file = local_dir / ".write_test"
        with open(test_file, "w") as f:
            f.write("test")
        test_file.unlink()
        return local_dir
    except (IOError, OSError):
        pass

    # Fallback to system temp directory
    return Path(tempfile.gettempdir()) / "kqe_bench"


def results_dir() -> Path:
    path = _get_base_dir()
    path.mkdir(parents=True, exist_ok=True)
    return path


# Permutation testing
DEFAULT_PERMUTATIONS = 300
DEFAULT_LEVEL = 0.05
MIN_RELIABLE_PERMUTATIONS = 20

# Quantile discrepancies
DEFAULT_POWER = 2
DIRECTION_RESAMPLE_ATTEMPTS = 10
DEFAULT_LOG_BASE = math.e
DEFAULT_POLY_DEGREE = 3
DEFAULT_POLY_OFFSET = 1.0

# Kernel matrices
GRAM_CACHE_MAX_POINTS = int(os.environ.get("KQE_GRAM_CACHE_MAX", "4096"))
GRAM_CHUNK_ROWS = int(os.environ.get("KQE_GRAM_CHUNK_ROWS", "1024"))
# Pooled points used by the median heuristic; larger samples are subsampled
MEDIAN_MAX_POINTS = int(os.environ.get("KQE_MEDIAN_MAX_POINTS", "4096"))

# Experiment defaults
POWER_DECAY_DIMS = [32, 64, 128, 256, 512]
POWER_DECAY_N = 200
LAPLACE_SAMPLE_SIZES = [100, 500, 2000, 5000, 10000]
TYPE1_DIM = 5
TYPE1_SAMPLE_SIZES = [100]
DEFAULT_TRIALS = 100
TIMING_REPEATS = 3
