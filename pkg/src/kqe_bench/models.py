import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.integrate import trapezoid

from .config import (
    DEFAULT_LEVEL,
    DEFAULT_LOG_BASE,
    DEFAULT_PERMUTATIONS,
    DEFAULT_POLY_DEGREE,
    DEFAULT_POLY_OFFSET,
    DEFAULT_POWER,
)


class KernelFamily(Enum):
    """Supported kernel families"""
    RBF = "rbf"
    LAPLACIAN = "laplacian"
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"


class StatisticName(Enum):
    """Registered two-sample statistics"""
    EKQD = "ekqd"
    EKQD_CENTERED = "ekqd-centered"
    SUPKQD = "supkqd"
    SUPKQD_CENTERED = "supkqd-centered"
    MMD_U = "mmd-u"
    MMD_V = "mmd-v"
    MMD_LIN = "mmd-lin"
    MMD_MULTI = "mmd-multi"
    SW = "sw"
    MAX_SW = "max-sw"


class QuantileShape(Enum):
    """Weightings of quantile levels"""
    UNIFORM = "uniform"
    TRIANGLE = "triangle"
    REVERSE_TRIANGLE = "reverse-triangle"
    CUSTOM_TABLE = "custom-table"


class ReferenceMode(Enum):
    """Where direction landmarks are drawn from"""
    POOLED = "pooled-empirical"
    USER = "user-supplied"
    GAUSSIAN_IQR = "gaussian-iqr"
    UNIFORM_IQR = "uniform-iqr"


class SlicingSource(Enum):
    """Direction source for sliced Wasserstein"""
    SPHERE = "sphere"
    DATA = "data"


class SlicedMode(Enum):
    EXPECTED = "expected"
    MAX = "max"


class GeneratorFamily(Enum):
    GAUSSIAN_ISO = "gaussian-iso"
    GAUSSIAN_DIAG = "gaussian-diag"
    LAPLACE = "laplace"
    CUSTOM = "custom"


class ExperimentName(Enum):
    """Rejection-rate experiments; the first three are benchmark experiments"""
    POWER_DECAY = "power-decay"
    LAPLACE_GAUSSIAN = "laplace-gaussian"
    CUSTOM_CSV = "custom-csv"
    TYPE1_GAUSSIAN = "type1-gaussian"
    TYPE1_CSV = "type1-csv"


class ReportFormat(Enum):
    CSV = "csv"
    JSON = "json"


KQD_STATISTICS = {
    StatisticName.EKQD,
    StatisticName.EKQD_CENTERED,
    StatisticName.SUPKQD,
    StatisticName.SUPKQD_CENTERED,
}
MMD_STATISTICS = {
    StatisticName.MMD_U,
    StatisticName.MMD_V,
    StatisticName.MMD_LIN,
    StatisticName.MMD_MULTI,
}
SLICED_STATISTICS = {StatisticName.SW, StatisticName.MAX_SW}
# Quantile statistics need |X| = |Y|
EQUAL_SIZE_STATISTICS = KQD_STATISTICS | SLICED_STATISTICS


KERNEL_ALIASES = {"poly": KernelFamily.POLYNOMIAL}


def parse_kernel_family(name: str) -> KernelFamily:
    """Kernel family from its name or alias (poly)."""
    key = name.strip().lower()
    if key in KERNEL_ALIASES:
        return KERNEL_ALIASES[key]
    return KernelFamily(key)


class KernelSpec(BaseModel):
    """Kernel family plus parameters. A missing bandwidth means "median heuristic"."""
    model_config = ConfigDict(frozen=True)

    family: KernelFamily = KernelFamily.RBF
    bandwidth: Optional[float] = Field(default=None, gt=0)
    degree: int = Field(default=DEFAULT_POLY_DEGREE, ge=1)
    offset: float = DEFAULT_POLY_OFFSET

    @property
    def needs_bandwidth(self) -> bool:
        return self.family in (KernelFamily.RBF, KernelFamily.LAPLACIAN)

    @property
    def is_resolved(self) -> bool:
        return not self.needs_bandwidth or self.bandwidth is not None

    def with_bandwidth(self, bandwidth: float) -> "KernelSpec":
        return KernelSpec(family=self.family, bandwidth=bandwidth, degree=self.degree, offset=self.offset)

    def describe(self) -> Dict[str, Any]:
        if self.family == KernelFamily.POLYNOMIAL:
            return {"family": self.family.value, "degree": self.degree, "offset": self.offset}
        if self.needs_bandwidth:
            return {"family": self.family.value, "bandwidth": self.bandwidth}
        return {"family": self.family.value}


class QuantileWeighting(BaseModel):
    """Density f_nu over quantile levels in [0, 1]."""
    model_config = ConfigDict(frozen=True)

    shape: QuantileShape = QuantileShape.UNIFORM
    # Density values on an equispaced grid over [0, 1]; custom-table only
    table: Optional[Tuple[float, ...]] = None

    @model_validator(mode="after")
    def _check_table(self) -> "QuantileWeighting":
        if self.shape == QuantileShape.CUSTOM_TABLE:
            if self.table is None or len(self.table) < 2:
                raise ValueError("custom-table weighting needs at least two density values")
            if any(v < 0 or not math.isfinite(v) for v in self.table):
                raise ValueError("custom-table densities must be finite and nonnegative")
            if sum(self.table) <= 0:
                raise ValueError("custom-table densities must not all be zero")
        elif self.table is not None:
            raise ValueError(f"table is only used by the custom-table shape, not {self.shape.value}")
        return self

    def density(self, alpha) -> np.ndarray:
        """Evaluate f_nu at quantile levels alpha (array-like in [0, 1])."""
        alpha = np.asarray(alpha, dtype=float)
        if self.shape == QuantileShape.UNIFORM:
            return np.ones_like(alpha)
        if self.shape == QuantileShape.TRIANGLE:
            return 4.0 * np.minimum(alpha, 1.0 - alpha)
        if self.shape == QuantileShape.REVERSE_TRIANGLE:
            return 4.0 * np.abs(alpha - 0.5)
        grid = np.linspace(0.0, 1.0, len(self.table))
        values = np.asarray(self.table, dtype=float)
        mass = trapezoid(values, grid)
        return np.interp(alpha, grid, values) / mass


class KqdConfig(BaseModel):
    """Configuration of the quantile discrepancies. l and m default to ceil(log n)."""
    model_config = ConfigDict(frozen=True)

    p: int = Field(default=DEFAULT_POWER, ge=1)
    l: Optional[int] = Field(default=None, ge=1)
    m: Optional[int] = Field(default=None, ge=1)
    weighting: QuantileWeighting = QuantileWeighting()
    seed: int = 0
    reference: ReferenceMode = ReferenceMode.POOLED
    fresh_landmarks: bool = False
    log_base: float = Field(default=DEFAULT_LOG_BASE, gt=1)

    def resolve_l(self, n: int) -> int:
        return self.l if self.l is not None else log_count(n, self.log_base)

    def resolve_m(self, n: int) -> int:
        return self.m if self.m is not None else log_count(n, self.log_base)


def log_count(n: int, base: float = DEFAULT_LOG_BASE) -> int:
    """ceil(log n), at least 1."""
    if n < 2:
        return 1
    return max(1, math.ceil(math.log(n) / math.log(base)))


class StatisticSpec(BaseModel):
    """A named statistic together with everything needed to evaluate it."""
    model_config = ConfigDict(frozen=True)

    name: StatisticName = StatisticName.EKQD
    kernel: KernelSpec = KernelSpec()
    median_include_diagonal: bool = False
    kqd: KqdConfig = KqdConfig()
    # MMD-Multi subdiagonal count; defaults to ceil(log(n)^2)
    r: Optional[int] = Field(default=None, ge=1)
    sw_source: SlicingSource = SlicingSource.SPHERE

    def resolve_r(self, n: int) -> int:
        if self.r is not None:
            return self.r
        base = math.log(self.kqd.log_base)
        r = math.ceil((math.log(n) / base) ** 2) if n > 1 else 1
        return int(min(max(r, 1), max(n - 1, 1)))


class TestResult(BaseModel):
    """Outcome of a permutation two-sample test"""
    __test__ = False

    statistic_name: StatisticName
    statistic: float
    threshold: float
    p_value: float = Field(gt=0, le=1)
    reject: bool
    n_permutations: int = Field(ge=1)
    level: float
    bandwidth: Optional[float] = None
    wall_time: float = 0.0

    @model_validator(mode="after")
    def _check_reject(self) -> "TestResult":
        if self.reject != (self.statistic > self.threshold):
            raise ValueError("reject must equal statistic > threshold")
        return self


class SweepPoint(BaseModel):
    param_value: float
    rejection_rate: Optional[float] = Field(default=None, ge=0, le=1)
    trials: int = Field(ge=1)
    error: Optional[str] = None


class ExperimentReport(BaseModel):
    """Rejection rates of one method across a parameter sweep"""
    experiment: str
    method: str
    param_name: str
    points: List[SweepPoint]
    trials: int = Field(ge=1)
    seed: int
    config: Dict[str, Any] = Field(default_factory=dict)


class GeneratorSpec(BaseModel):
    """Sampler description for synthetic (or table-backed) data"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    family: GeneratorFamily = GeneratorFamily.GAUSSIAN_ISO
    d: int = Field(default=1, ge=1)
    mean: Optional[List[float]] = None
    variances: Optional[List[float]] = None
    scale: float = Field(default=1.0, gt=0)
    points: Optional[np.ndarray] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def _check_shapes(self) -> "GeneratorSpec":
        if self.mean is not None and len(self.mean) != self.d:
            raise ValueError(f"mean has {len(self.mean)} entries, expected d={self.d}")
        if self.variances is not None:
            if len(self.variances) != self.d:
                raise ValueError(f"variances has {len(self.variances)} entries, expected d={self.d}")
            if any(v <= 0 for v in self.variances):
                raise ValueError("variances must be positive")
        if self.family == GeneratorFamily.CUSTOM:
            if self.points is None or self.points.ndim != 2 or self.points.shape[1] != self.d:
                raise ValueError("custom generator needs an n x d points table")
        return self


class RunConfig(BaseModel):
    """Validated command line, echoed into every report"""
    command: str
    statistic: Optional[StatisticName] = None
    methods: List[StatisticName] = Field(default_factory=list)
    kernel: KernelSpec = KernelSpec()
    bandwidth_rule: str = "median"
    median_include_diagonal: bool = False
    p: int = Field(default=DEFAULT_POWER, ge=1)
    l: Optional[int] = Field(default=None, ge=1)
    m: Optional[int] = Field(default=None, ge=1)
    r: Optional[int] = Field(default=None, ge=1)
    nu: QuantileShape = QuantileShape.UNIFORM
    reference: ReferenceMode = ReferenceMode.POOLED
    fresh_landmarks: bool = False
    sw_source: SlicingSource = SlicingSource.SPHERE
    log_base: float = Field(default=DEFAULT_LOG_BASE, gt=1)
    n_perms: int = Field(default=DEFAULT_PERMUTATIONS, ge=1)
    level: float = Field(default=DEFAULT_LEVEL, gt=0, lt=1)
    seed: int = Field(default=0, ge=0)
    experiment: Optional[ExperimentName] = None
    sweep: List[float] = Field(default_factory=list)
    n: Optional[int] = Field(default=None, ge=1)
    dim: Optional[int] = Field(default=None, ge=1)
    trials: int = Field(default=1, ge=1)
    inputs: List[str] = Field(default_factory=list)
    has_header: bool = False
    out: Optional[str] = None
    format: ReportFormat = ReportFormat.CSV
    workers: int = Field(default=1, ge=1)

    @field_validator("bandwidth_rule")
    @classmethod
    def _check_bandwidth_rule(cls, value: str) -> str:
        if value != "median":
            try:
                if float(value) <= 0:
                    raise ValueError
            except ValueError:
                raise ValueError(f"bandwidth must be 'median' or a positive number, got {value!r}")
        return value

    def statistic_spec(self, name: StatisticName) -> StatisticSpec:
        kernel = self.kernel
        if self.bandwidth_rule != "median" and kernel.needs_bandwidth:
            kernel = kernel.with_bandwidth(float(self.bandwidth_rule))
        return StatisticSpec(
            name=name,
            kernel=kernel,
            median_include_diagonal=self.median_include_diagonal,
            kqd=KqdConfig(
                p=self.p,
                l=self.l,
                m=self.m,
                weighting=QuantileWeighting(shape=self.nu),
                seed=self.seed,
                reference=self.reference,
                fresh_landmarks=self.fresh_landmarks,
                log_base=self.log_base,
            ),
            r=self.r,
            sw_source=self.sw_source,
        )

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")
