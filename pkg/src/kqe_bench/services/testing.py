"""
Permutation two-sample tests and rejection-rate estimation.

Per trial the statistic is prepared once on the pooled sample (bandwidth, directions, Gram
matrix) and re-evaluated on random relabellings. The threshold is the empirical
(1 - level) quantile of the permuted statistics and H0 is rejected when the observed
statistic is strictly above it.
"""
import time
import warnings
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..config import DEFAULT_LEVEL, DEFAULT_PERMUTATIONS, MIN_RELIABLE_PERMUTATIONS, logger
from ..errors import ArgumentError, KqeError, TrialError, UnreliableThresholdWarning
from ..models import ExperimentReport, GeneratorSpec, StatisticSpec, SweepPoint, TestResult
from ..utils import SeedLike, as_generator, substream
from .datagen import sample_pair
from .quantiles import empirical_quantile
from .statistics import PreparedStatistic

TrialSampler = Callable[[np.random.Generator], Tuple[np.ndarray, np.ndarray]]
# Failures recorded per trial or benchmark cell instead of aborting a sweep
CELL_ERRORS = (KqeError, ValueError, FloatingPointError, np.linalg.LinAlgError)


def _check_test_args(n_perms: int, level: float) -> None:
    if n_perms < 1:
        raise ArgumentError(f"need at least one permutation, got {n_perms}")
    if not 0.0 < level < 1.0:
        raise ArgumentError(f"level must lie in (0, 1), got {level}")
    if n_perms < MIN_RELIABLE_PERMUTATIONS:
        message = f"{n_perms} permutations give an unreliable threshold (use at least {MIN_RELIABLE_PERMUTATIONS})"
        logger.warning(message)
        warnings.warn(message, UnreliableThresholdWarning, stacklevel=3)


def seed_from(rng: SeedLike) -> int:
    """An integer seed: ints pass through, generators are drawn from."""
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2 ** 63 - 1))
    return int(rng)


def permutation_test(
    X,
    Y,
    spec: StatisticSpec,
    n_perms: int = DEFAULT_PERMUTATIONS,
    level: float = DEFAULT_LEVEL,
    rng: SeedLike = 0,
    reference_points: Optional[np.ndarray] = None,
) -> TestResult:
    """Permutation test of H0: P = Q with the given statistic."""
    _check_test_args(n_perms, level)
    return _run_test(X, Y, spec, n_perms, level, rng, reference_points)


def _run_test(X, Y, spec: StatisticSpec, n_perms: int, level: float, rng: SeedLike,
              reference_points: Optional[np.ndarray] = None) -> TestResult:
    direction_rng, perm_rng = as_generator(rng).spawn(2)
    start = time.perf_counter()

    prepared = PreparedStatistic(spec, X, Y, direction_rng, reference_points)
    observed = prepared.observed().raw
    perm_seed = seed_from(perm_rng)
    total = prepared.nx + prepared.ny

    perms = [substream(perm_seed, k).permutation(total) for k in range(n_perms)]
    permuted = prepared.evaluate_splits(perms)

    threshold = empirical_quantile(permuted, 1.0 - level)
    p_value = (1 + int(np.sum(permuted >= observed))) / (1 + n_perms)
    return TestResult(
        statistic_name=spec.name,
        statistic=observed,
        threshold=threshold,
        p_value=p_value,
        reject=bool(observed > threshold),
        n_permutations=n_perms,
        level=level,
        bandwidth=prepared.bandwidth,
        wall_time=time.perf_counter() - start,
    )


def run_trials(
    sampler: TrialSampler,
    trials: int,
    spec: StatisticSpec,
    seed: int,
    keys: Sequence[int] = (),
    method_index: int = 0,
    n_perms: int = DEFAULT_PERMUTATIONS,
    level: float = DEFAULT_LEVEL,
) -> float:
    """
    Fraction of `trials` tests that reject.

    Trial t draws its data from substream (seed, *keys, t) and runs the test on
    (seed, *keys, t, method_index), so every method sees the same data.
    """
    if trials < 1:
        raise ArgumentError(f"trials must be at least 1, got {trials}")
    _check_test_args(n_perms, level)
    rejections = 0
    for t in range(trials):
        try:
            X, Y = sampler(substream(seed, *keys, t))
            result = _run_test(X, Y, spec, n_perms, level, substream(seed, *keys, t, method_index))
        except CELL_ERRORS as e:
            raise TrialError(t, e) from e
        rejections += int(result.reject)
        logger.debug(f"trial {t}: statistic={result.statistic:.6g} threshold={result.threshold:.6g} reject={result.reject}")
    return rejections / trials


def rejection_rate(
    gen_p: GeneratorSpec,
    gen_q: GeneratorSpec,
    n: int,
    trials: int,
    spec: StatisticSpec,
    rng: SeedLike = 0,
    n_perms: int = DEFAULT_PERMUTATIONS,
    level: float = DEFAULT_LEVEL,
) -> ExperimentReport:
    """Rejection rate of `trials` independent tests on fresh samples from P and Q."""
    seed = seed_from(rng)
    rate = run_trials(lambda r: sample_pair(gen_p, gen_q, n, r), trials, spec, seed, n_perms=n_perms, level=level)
    return ExperimentReport(
        experiment="generators",
        method=spec.name.value,
        param_name="n",
        points=[SweepPoint(param_value=n, rejection_rate=rate, trials=trials)],
        trials=trials,
        seed=seed,
        config={
            "P": gen_p.model_dump(mode="json"),
            "Q": gen_q.model_dump(mode="json"),
            "statistic": spec.model_dump(mode="json"),
            "n_perms": n_perms,
            "level": level,
        },
    )
