import time
from typing import Callable, List, Sequence, TypeVar, Union

import numpy as np

from .errors import ArgumentError

T = TypeVar("T")

SeedLike = Union[int, np.random.Generator]


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Deterministic generator keyed by (seed, *keys)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *(int(k) for k in keys)]))


def as_generator(rng: SeedLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(int(rng))


def as_table(values, name: str = "sample") -> np.ndarray:
    """Coerce a sample to a float n x d array (a flat vector is one column)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ArgumentError(f"{name} must be a vector or an n x d table, got shape {arr.shape}")
    return arr


def median_wall_time(fn: Callable[[], T], repeats: int = 3) -> float:
    """Median wall time of `repeats` calls to fn, in seconds."""
    times: List[float] = []
    for _ in range(max(1, repeats)):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def parse_number_list(raw: Union[str, Sequence]) -> List[float]:
    """Helper to split '32,64,128' (or a list) into numbers."""
    if isinstance(raw, str):
        parts = [p for p in raw.replace(" ", ",").split(",") if p]
    else:
        parts = list(raw)
    return [float(p) for p in parts]
