"""Exact sampling of the branch subordinators.

A branch subordinator is compound Poisson with exponential jumps, so its
increment over a time span ``dt`` is ``c * G`` with ``G ~ Gamma(N, 1)`` and
``N ~ Poisson(rate * dt)``. All samplers are vectorized: ``dt`` may be an
array, and each entry receives an independent increment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .branch import JumpLaw
from .rng import RngStream


@dataclass(frozen=True)
class PathOnGrid:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.times.shape[-1] != self.values.shape[-1]:
            raise ValueError("times and values must have the same length")


def _gamma_integer_shape(counts: np.ndarray, rng: RngStream) -> np.ndarray:
    # numpy's gamma sampler is exact for every shape and returns 0 for shape 0,
    # so a single draw replaces the sum of N unit exponentials.
    return rng.gen.standard_gamma(counts.astype(float))


def increment(law: JumpLaw, dt, rng: RngStream, size=None) -> np.ndarray | float:
    """Increment of the subordinator over a time span ``dt``.

    ``size`` broadcasts a scalar ``dt`` to that many independent draws.
    Returns exactly 0 wherever no jump occurs.
    """
    dt_arr = np.asarray(dt, dtype=float)
    if np.any(dt_arr < 0) or np.any(np.isnan(dt_arr)):
        raise ValueError("dt must be >= 0")
    if size is not None:
        dt_arr = np.broadcast_to(dt_arr, size)
    counts = rng.gen.poisson(law.rate * dt_arr)
    out = law.jump_mean * _gamma_integer_shape(np.asarray(counts), rng)
    if np.ndim(out) == 0:
        return float(out)
    return out


def path_on_grid(law: JumpLaw, times, rng: RngStream) -> PathOnGrid:
    """Subordinator started at 0 and read at nondecreasing ``times``.

    ``times`` may be 1-d (one path) or 2-d with one row of times per path;
    each row is treated as an independent path.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim == 0:
        times = times[None]
    if np.any(times < 0):
        raise ValueError("times must be >= 0")
    spans = np.diff(times, axis=-1, prepend=0.0)
    if np.any(spans < 0):
        raise ValueError("times must be nondecreasing")
    values = np.cumsum(increment(law, spans, rng), axis=-1)
    return PathOnGrid(times=times, values=values)
