"""Level diffusions Z_a of the two branches.

    homographic   dZ = sqrt(2 Z) dB + Z da
    besq          dZ = sqrt(2 Z) dB

Exact transitions come from the subordinator: Z_{a+da} given Z_a = x is the
branch subordinator of parameter ``da`` evaluated at time ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .branch import BranchKind, levy_of
from .rng import RngStream
from .subordinator import increment


@dataclass(frozen=True)
class EntranceDraw:
    """States drawn from the normalized entrance law at level ``epsilon``.

    ``mass`` is the total mass of the entrance measure, so ``mass * E[F(Z)]``
    integrates F against the path measure restricted to {Z_epsilon > 0}.
    """

    epsilon: float
    state: np.ndarray | float
    mass: float


def exact_step(branch, x, da: float, rng: RngStream) -> np.ndarray | float:
    if not da > 0:
        raise ValueError("da must be > 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("state must be >= 0")
    return increment(levy_of(branch, da), x, rng)


def exact_chain(branch, x, levels, rng: RngStream) -> np.ndarray:
    """Exact values at increasing ``levels`` (relative to the start); shape ``x.shape + (len(levels),)``."""
    levels = np.asarray(levels, dtype=float)
    out = []
    cur = np.asarray(x, dtype=float)
    prev = 0.0
    for lv in levels:
        if lv > prev:
            cur = exact_step(branch, cur, lv - prev, rng)
        out.append(np.asarray(cur, dtype=float))
        prev = lv
    return np.stack(out, axis=-1)


def euler_step(branch, x, da: float, rng: RngStream) -> np.ndarray:
    """Full-truncation Euler-Maruyama step, clipped at 0."""
    theta = BranchKind.parse(branch).theta
    x = np.asarray(x, dtype=float)
    xp = np.maximum(x, 0.0)
    noise = rng.gen.standard_normal(x.shape)
    return np.maximum(x + np.sqrt(2.0 * xp * da) * noise + theta * xp * da, 0.0)


def euler_chain(branch, x, a_total: float, n_steps: int, rng: RngStream) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    da = a_total / n_steps
    for _ in range(n_steps):
        x = euler_step(branch, x, da, rng)
    return x


def entrance_sample(branch, epsilon: float, rng: RngStream, size: int | None = None) -> EntranceDraw:
    if not epsilon > 0:
        raise ValueError("entrance level epsilon must be > 0")
    law = levy_of(branch, epsilon)
    state = rng.gen.exponential(law.jump_mean, size=size)
    return EntranceDraw(epsilon=float(epsilon), state=state, mass=law.rate)


def extinction_weight(branch, z):
    """P(Z eventually hits 0 | Z = z): exp(-z) for homographic, 1 for BESQ."""
    branch = BranchKind.parse(branch)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("state must be >= 0")
    out = np.exp(-z) if branch is BranchKind.HOMOGRAPHIC else np.ones_like(z)
    return float(out) if out.ndim == 0 else out


def zero_probability(branch, x: float, a: float) -> float:
    """P(Z_a = 0 | Z_0 = x) = exp(-x * rate(a))."""
    return math.exp(-x * levy_of(branch, a).rate)
