"""Homographic and squared-Bessel branches of Bernstein functions.

Both families are one-parameter semigroups of Moebius maps fixing 0:

    homographic  f_a(x) = x e^a / (1 + x (e^a - 1))
    besq         g_a(x) = x / (1 + a x)

A map x -> alpha x / (gamma x + delta) is stored through its lower-triangular
matrix [[alpha, 0], [gamma, delta]], so composition is a matrix product.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class BranchKind(enum.Enum):
    HOMOGRAPHIC = "homographic"
    BESQ = "besq"

    @property
    def theta(self) -> float:
        """Drift coefficient of the level diffusion: 1 for homographic, 0 for BESQ."""
        return 1.0 if self is BranchKind.HOMOGRAPHIC else 0.0

    @classmethod
    def parse(cls, value: "BranchKind | str") -> "BranchKind":
        if isinstance(value, BranchKind):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown branch {value!r}; expected 'homographic' or 'besq'") from None


@dataclass(frozen=True)
class MobiusMap:
    alpha: float
    gamma: float
    delta: float = 1.0

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.delta > 0 and self.gamma >= 0):
            raise ValueError(f"not a Bernstein Moebius map: {self}")

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "MobiusMap":
        if m[0, 1] != 0:
            raise ValueError("upper-right entry must vanish for maps fixing 0")
        d = float(m[1, 1])
        return cls(float(m[0, 0]) / d, float(m[1, 0]) / d, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, 0.0], [self.gamma, self.delta]])

    @property
    def supremum(self) -> float:
        """Limit of the map as its argument goes to infinity."""
        return math.inf if self.gamma == 0 else self.alpha / self.gamma

    def __call__(self, lam):
        return apply_exponent(self, lam)


IDENTITY = MobiusMap(1.0, 0.0, 1.0)


@dataclass(frozen=True)
class JumpLaw:
    """Compound Poisson law with exponential jumps of mean ``jump_mean``."""

    rate: float
    jump_mean: float

    def __post_init__(self) -> None:
        if self.rate < 0 or not self.jump_mean > 0:
            raise ValueError(f"invalid jump law: {self}")

    def exponent(self, lam):
        lam = np.asarray(lam, dtype=float)
        c = self.jump_mean
        return self.rate * c * lam / (1.0 + c * lam)

    def density(self, y):
        """Levy density rate/c * exp(-y/c) on (0, inf)."""
        y = np.asarray(y, dtype=float)
        c = self.jump_mean
        return np.where(y > 0, self.rate / c * np.exp(-y / c), 0.0)


def _check_level(a: float) -> float:
    a = float(a)
    if not a >= 0 or math.isinf(a):
        raise ValueError(f"branch parameter must be finite and >= 0, got {a}")
    return a


def mobius(branch: BranchKind | str, a: float) -> MobiusMap:
    branch = BranchKind.parse(branch)
    a = _check_level(a)
    if branch is BranchKind.HOMOGRAPHIC:
        return MobiusMap(math.exp(a), math.expm1(a), 1.0)
    return MobiusMap(1.0, a, 1.0)


def apply_exponent(m: MobiusMap, lam):
    """Evaluate alpha*lam / (gamma*lam + delta); ``lam`` may be an array or +inf."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0):
        raise ValueError("lambda must be >= 0")
    with np.errstate(invalid="ignore"):
        out = m.alpha * lam_arr / (m.gamma * lam_arr + m.delta)
    out = np.where(np.isinf(lam_arr), m.supremum, out)
    return float(out) if out.ndim == 0 else out


def compose(outer: MobiusMap, inner: MobiusMap) -> MobiusMap:
    """outer o inner, normalized to delta = 1."""
    return MobiusMap.from_matrix(outer.matrix @ inner.matrix)


def levy_of(branch: BranchKind | str, a: float) -> JumpLaw:
    """Jump law of the branch subordinator with parameter ``a > 0``.

    Homographic: rate e^a/(e^a-1), jump mean e^a-1, so the Levy density is
    e^a/(e^a-1)^2 * exp(-y/(e^a-1)). BESQ: rate 1/a, jump mean a.
    """
    branch = BranchKind.parse(branch)
    a = _check_level(a)
    if a == 0:
        raise ValueError("a = 0 is the deterministic subordinator Y_t = t; it has no jump law")
    if branch is BranchKind.HOMOGRAPHIC:
        c = math.expm1(a)
        return JumpLaw(rate=math.exp(a) / c, jump_mean=c)
    return JumpLaw(rate=1.0 / a, jump_mean=a)
