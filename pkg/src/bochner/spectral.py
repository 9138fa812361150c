"""Sturm-Liouville solver for Laplace functionals of the sheet.

For a finite measure mu (atoms + piecewise-constant density) and lam >= 0 we
solve g'' = g (theta^2/4 + lam mu) backward from the right end of the support
and read off the Riccati profile

    xi(x) = theta/2 - g'(x)/g(x),   xi' = xi^2 - theta xi - lam * density,

which jumps by ``lam * w`` across an atom of weight ``w``. The Laplace
exponent is Phi(lam) = xi(0-), so that E exp(-lam <Y_t, mu>) = exp(-t Phi)
when the boundary value beyond the support is 0 (``PLAIN``). With boundary
value theta (``EXTINCTION``) the same recursion gives the exponent of
E[exp(-lam <Y_t, mu>); Z eventually dies out].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .branch import BranchKind
from .sheet import HalfLineMeasure

# max kappa*L per propagation step before renormalizing
_MAX_GROWTH = 20.0


class BoundaryVariant(enum.Enum):
    PLAIN = "plain"
    EXTINCTION = "extinction"

    def boundary_xi(self, theta: float) -> float:
        return 0.0 if self is BoundaryVariant.PLAIN else float(theta)

    @classmethod
    def parse(cls, value: "BoundaryVariant | str") -> "BoundaryVariant":
        if isinstance(value, BoundaryVariant):
            return value
        return cls(str(value).lower())


class SolverError(RuntimeError):
    pass


def propagate_piece(state, length: float, kappa: float) -> tuple[float, float]:
    """Carry (g, g') from the right end of a constant-coefficient piece to its left end."""
    g, gp = state
    if length < 0 or kappa < 0:
        raise ValueError("length and kappa must be >= 0")
    kl = kappa * length
    c = math.cosh(kl)
    if kappa > 0:
        s_over_k = math.sinh(kl) / kappa
        k_s = kappa * math.sinh(kl)
    else:
        s_over_k, k_s = length, 0.0
    return g * c - gp * s_over_k, -g * k_s + gp * c


@dataclass(frozen=True)
class _Segment:
    lo: float
    hi: float
    kappa: float
    g: float  # state at hi from the left, normalized
    gp: float


@dataclass(frozen=True)
class SpectralSolution:
    theta: float
    lam: float
    mu: HalfLineMeasure
    variant: BoundaryVariant
    phi: float
    segments: tuple
    x_max: float

    @property
    def xi_boundary(self) -> float:
        return self.variant.boundary_xi(self.theta)

    def xi(self, x):
        return xi_profile(self, x)


def _theta_of(theta) -> float:
    if isinstance(theta, (BranchKind, str)):
        return BranchKind.parse(theta).theta
    return float(theta)


def riccati_solve(theta, mu: HalfLineMeasure, lam: float, variant=BoundaryVariant.PLAIN,
                  scale: float = 1.0) -> SpectralSolution:
    """Solve the backward transfer-matrix recursion; ``theta`` may be a branch.

    ``scale`` multiplies the terminal (g, g'); the solution depends only on g'/g.
    """
    theta = _theta_of(theta)
    variant = BoundaryVariant.parse(variant)
    lam = float(lam)
    if not lam >= 0:
        raise ValueError("lambda must be >= 0")
    x_max = mu.support_max
    atoms = dict(mu.atoms)
    cuts = {0.0, x_max}
    cuts.update(x for x in atoms)
    for lo, hi, d in mu.pieces:
        cuts.update(p for p in (lo, hi) if p <= x_max)
    cuts = sorted(cuts)

    xi_inf = variant.boundary_xi(theta)
    if not scale > 0:
        raise ValueError("scale must be > 0")
    g, gp = scale, scale * (theta / 2 - xi_inf)
    segments = []
    for k in range(len(cuts) - 1, 0, -1):
        x_lo, x_hi = cuts[k - 1], cuts[k]
        if x_hi in atoms:
            gp -= lam * atoms[x_hi] * g
        mid = 0.5 * (x_lo + x_hi)
        dens = sum(d for lo, hi, d in mu.pieces if lo <= mid < hi)
        kappa = math.sqrt(theta * theta / 4 + lam * dens)
        n_sub = max(1, math.ceil(kappa * (x_hi - x_lo) / _MAX_GROWTH))
        edges = np.linspace(x_lo, x_hi, n_sub + 1)
        edges[0], edges[-1] = x_lo, x_hi
        for j in range(n_sub, 0, -1):
            gp, g = gp / g, 1.0
            segments.append(_Segment(float(edges[j - 1]), float(edges[j]), kappa, g, gp))
            g, gp = propagate_piece((g, gp), edges[j] - edges[j - 1], kappa)
            if not g > 0:
                raise SolverError(f"g vanished at x={edges[j - 1]} (theta={theta}, lam={lam})")
    if 0.0 in atoms:
        gp -= lam * atoms[0.0] * g
    phi = theta / 2 - gp / g
    return SpectralSolution(theta, lam, mu, variant, phi, tuple(reversed(segments)), x_max)


def xi_profile(sol: SpectralSolution, x):
    """xi(x, lam), right-continuous at atoms; equals the boundary value for x >= x_max."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise ValueError("x must be >= 0")
    his = np.array([s.hi for s in sol.segments])
    out = np.empty(xs.shape)
    for i, xv in enumerate(xs):
        if xv >= sol.x_max or not sol.segments:
            out[i] = sol.xi_boundary
            continue
        seg = sol.segments[int(np.searchsorted(his, xv, side="right"))]
        g, gp = propagate_piece((seg.g, seg.gp), seg.hi - xv, seg.kappa)
        out[i] = sol.theta / 2 - gp / g
    return float(out[0]) if np.ndim(x) == 0 else out


def laplace_exponent(theta, mu: HalfLineMeasure, lam: float, variant=BoundaryVariant.PLAIN) -> float:
    return riccati_solve(theta, mu, lam, variant).phi
