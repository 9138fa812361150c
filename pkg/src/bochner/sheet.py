"""The two-parameter subordination sheet Y_{a,t} on lattices.

Row ``i`` of a sheet is a fresh subordinator of parameter ``a_i - a_{i-1}``
read at the times given by row ``i-1``; row 0 is the identity ``Y_{0,t} = t``.
Consequently each row is a subordinator in ``t`` and each column is a Markov
chain in ``a`` with the exact transitions of the level diffusion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .branch import BranchKind, levy_of
from .rng import RngStream
from .subordinator import path_on_grid

_LATTICE_TOL = 1e-12


@dataclass(frozen=True)
class HalfLineMeasure:
    """Finite measure on [0, inf): point masses plus piecewise-constant density.

    ``atoms`` is a sequence of ``(location, weight)``; ``pieces`` a sequence of
    ``(lo, hi, density)`` on disjoint intervals.
    """

    atoms: tuple = ()
    pieces: tuple = ()

    def __post_init__(self) -> None:
        atoms = tuple(sorted((float(x), float(w)) for x, w in self.atoms))
        pieces = tuple(sorted((float(lo), float(hi), float(d)) for lo, hi, d in self.pieces))
        for x, w in atoms:
            if not (x >= 0 and np.isfinite(x)) or not w > 0:
                raise ValueError(f"bad atom ({x}, {w})")
        for i in range(1, len(atoms)):
            if atoms[i][0] == atoms[i - 1][0]:
                raise ValueError(f"duplicate atom location {atoms[i][0]}")
        for lo, hi, d in pieces:
            if not (0 <= lo < hi < np.inf) or not d >= 0:
                raise ValueError(f"bad piece ({lo}, {hi}, {d})")
        for (_, hi0, _), (lo1, _, _) in zip(pieces, pieces[1:]):
            if lo1 < hi0:
                raise ValueError("pieces overlap")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def dirac(cls, location: float, weight: float = 1.0) -> "HalfLineMeasure":
        return cls(atoms=((location, weight),))

    @classmethod
    def from_dict(cls, d: dict) -> "HalfLineMeasure":
        return cls(atoms=tuple(map(tuple, d.get("atoms", ()))), pieces=tuple(map(tuple, d.get("pieces", ()))))

    def to_dict(self) -> dict:
        return {"atoms": [list(a) for a in self.atoms], "pieces": [list(p) for p in self.pieces]}

    @property
    def is_zero(self) -> bool:
        return not self.atoms and not any(d > 0 for _, _, d in self.pieces)

    @property
    def is_atomic(self) -> bool:
        return not any(d > 0 for _, _, d in self.pieces)

    @property
    def support_max(self) -> float:
        """Right end of the support; 0 for the zero measure."""
        xs = [x for x, _ in self.atoms] + [hi for _, hi, d in self.pieces if d > 0]
        return max(xs, default=0.0)

    @property
    def support_min(self) -> float:
        xs = [x for x, _ in self.atoms] + [lo for lo, _, d in self.pieces if d > 0]
        return min(xs, default=np.inf)

    @property
    def total_mass(self) -> float:
        return sum(w for _, w in self.atoms) + sum((hi - lo) * d for lo, hi, d in self.pieces)

    def scaled(self, factor: float) -> "HalfLineMeasure":
        if factor == 0:
            return HalfLineMeasure()
        return HalfLineMeasure(
            atoms=tuple((x, w * factor) for x, w in self.atoms),
            pieces=tuple((lo, hi, d * factor) for lo, hi, d in self.pieces),
        )

    def restricted(self, lo: float, hi: float, *, closed_right: bool = True) -> "HalfLineMeasure":
        """Restriction to [lo, hi] (or [lo, hi) when ``closed_right`` is false)."""

        def keep(x: float) -> bool:
            return lo <= x and (x <= hi if closed_right else x < hi)

        pieces = []
        for a, b, d in self.pieces:
            a2, b2 = max(a, lo), min(b, hi)
            if b2 > a2:
                pieces.append((a2, b2, d))
        return HalfLineMeasure(atoms=tuple(p for p in self.atoms if keep(p[0])), pieces=tuple(pieces))

    def shifted(self, dx: float) -> "HalfLineMeasure":
        return HalfLineMeasure(
            atoms=tuple((x + dx, w) for x, w in self.atoms),
            pieces=tuple((lo + dx, hi + dx, d) for lo, hi, d in self.pieces),
        )


@dataclass(frozen=True)
class SheetSample:
    """Sheet values on an (a_levels x t_grid) lattice.

    ``values`` has shape ``(len(a_levels), len(t_grid))`` or, for a batch of
    independent sheets, ``(n, len(a_levels), len(t_grid))``.
    """

    branch: BranchKind
    a_levels: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    master_seed: int | None = None
    stream_id: tuple = field(default=())

    @property
    def batched(self) -> bool:
        return self.values.ndim == 3

    def level(self, a: float) -> np.ndarray:
        """Values at lattice level ``a``: shape ``(..., len(t_grid))``."""
        return self.values[..., level_index(self.a_levels, a), :]


def level_index(a_levels: np.ndarray, a: float) -> int:
    hits = np.flatnonzero(np.abs(np.asarray(a_levels) - a) <= _LATTICE_TOL * max(1.0, abs(a)))
    if hits.size == 0:
        raise ValueError(f"level {a} is not on the a-lattice; add it to a_levels")
    return int(hits[0])


def _check_grid(name: str, grid: np.ndarray) -> None:
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d sequence")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ValueError(f"{name} must be finite and >= 0")
    if np.any(np.diff(grid) <= 0):
        raise ValueError(f"{name} must be strictly increasing")


def propagate_levels(branch: BranchKind, a_levels, start, rng: RngStream) -> np.ndarray:
    """Stack the rows of a sheet whose level-0 row is ``start``.

    ``start`` has shape ``(T,)`` or ``(n, T)`` with nondecreasing rows; the
    result has shape ``start.shape[:-1] + (L, T)``.
    """
    branch = BranchKind.parse(branch)
    a_levels = np.asarray(a_levels, dtype=float)
    start = np.asarray(start, dtype=float)
    rows = [start]
    for da in np.diff(a_levels):
        law = levy_of(branch, da)
        rows.append(path_on_grid(law, rows[-1], rng).values)
    return np.stack(rows, axis=-2)


def sample_sheet(branch, a_levels, t_grid, rng: RngStream, size: int | None = None) -> SheetSample:
    branch = BranchKind.parse(branch)
    a_levels = np.asarray(a_levels, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    _check_grid("a_levels", a_levels)
    _check_grid("t_grid", t_grid)
    if a_levels[0] != 0:
        raise ValueError("a_levels must start at 0")
    start = t_grid if size is None else np.broadcast_to(t_grid, (size, t_grid.size))
    values = propagate_levels(branch, a_levels, start, rng)
    return SheetSample(branch, a_levels, t_grid, values, rng.master_seed, rng.stream_id)


def lattice_weights(mu: HalfLineMeasure, a_levels) -> np.ndarray:
    """Weights ``w`` with ``<Y_t, mu> ~= sum_i w_i Y_{a_i, t}``.

    Atoms are exact. Densities use the trapezoidal rule on the lattice points
    inside each piece, with the sheet linearly interpolated at piece ends.
    """
    a_levels = np.asarray(a_levels, dtype=float)
    w = np.zeros(a_levels.size)
    for x, wt in mu.atoms:
        w[level_index(a_levels, x)] += wt
    lo_lat, hi_lat = a_levels[0], a_levels[-1]
    for lo, hi, d in mu.pieces:
        if d == 0:
            continue
        if lo < lo_lat - _LATTICE_TOL or hi > hi_lat + _LATTICE_TOL:
            raise ValueError(f"piece [{lo}, {hi}] leaves the lattice range [{lo_lat}, {hi_lat}]")
        inner = a_levels[(a_levels > lo) & (a_levels < hi)]
        nodes = np.concatenate([[lo], inner, [hi]])
        trap = np.zeros(nodes.size)
        h = np.diff(nodes)
        trap[:-1] += h / 2
        trap[1:] += h / 2
        for node, tw in zip(nodes, trap):
            j = int(np.clip(np.searchsorted(a_levels, node, side="right") - 1, 0, a_levels.size - 2))
            span = a_levels[j + 1] - a_levels[j]
            s = np.clip((node - a_levels[j]) / span, 0.0, 1.0)
            w[j] += d * tw * (1 - s)
            w[j + 1] += d * tw * s
    return w


def pair_against(sheet: SheetSample, mu: HalfLineMeasure) -> np.ndarray:
    """``<Y_t, mu>`` for every t in the grid (and every sheet in a batch)."""
    w = lattice_weights(mu, sheet.a_levels)
    return np.tensordot(w, sheet.values, axes=([0], [-2]))


def _atoms_levels(atoms) -> list[float]:
    return sorted({x for x, _ in atoms})


def two_stage_pairing(branch, mu: HalfLineMeasure, split_x: float, t: float, rng: RngStream, size: int | None = None):
    """Sample ``<Y_t, mu>`` by restarting the sheet at level ``split_x``.

    The lower sheet (levels up to ``split_x``) uses ``rng.child(0)``; the
    part of ``mu`` above the split is paired against an independent sheet,
    drawn from ``rng.child(1)``, whose starting time is ``Y_{split_x, t}``.
    """
    branch = BranchKind.parse(branch)
    if not mu.is_atomic:
        raise ValueError("two_stage_pairing needs an atomic measure")
    split_x = float(split_x)
    if not split_x >= 0:
        raise ValueError("split_x must be >= 0")
    lower = mu.restricted(0.0, split_x)
    upper = HalfLineMeasure(atoms=tuple((x - split_x, w) for x, w in mu.atoms if x > split_x))

    lower_levels = sorted(set([0.0, *_atoms_levels(lower.atoms), split_x]))
    low = sample_sheet(branch, lower_levels, [t], rng.child(0), size=size)
    value = pair_against(low, lower)[..., 0]
    if not upper.atoms:
        return value

    y_split = low.level(split_x)
    upper_levels = [0.0, *_atoms_levels(upper.atoms)]
    up_values = propagate_levels(branch, upper_levels, y_split, rng.child(1))
    w = lattice_weights(upper, upper_levels)
    return value + np.tensordot(w, up_values, axes=([0], [-2]))[..., 0]


def subordinate_brownian(sheet: SheetSample, rng: RngStream) -> np.ndarray:
    """One Brownian path per sheet, read at every sheet value ``B_{Y_{a,t}}``.

    The path is sampled at the sorted multiset of sheet values, so all the
    subordinated processes share a single Brownian motion.
    """
    vals = sheet.values
    flat = vals.reshape(vals.shape[:-2] + (-1,))
    order = np.argsort(flat, axis=-1, kind="stable")
    times = np.take_along_axis(flat, order, axis=-1)
    dt = np.diff(times, axis=-1, prepend=0.0)
    steps = np.sqrt(dt) * rng.gen.standard_normal(dt.shape)
    path = np.cumsum(steps, axis=-1)
    out = np.empty_like(flat)
    np.put_along_axis(out, order, path, axis=-1)
    return out.reshape(vals.shape)
