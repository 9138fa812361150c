"""Bochner subordination along the homographic and BESQ branches."""

from .branch import BranchKind, JumpLaw, MobiusMap, apply_exponent, compose, levy_of, mobius
from .diffusion import entrance_sample, euler_step, exact_step, extinction_weight
from .rng import RngStream
from .sheet import HalfLineMeasure, SheetSample, pair_against, sample_sheet, subordinate_brownian, two_stage_pairing
from .spectral import BoundaryVariant, SpectralSolution, propagate_piece, riccati_solve, xi_profile
from .subordinator import PathOnGrid, increment, path_on_grid

__all__ = [
    "BoundaryVariant",
    "BranchKind",
    "HalfLineMeasure",
    "JumpLaw",
    "MobiusMap",
    "PathOnGrid",
    "RngStream",
    "SheetSample",
    "SpectralSolution",
    "apply_exponent",
    "compose",
    "entrance_sample",
    "euler_step",
    "exact_step",
    "extinction_weight",
    "increment",
    "levy_of",
    "mobius",
    "pair_against",
    "path_on_grid",
    "propagate_piece",
    "riccati_solve",
    "sample_sheet",
    "subordinate_brownian",
    "two_stage_pairing",
    "xi_profile",
]
