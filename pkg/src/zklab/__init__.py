"""Pseudospectral laboratory for the two-dimensional Zakharov-Kuznetsov equation."""
from .spectral import (
    Field2,
    Grid2,
    SpecField2,
    apply_derivative,
    apply_potential,
    dealias,
    dyadic_project,
    fft_forward,
    fft_inverse,
)
from .spacetime import SpaceTimeField
from .propagator import duhamel, free_evolve
from .norms import NormSpec, TimeCutoff, sobolev_norm, xsb_norm_direct, xsb_norm_factorized
from .solver import SolveConfig, picard_solve, reference_solve
from .estimates import EstimateReport

__version__ = "0.1.0"

__all__ = [
    "Field2",
    "Grid2",
    "SpecField2",
    "apply_derivative",
    "apply_potential",
    "dealias",
    "dyadic_project",
    "fft_forward",
    "fft_inverse",
    "SpaceTimeField",
    "duhamel",
    "free_evolve",
    "NormSpec",
    "TimeCutoff",
    "sobolev_norm",
    "xsb_norm_direct",
    "xsb_norm_factorized",
    "SolveConfig",
    "picard_solve",
    "reference_solve",
    "EstimateReport",
]
