"""Numerical laboratory for singular mixed local-nonlocal parabolic problems.

Solves u_t - Δu + (-Δ)^s u = f / u^γ on the unit box with zero exterior data
through the k-regularized ladder, together with the steady elliptic problem,
and checks the structural properties (positivity, comparison, ladder
monotonicity, energy bounds, long-time behaviour) on the discrete level.
"""

from singlab.grid import Grid, StripMask, build_grid, strip_mask
from singlab.operators import (
    OperatorMatrix,
    apply_operator,
    assemble_combined,
    assemble_fractional_laplacian,
    assemble_local_laplacian,
    normalization_constant,
)
from singlab.source import GammaField, SourceData, regularized_rhs, truncate
from singlab.evolve import ProblemSpec, Trajectory, solve_ladder, solve_parabolic
from singlab.elliptic import SteadyState, solve_elliptic

__all__ = [
    "Grid",
    "StripMask",
    "build_grid",
    "strip_mask",
    "OperatorMatrix",
    "apply_operator",
    "assemble_combined",
    "assemble_fractional_laplacian",
    "assemble_local_laplacian",
    "normalization_constant",
    "GammaField",
    "SourceData",
    "regularized_rhs",
    "truncate",
    "ProblemSpec",
    "Trajectory",
    "solve_ladder",
    "solve_parabolic",
    "SteadyState",
    "solve_elliptic",
]

__version__ = "0.1.0"
