"""Convex curvature regularization of images via orientation lifting.

Images are lifted to a staggered grid over positions and orientations;
curvature-dependent perimeter energies become convex there and are
minimized by a preconditioned primal-dual solver over divergence-free
lifted flux fields tied to the image gradient.
"""

from .dataterms import ForceBoxTerm, InpaintTerm, L1Term, L2Term
from .energy import (
    EnergyDiagnostics,
    ParametricCurve,
    alignment_residual,
    curve_energy,
    diagnostics,
    discrete_energy,
    normalized_objective,
)
from .grid import (
    EdgeField,
    FluxField,
    GridSpec,
    divergence,
    divergence_adjoint,
    face_average,
    face_average_adjoint,
    flux_projection,
    flux_projection_adjoint,
    rotated_gradient,
    rotated_gradient_adjoint,
    rt_evaluate,
)
from .models import CurvatureModel
from .solver import (
    ConvergenceReport,
    FieldMask,
    Preconditioners,
    SolverConfig,
    SolverDivergence,
    SolverState,
    assemble_preconditioners,
    dual_violation,
    init_state,
    iterate,
    residuals,
    solve,
    wall_pins,
)

__version__ = "0.1.0"

__all__ = [
    "CurvatureModel",
    "GridSpec",
    "FluxField",
    "EdgeField",
    "divergence",
    "divergence_adjoint",
    "flux_projection",
    "flux_projection_adjoint",
    "rotated_gradient",
    "rotated_gradient_adjoint",
    "face_average",
    "face_average_adjoint",
    "rt_evaluate",
    "InpaintTerm",
    "ForceBoxTerm",
    "L2Term",
    "L1Term",
    "SolverConfig",
    "SolverState",
    "Preconditioners",
    "ConvergenceReport",
    "SolverDivergence",
    "FieldMask",
    "wall_pins",
    "assemble_preconditioners",
    "init_state",
    "iterate",
    "residuals",
    "dual_violation",
    "solve",
    "discrete_energy",
    "normalized_objective",
    "alignment_residual",
    "diagnostics",
    "EnergyDiagnostics",
    "ParametricCurve",
    "curve_energy",
]
