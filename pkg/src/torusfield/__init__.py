"""Biharmonic unit vector fields on conformally flat 2-tori.

The package solves the fourth-order critical-point equation for unit
vector fields minimizing the bienergy on a torus, one homotopy class at a
time, using spectral calculus on the covering lattice; verifies the
rigidity and stability properties of the critical fields; and classifies
left-invariant critical unit fields on three model Lie groups.
"""

from torusfield.angles import (
    AngleField,
    HomotopyClass,
    LinearRepresentative,
    angle_to_unit_field,
    linear_representative,
    winding_class,
)
from torusfield.conformal import (
    ConformalStructure,
    FrameConnection,
    ResidualPair,
    ResolutionWarning,
    frame_connection,
    gaussian_curvature,
    section_residual_pair,
)
from torusfield.energy import (
    DerivativePair,
    EnergyBreakdown,
    bienergy,
    directional_derivative_check,
    el_residual,
)
from torusfield.io import RunConfig, parse_exponent, read_field_csv, realize, write_outputs
from torusfield.lattice import (
    LatticeSpec,
    ScalarField,
    VectorFieldFlat,
    bandlimited_field,
    dot,
    flat_divergence,
    flat_gradient,
    flat_laplacian,
    integrate_inner,
    resolution_fraction,
    rotate_J,
    spectral_derivative,
)
from torusfield.liegroups import (
    ComparisonReport,
    CriticalComponent,
    CriticalSet,
    LeftInvariantModel,
    classify,
    compare_known,
    critical_system_residual,
    hyperbolic,
    model_laplacian,
    sol3,
    su2,
)
from torusfield.solver import (
    CompatibilityError,
    ConvergenceError,
    DescentResult,
    RigidityCertificate,
    SolveOptions,
    SolveReport,
    apply_operator_P,
    descent_oracle,
    right_hand_side,
    section_rigidity_check,
    solve_homotopy_class,
)
from torusfield.stability import (
    HessianSample,
    NotCriticalError,
    hessian_form,
    hessian_vs_energy_check,
)

__all__ = [
    "AngleField",
    "ComparisonReport",
    "CompatibilityError",
    "ConformalStructure",
    "ConvergenceError",
    "CriticalComponent",
    "CriticalSet",
    "DerivativePair",
    "DescentResult",
    "EnergyBreakdown",
    "FrameConnection",
    "HessianSample",
    "HomotopyClass",
    "LatticeSpec",
    "LeftInvariantModel",
    "LinearRepresentative",
    "NotCriticalError",
    "ResidualPair",
    "ResolutionWarning",
    "RigidityCertificate",
    "RunConfig",
    "ScalarField",
    "SolveOptions",
    "SolveReport",
    "VectorFieldFlat",
    "angle_to_unit_field",
    "apply_operator_P",
    "bandlimited_field",
    "bienergy",
    "classify",
    "compare_known",
    "critical_system_residual",
    "descent_oracle",
    "directional_derivative_check",
    "dot",
    "el_residual",
    "flat_divergence",
    "flat_gradient",
    "flat_laplacian",
    "frame_connection",
    "gaussian_curvature",
    "hessian_form",
    "hessian_vs_energy_check",
    "hyperbolic",
    "integrate_inner",
    "linear_representative",
    "model_laplacian",
    "parse_exponent",
    "read_field_csv",
    "realize",
    "resolution_fraction",
    "right_hand_side",
    "rotate_J",
    "section_residual_pair",
    "section_rigidity_check",
    "sol3",
    "solve_homotopy_class",
    "spectral_derivative",
    "su2",
    "winding_class",
    "write_outputs",
]

__version__ = "0.1.0"
