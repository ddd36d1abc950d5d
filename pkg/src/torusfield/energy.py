"""Bending-type energy functionals for unit tangent fields on conformal tori.

For a unit field described by an angle function ``theta`` (a linear winding
part plus a periodic part), the functional evaluated here is

    G(theta) = ∫ (lap_g theta - div_g Z)^2 dA_g
             + ∫ k_g^2 * |grad_g theta + Z|_g^2 dA_g,

the "vertical" and "horizontal" pieces of the second-order energy of the
associated unit section.  On a conformally flat torus every curved factor
collapses against the volume weight, so the production evaluation uses the
equivalent flat quadratures

    vertical   = ∫ e^{2u} (flat_lap alpha)^2 dxi,
    horizontal = ∫ k_g^2 |grad theta_total - J grad u|^2 dxi,

which involve one spectral multiplier apiece instead of chained
divergence/gradient compositions.  The geometric route survives in the test
suite as an independent oracle.

The overall normalization is fixed by the plain flat quadrature measure.
Any alternative convention rescales every energy by one global positive
constant, which moves no critical point, no residual zero set, and no
stability sign.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np

from .angles import AngleField
from .conformal import RESOLUTION_THRESHOLD, ConformalStructure, ResolutionWarning, frame_connection
from .lattice import (
    ScalarField,
    VectorFieldFlat,
    dot,
    flat_divergence,
    flat_gradient,
    flat_laplacian,
    integrate_inner,
    resolution_fraction,
    rotate_J,
)


class EnergyBreakdown(NamedTuple):
    """Split of the second-order energy into its named nonnegative parts.

    ``bienergy`` is always the sum of ``vertical_bienergy`` and
    ``horizontal_part``.  ``total_bending`` is the first-order bending
    energy (half the squared covariant derivative of the unit field) and is
    reported for cross-referencing only; it does not enter the sum.
    ``area`` is the curved surface area.
    """

    bienergy: float
    vertical_bienergy: float
    horizontal_part: float
    total_bending: float
    area: float


class DerivativePair(NamedTuple):
    analytic: float
    numeric: float


def _bending_vector(cs: ConformalStructure, theta: AngleField) -> VectorFieldFlat:
    """Flat components of the first-order term: grad theta_total - J grad u."""
    return theta.total_gradient() - rotate_J(flat_gradient(cs.u))


def bienergy(cs: ConformalStructure, theta: AngleField) -> EnergyBreakdown:
    """Evaluate the second-order energy of the unit field with angle ``theta``.

    Args:
        cs: Conformal structure supplying the metric exponent and curvature.
        theta: Angle field (winding class plus periodic part) on the same
            lattice.

    Returns:
        EnergyBreakdown with the vertical/horizontal split, the first-order
        bending energy, and the curved area.
    """
    cs._check(theta.lattice)
    if resolution_fraction(theta.periodic) > RESOLUTION_THRESHOLD:
        warnings.warn(
            "angle field is spectrally under-resolved; energies are unreliable",
            ResolutionWarning,
            stacklevel=2,
        )

    lap_alpha = flat_laplacian(theta.periodic)
    vertical = integrate_inner(lap_alpha, lap_alpha, weight=cs.e2u)

    bend = _bending_vector(cs, theta)
    density = dot(bend, bend)
    horizontal = integrate_inner(density, cs.kg_sq)
    total_bending = 0.5 * integrate_inner(density)

    return EnergyBreakdown(
        bienergy=vertical + horizontal,
        vertical_bienergy=vertical,
        horizontal_part=horizontal,
        total_bending=total_bending,
        area=cs.area(),
    )


def el_residual(
    cs: ConformalStructure, theta: AngleField, formulation: str = "curved"
) -> ScalarField:
    """Residual of the fourth-order critical-point equation at ``theta``.

    A zero of this residual (in either formulation) is a critical point of
    :func:`bienergy` within the winding class of ``theta``.

    Args:
        cs: Conformal structure.
        theta: Angle field on the same lattice.
        formulation: ``"curved"`` assembles the equation with the
            volume-weighted operators of ``cs`` and relates to the flat form
            by the pointwise factor ``exp(2u)``; ``"flat_weighted"``
            assembles it with flat spectral operators acting on the periodic
            part and the total gradient.

    Returns:
        The residual as a scalar field.  Both formulations integrate to
        zero against their respective volume measures.
    """
    cs._check(theta.lattice)
    if formulation == "flat_weighted":
        lap_alpha = flat_laplacian(theta.periodic)
        fourth = flat_laplacian(cs.e2u * lap_alpha)
        transport = flat_divergence(cs.kg_sq * theta.total_gradient())
        twist = flat_divergence(cs.kg_sq * rotate_J(flat_gradient(cs.u)))
        return fourth - transport + twist
    if formulation == "curved":
        Z = frame_connection(cs).Z
        grad_theta = cs.e2u * theta.total_gradient()
        lap_theta = -cs.divergence(grad_theta)
        fourth = cs.laplacian(lap_theta)
        transport = cs.divergence(cs.kg_sq * grad_theta)
        frame_fourth = cs.laplacian(cs.divergence(Z))
        frame_transport = cs.divergence(cs.kg_sq * Z)
        return fourth - transport - frame_fourth - frame_transport
    raise ValueError(f"unknown formulation: {formulation!r}")


def directional_derivative_check(
    cs: ConformalStructure, theta: AngleField, beta: ScalarField, h: float = 1e-4
) -> DerivativePair:
    """Compare the analytic first variation of the energy with a finite
    difference along a class-preserving variation.

    The analytic value pairs ``beta`` with the curved residual against the
    curved volume measure.  The numeric value is a central difference of
    :func:`bienergy` along the path ``t -> theta + sin(t) * beta``.  A
    straight-line path is useless here: the discretized functional is
    exactly quadratic along straight lines, so the central difference would
    be exact to roundoff and carry no h^2 term for a convergence check to
    observe.  The sinusoidal path has the same velocity at t = 0 but a
    curved parameterization, so the difference of the two values shrinks
    like h^2/6 times the first derivative, which halving h quarters.

    Args:
        cs: Conformal structure.
        theta: Base angle field.
        beta: Periodic variation direction (a plain scalar field).
        h: Parameter step for the central difference.

    Returns:
        DerivativePair(analytic, numeric).
    """
    cs._check(theta.lattice)
    cs._check(beta.lattice)
    residual = el_residual(cs, theta, formulation="curved")
    analytic = 2.0 * cs.integrate(beta, residual)

    step = float(np.sin(h))
    plus = bienergy(cs, theta.shifted(beta * step)).bienergy
    minus = bienergy(cs, theta.shifted(beta * (-step))).bienergy
    numeric = (plus - minus) / (2.0 * h)
    return DerivativePair(analytic=analytic, numeric=numeric)
