"""Second variation of the energy at critical unit fields.

The Hessian of the energy in a fixed winding class is an explicit sum of
two squares, so critical fields can never be strict saddle points.  This
module evaluates that quadratic form and verifies it against symmetric
second differences of the energy along class-preserving variations.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .angles import AngleField
from .conformal import ConformalStructure
from .energy import bienergy, el_residual
from .lattice import ScalarField, dot, flat_gradient, flat_laplacian, integrate_inner
from .solver import right_hand_side

#: max-norm level (relative to the source term) above which a field is
#: rejected as a base point for second-difference checks
_CRITICALITY_THRESHOLD = 1e-6


class NotCriticalError(ValueError):
    """The base field is not a critical point, so a second difference of the
    energy would mix in first-order terms and measure nothing useful."""


class HessianSample(NamedTuple):
    beta: ScalarField
    quadratic_value: float
    second_difference: float
    gap: float


def hessian_form(cs: ConformalStructure, beta: ScalarField) -> float:
    """Quadratic form of the second variation along the periodic direction
    ``beta``.

    The value is a sum of two nonnegative quadratures and vanishes exactly
    when ``beta`` is constant (on metrics whose curvature does not vanish
    on open sets; where it does, only the fourth-order term constrains
    ``beta``).
    """
    cs._check(beta.lattice)
    lap = flat_laplacian(beta)
    vertical = 2.0 * integrate_inner(lap, lap, weight=cs.e2u)
    grad = flat_gradient(beta)
    horizontal = 2.0 * integrate_inner(dot(grad, grad), cs.kg_sq)
    return vertical + horizontal


def hessian_vs_energy_check(
    cs: ConformalStructure,
    theta_star: AngleField,
    beta: ScalarField,
    h: float = 1e-3,
) -> HessianSample:
    """Compare :func:`hessian_form` against a symmetric second difference of
    the energy at a critical field.

    The difference runs along the path ``t -> theta_star + sin(t) * beta``
    (see :func:`torusfield.energy.directional_derivative_check` for why a
    straight line would make the convergence contract vacuous), giving
    ``gap = quadratic_value * h^2 / 3`` up to higher order: halving ``h``
    quarters the gap.

    Raises:
        NotCriticalError: when ``theta_star`` does not satisfy the
            critical-point equation to within 1e-6 of the source scale.
    """
    cs._check(theta_star.lattice)
    cs._check(beta.lattice)

    residual = el_residual(cs, theta_star, formulation="curved")
    scale = max(1.0, right_hand_side(cs, theta_star.homotopy, "curved").max_abs())
    if residual.max_abs() > _CRITICALITY_THRESHOLD * scale:
        raise NotCriticalError(
            "base field does not satisfy the critical-point equation "
            f"(residual {residual.max_abs():.3e} against scale {scale:.3e})"
        )

    quadratic = hessian_form(cs, beta)
    step = float(np.sin(h))
    base = bienergy(cs, theta_star).bienergy
    plus = bienergy(cs, theta_star.shifted(beta * step)).bienergy
    minus = bienergy(cs, theta_star.shifted(beta * (-step))).bienergy
    second_difference = (plus - 2.0 * base + minus) / (h * h)
    return HessianSample(
        beta=beta,
        quadratic_value=quadratic,
        second_difference=second_difference,
        gap=abs(quadratic - second_difference),
    )
