"""Conformally flat torus metrics: curvature, curved calculus, frames.

The torus metric is specified through one periodic function, the conformal
exponent ``u``: the metric of interest is

    ``g = exp(-2u) * (flat metric)``,

equivalently ``exp(2u) * g`` is flat.  Every smooth torus metric arises
this way after uniformization, so ``u`` is the complete input.

Conventions (each pinned by an oracle in the test suite, since the
curvature sign and conformal-factor placement are the classic foot-guns):

* Gaussian curvature: ``k_g = exp(2u) * (d1^2 + d2^2) u``, i.e.
  ``-exp(2u) * flat_laplacian(u)`` with the geometer Laplacian.  Its
  integral against the curved area element vanishes (the torus has zero
  Euler characteristic) — asserted as an invariant.
* Curved gradient: ``grad_g f = exp(2u) * flat_grad f`` (index raised
  with ``g``).
* Curved divergence: ``div_g X = exp(2u) * flat_div(exp(-2u) X)``
  (volume-weighted; makes ``-div_g`` the exact adjoint of ``grad_g``).
* Curved Laplacian: ``lap_g = -div_g grad_g``, built by composition; the
  two-dimensional identity ``lap_g f = exp(2u) * flat_lap f`` is a test,
  not the implementation.
* Norms and measure: ``|X|_g^2 = exp(-2u) * |X|^2`` pointwise for flat
  components, and the curved area element is ``exp(-2u) dxi``.

The canonical orthonormal frame is ``S = exp(u) * (first flat axis)``,
``W = J S``.  Its connection coefficients — the functions ``a, b`` with
``nabla_S S = a W`` and ``nabla_W S = b W`` — come out as
``a = exp(u) d2(u)``, ``b = -exp(u) d1(u)``, so the frame vector
``Z = a S + b W`` has flat components ``-exp(2u) J flat_grad(u)``,
i.e. ``Z = -J grad_g u``.  ``div_g Z`` vanishes identically (it is still
computed numerically wherever a formula calls for it).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from torusfield.angles import AngleField
from torusfield.lattice import (
    LatticeSpec,
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

RESOLUTION_THRESHOLD = 1e-8


class ResolutionWarning(UserWarning):
    """The conformal exponent carries noticeable energy near the Nyquist modes."""


def _warn_if_unresolved(u: ScalarField, label: str) -> None:
    fraction = resolution_fraction(u)
    if fraction > RESOLUTION_THRESHOLD:
        warnings.warn(
            f"{label} has {fraction:.2e} of its spectral energy in the top third "
            "of frequencies; derived curvatures may be inaccurate — refine the grid",
            ResolutionWarning,
            stacklevel=3,
        )


def gaussian_curvature(u: ScalarField) -> ScalarField:
    """Gaussian curvature of ``g = exp(-2u) * flat``.

    ``k_g = exp(2u)(d1^2 + d2^2)u``; sign and factor pinned by the
    finite-difference metric-curvature oracle and Gauss–Bonnet.
    """
    _warn_if_unresolved(u, "conformal exponent")
    return ScalarField(
        u.lattice, -np.exp(2.0 * u.values) * flat_laplacian(u).values
    )


@dataclass(frozen=True, eq=False)
class ConformalStructure:
    """A torus metric ``exp(-2u) * flat`` with its derived curved calculus."""

    u: ScalarField

    @classmethod
    def from_exponent(cls, u: ScalarField) -> "ConformalStructure":
        _warn_if_unresolved(u, "conformal exponent")
        return cls(u)

    @property
    def lattice(self) -> LatticeSpec:
        return self.u.lattice

    @cached_property
    def e2u(self) -> ScalarField:
        return ScalarField(self.lattice, np.exp(2.0 * self.u.values))

    @cached_property
    def em2u(self) -> ScalarField:
        return ScalarField(self.lattice, np.exp(-2.0 * self.u.values))

    @cached_property
    def eu(self) -> ScalarField:
        return ScalarField(self.lattice, np.exp(self.u.values))

    @cached_property
    def kg(self) -> ScalarField:
        return ScalarField(self.lattice, -self.e2u.values * flat_laplacian(self.u).values)

    @cached_property
    def kg_sq(self) -> ScalarField:
        return self.kg * self.kg

    # -- curved calculus ----------------------------------------------------------

    def gradient(self, f: ScalarField) -> VectorFieldFlat:
        """``grad_g f`` in flat components: ``exp(2u) * flat gradient``."""
        self._check(f.lattice)
        return self.e2u * flat_gradient(f)

    def divergence(self, X: VectorFieldFlat) -> ScalarField:
        """Volume-weighted divergence ``exp(2u) flat_div(exp(-2u) X)``."""
        self._check(X.lattice)
        return self.e2u * flat_divergence(self.em2u * X)

    def laplacian(self, f: ScalarField) -> ScalarField:
        """Geometer Laplacian ``-div_g grad_g f`` (composition, not shortcut)."""
        return -self.divergence(self.gradient(f))

    def norm_sq(self, X: VectorFieldFlat) -> ScalarField:
        """Pointwise ``|X|_g^2`` of flat components."""
        self._check(X.lattice)
        return self.em2u * dot(X, X)

    def integrate(self, f: ScalarField, g: ScalarField | None = None) -> float:
        """Quadrature against the curved area element ``exp(-2u) dxi``."""
        return integrate_inner(f, g, weight=self.em2u)

    def area(self) -> float:
        """Curved area of the torus."""
        return integrate_inner(self.em2u)

    def _check(self, lattice: LatticeSpec) -> None:
        if lattice != self.lattice:
            raise ValueError("lattice mismatch")


@dataclass(frozen=True, eq=False)
class FrameConnection:
    """Connection data of the canonical frame: coefficients and ``Z = aS + bW``."""

    a: ScalarField
    b: ScalarField
    Z: VectorFieldFlat


def frame_connection(cs: ConformalStructure) -> FrameConnection:
    """Connection coefficients of the canonical frame ``S = exp(u)*axis1, W = JS``.

    Computed from the conformal change-of-connection formula applied to the
    frame: ``a = exp(u) d2(u)``, ``b = -exp(u) d1(u)``; the combined vector
    ``Z`` has flat components ``-exp(2u) * J flat_grad(u)`` and equals
    ``-J grad_g u``.
    """
    du = flat_gradient(cs.u)
    a = cs.eu * du.comp2
    b = -(cs.eu * du.comp1)
    Z = -rotate_J(cs.gradient(cs.u))
    return FrameConnection(a, b, Z)


class ResidualPair(NamedTuple):
    flat: VectorFieldFlat
    curved: VectorFieldFlat


def section_residual_pair(cs: ConformalStructure, theta: AngleField) -> ResidualPair:
    """Tangential rough-Laplacian residuals of the unit field of ``theta``.

    The *flat* residual is for the flat-unit field ``(cos theta, sin theta)``
    in the flat metric: the vector Laplacian assembled from ``lap(theta)``
    and ``|grad theta|^2`` (the branch-free expansion of componentwise
    Laplacians of ``cos theta, sin theta``), minus its radial part —
    projected numerically, not by formula.

    The *curved* residual is the same quantity for the ``g``-unit field
    ``exp(u) * (cos theta, sin theta)`` in the curved metric, assembled from
    the curved Laplacian of the angle and the frame divergence ``div_g Z``.

    The two satisfy ``flat = exp(-3u) * curved`` pointwise — that identity
    is a property test, not an implementation shortcut.
    """
    cs._check(theta.lattice)
    total = theta.total_samples()
    cos_t, sin_t = np.cos(total), np.sin(total)
    lattice = cs.lattice

    # Flat side: vector Laplacian of (cos, sin) via the angle expansion.
    lap_theta = flat_laplacian(theta.periodic).values
    grad_total = theta.total_gradient()
    grad_sq = dot(grad_total, grad_total).values
    lap_V1 = -sin_t * lap_theta + cos_t * grad_sq
    lap_V2 = cos_t * lap_theta + sin_t * grad_sq
    radial = lap_V1 * cos_t + lap_V2 * sin_t
    flat_res = VectorFieldFlat.from_arrays(
        lattice, lap_V1 - radial * cos_t, lap_V2 - radial * sin_t
    )

    # Curved side: tangential part is (lap_g theta - div_g Z) times the
    # rotated curved-unit field, all operators the curved ones.
    curved_grad_theta = cs.e2u * grad_total
    lap_g_theta = -cs.divergence(curved_grad_theta)
    conn = frame_connection(cs)
    div_Z = cs.divergence(conn.Z)
    factor = (lap_g_theta - div_Z).values * cs.eu.values
    curved_res = VectorFieldFlat.from_arrays(
        lattice, factor * (-sin_t), factor * cos_t
    )
    return ResidualPair(flat_res, curved_res)
