"""Linear solves for critical unit fields in a prescribed winding class.

The critical-point equation is a fourth-order linear PDE for the periodic
part of the angle.  Its operator

    P h = flat_lap(e^{2u} flat_lap h) - flat_div(k_g^2 grad h)

(and the curved assembly, which is the pointwise multiple e^{2u} P) is
symmetric positive semidefinite with kernel exactly the constants, so the
solve runs preconditioned conjugate gradients on the mean-zero subspace.
The preconditioner inverts the constant-coefficient biharmonic in Fourier
space, which keeps iteration counts essentially grid-independent.

Two independent verification hooks live here as well: an inverse-iteration
bound for the smallest Rayleigh quotient of the weighted bilaplacian (the
operator whose kernel rigidity forces purely "vertical" critical fields to
be constant), and a gradient-descent oracle that minimizes the energy
directly and must land on the same field the linear solve produces.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from numpy.typing import NDArray

from .angles import AngleField, HomotopyClass, linear_representative
from .conformal import ConformalStructure, frame_connection
from .energy import EnergyBreakdown, bienergy, el_residual
from .lattice import (
    LatticeSpec,
    ScalarField,
    VectorFieldFlat,
    _laplacian_multiplier,
    flat_divergence,
    flat_gradient,
    flat_laplacian,
    rotate_J,
)

_FORMULATIONS = ("curved", "flat_weighted")
_PRECONDITIONERS = ("spectral_biharmonic", "none")

#: relative gradient reduction at which the descent oracle declares victory
_DESCENT_GRADIENT_REDUCTION = 1e-8


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted before the residual target was met."""

    def __init__(self, message: str, residual_history: list[float]):
        super().__init__(message)
        self.residual_history = residual_history


class CompatibilityError(ValueError):
    """Right-hand side has a nonzero mean against the solve's volume measure.

    The assembled right-hand side is always a divergence, so this cannot
    fire on well-formed inputs; it guards against hand-built systems.
    """


@dataclass(frozen=True)
class SolveOptions:
    tolerance: float = 1e-10
    max_iterations: int | None = None
    preconditioner: str = "spectral_biharmonic"
    formulation: str = "curved"

    def __post_init__(self) -> None:
        if not (0.0 < self.tolerance < 1.0):
            raise ValueError("tolerance must lie in (0, 1)")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.preconditioner not in _PRECONDITIONERS:
            raise ValueError(f"unknown preconditioner: {self.preconditioner!r}")
        if self.formulation not in _FORMULATIONS:
            raise ValueError(f"unknown formulation: {self.formulation!r}")

    def iteration_budget(self, lattice: LatticeSpec) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 10 * lattice.n1 * lattice.n2


class SolveReport(NamedTuple):
    iterations: int
    final_relative_residual: float
    energy: EnergyBreakdown
    el_residual_maxnorm: float
    wall_time: float
    homotopy_class: HomotopyClass


class RigidityCertificate(NamedTuple):
    smallest_rayleigh: float
    verdict: bool


class DescentResult(NamedTuple):
    angle: AngleField
    energy_trace: list[float]
    stalled: bool


def apply_operator_P(
    cs: ConformalStructure, h: ScalarField, formulation: str = "curved"
) -> ScalarField:
    """Apply the fourth-order operator of the critical-point equation to h.

    Both formulations are symmetric positive semidefinite in their natural
    inner products, with kernel the constants.
    """
    cs._check(h.lattice)
    if formulation == "flat_weighted":
        return flat_laplacian(cs.e2u * flat_laplacian(h)) - flat_divergence(
            cs.kg_sq * flat_gradient(h)
        )
    if formulation == "curved":
        return cs.laplacian(cs.laplacian(h)) - cs.divergence(cs.kg_sq * cs.gradient(h))
    raise ValueError(f"unknown formulation: {formulation!r}")


def right_hand_side(
    cs: ConformalStructure, homotopy: HomotopyClass, formulation: str = "curved"
) -> ScalarField:
    """Assemble the source term of the solve for the given winding class.

    Flat form: div(k_g^2 (Y0 - J grad u)) with Y0 the constant gradient of
    the linear representative.  Curved form: the same equation multiplied
    through by e^{2u}, assembled with the curved operators (its leading
    term is a Laplacian of an identically-vanishing divergence and is kept
    for faithfulness to the equation as written).
    """
    lattice = cs.lattice
    Y0 = linear_representative(homotopy, lattice).gradient
    shape = lattice.shape
    Y0_field = VectorFieldFlat.from_arrays(
        lattice, np.full(shape, Y0[0]), np.full(shape, Y0[1])
    )
    if formulation == "flat_weighted":
        vec = Y0_field - rotate_J(flat_gradient(cs.u))
        return flat_divergence(cs.kg_sq * vec)
    if formulation == "curved":
        YZ = cs.e2u * Y0_field + frame_connection(cs).Z
        return cs.laplacian(cs.divergence(YZ)) + cs.divergence(cs.kg_sq * YZ)
    raise ValueError(f"unknown formulation: {formulation!r}")


### Conjugate-gradient plumbing on raw arrays


class _Workspace(NamedTuple):
    """Closures binding one formulation's operator, metric, and projection."""

    apply: Callable[[NDArray], NDArray]
    inner: Callable[[NDArray, NDArray], float]
    project: Callable[[NDArray], NDArray]
    precondition: Callable[[NDArray], NDArray]


def _spectral_inverse_bilaplacian(cs: ConformalStructure) -> Callable[[NDArray], NDArray]:
    lap_m = _laplacian_multiplier(cs.lattice)
    cbar = float(np.mean(cs.e2u.values))
    with np.errstate(divide="ignore"):
        multiplier = np.where(lap_m == 0.0, 0.0, 1.0 / (cbar * lap_m * lap_m))

    def precondition(arr: NDArray) -> NDArray:
        return np.fft.ifft2(multiplier * np.fft.fft2(arr)).real

    return precondition


def _workspace(
    cs: ConformalStructure,
    formulation: str,
    preconditioner: str,
    apply_field: Callable[[ScalarField], ScalarField],
) -> _Workspace:
    lattice = cs.lattice
    cell = lattice.area / (lattice.n1 * lattice.n2)

    def apply(arr: NDArray) -> NDArray:
        return apply_field(ScalarField(lattice, arr)).values

    if preconditioner == "spectral_biharmonic":
        base = _spectral_inverse_bilaplacian(cs)
    else:
        base = lambda arr: arr.copy()

    if formulation == "flat_weighted":

        def inner(x: NDArray, y: NDArray) -> float:
            return float(np.sum(x * y)) * cell

        def project(arr: NDArray) -> NDArray:
            return arr - np.mean(arr)

        precondition = base
    else:
        weight = cs.em2u.values
        wsum = float(np.sum(weight))
        gain = cs.e2u.values

        def inner(x: NDArray, y: NDArray) -> float:
            return float(np.sum(x * y * weight)) * cell

        def project(arr: NDArray) -> NDArray:
            return arr - float(np.sum(arr * weight)) / wsum

        def precondition(arr: NDArray) -> NDArray:
            # symmetric against the weighted product: e^{2u} cancels the
            # volume weight, leaving the flat-symmetric spectral inverse
            return gain * base(arr)

    return _Workspace(apply=apply, inner=inner, project=project, precondition=precondition)


def _check_compatibility(b: NDArray, ws: _Workspace) -> None:
    ones = np.ones_like(b)
    measure = ws.inner(ones, ones)
    mean_against_measure = ws.inner(b, ones) / measure
    scale = max(float(np.max(np.abs(b))), np.finfo(float).tiny)
    # the absolute floor keeps a mathematically-zero source, represented
    # only by fourth-order spectral roundoff, from reading as incompatible:
    # a genuinely unsolvable source has a mean on the order of its data
    if abs(mean_against_measure) > max(1e-9 * scale, 1e-12):
        raise CompatibilityError(
            "right-hand side is not orthogonal to constants; the singular "
            "system has no solution"
        )


def _pcg(
    ws: _Workspace,
    b: NDArray,
    tolerance: float,
    max_iterations: int,
) -> tuple[NDArray, int, list[float]]:
    """Preconditioned conjugate gradients on the mean-zero subspace.

    Returns (solution, iterations, relative-residual history).  Raises
    ConvergenceError when the budget runs out.
    """
    b = ws.project(b)
    bnorm = np.sqrt(ws.inner(b, b))
    x = np.zeros_like(b)
    if bnorm == 0.0:
        return x, 0, [0.0]

    r = b.copy()
    z = ws.project(ws.precondition(r))
    d = z.copy()
    rz = ws.inner(r, z)
    history = [1.0]
    for iteration in range(1, max_iterations + 1):
        Ad = ws.apply(d)
        dAd = ws.inner(d, Ad)
        if dAd <= 0.0:
            raise ConvergenceError(
                "search direction lost positivity (operator not positive "
                "definite on the mean-zero subspace)",
                history,
            )
        step = rz / dAd
        x += step * d
        r -= step * Ad
        r = ws.project(r)
        rel = float(np.sqrt(ws.inner(r, r)) / bnorm)
        history.append(rel)
        if rel <= tolerance:
            return x, iteration, history
        z = ws.project(ws.precondition(r))
        rz_next = ws.inner(r, z)
        d = z + (rz_next / rz) * d
        rz = rz_next
    raise ConvergenceError(
        f"no convergence within {max_iterations} iterations "
        f"(last relative residual {history[-1]:.3e})",
        history,
    )


def solve_homotopy_class(
    cs: ConformalStructure,
    homotopy: HomotopyClass,
    opts: SolveOptions | None = None,
) -> tuple[AngleField, SolveReport]:
    """Solve for the critical angle field in the given winding class.

    Returns the angle field (winding class plus mean-zero periodic part)
    and a report with iteration counts, the final relative residual, the
    energy breakdown, the max-norm of the critical-point residual, and the
    wall time.
    """
    opts = opts or SolveOptions()
    lattice = cs.lattice
    started = time.perf_counter()

    # a constant exponent is flat in disguise: the linear representative is
    # already critical and the right-hand side vanishes identically
    if np.ptp(cs.u.values) == 0.0:
        alpha = ScalarField.from_constant(lattice, 0.0)
        theta = AngleField(homotopy, alpha)
        report = SolveReport(
            iterations=0,
            final_relative_residual=0.0,
            energy=bienergy(cs, theta),
            el_residual_maxnorm=el_residual(cs, theta, opts.formulation).max_abs(),
            wall_time=time.perf_counter() - started,
            homotopy_class=homotopy,
        )
        return theta, report

    # The source can vanish identically even on a curved structure: when the
    # squared curvature is a pointwise function of u (any single-eigenvalue
    # exponent does this), the trivial class's transport term is a Jacobian
    # of functionally dependent fields.  The assembly then holds nothing but
    # its own spectral roundoff, and iterating on noise against noise stalls.
    # Two independent assemblies of a genuine source agree to ~1e-12
    # relative (measured; the routes share only pointwise inputs), so total
    # disagreement identifies a zero source without any absolute threshold —
    # and for a zero source the representative itself is the exact solution.
    flat_b = right_hand_side(cs, homotopy, "flat_weighted")
    curved_b = right_hand_side(cs, homotopy, "curved")
    flat_scale = flat_b.max_abs()
    disagreement = (flat_b - cs.em2u * curved_b).max_abs()
    if flat_scale == 0.0 or disagreement >= 1e-6 * flat_scale:
        alpha = ScalarField.from_constant(lattice, 0.0)
        theta = AngleField(homotopy, alpha)
        report = SolveReport(
            iterations=0,
            final_relative_residual=0.0,
            energy=bienergy(cs, theta),
            el_residual_maxnorm=el_residual(cs, theta, opts.formulation).max_abs(),
            wall_time=time.perf_counter() - started,
            homotopy_class=homotopy,
        )
        return theta, report

    ws = _workspace(
        cs,
        opts.formulation,
        opts.preconditioner,
        lambda h: apply_operator_P(cs, h, opts.formulation),
    )
    b = (flat_b if opts.formulation == "flat_weighted" else curved_b).values
    _check_compatibility(b, ws)

    x, iterations, history = _pcg(ws, b, opts.tolerance, opts.iteration_budget(lattice))

    # normalize to flat mean zero regardless of formulation, so solutions
    # from the two assemblies are directly comparable
    alpha = ScalarField(lattice, x - np.mean(x))
    theta = AngleField(homotopy, alpha)
    report = SolveReport(
        iterations=iterations,
        final_relative_residual=history[-1],
        energy=bienergy(cs, theta),
        el_residual_maxnorm=el_residual(cs, theta, opts.formulation).max_abs(),
        wall_time=time.perf_counter() - started,
        homotopy_class=homotopy,
    )
    return theta, report


def section_rigidity_check(
    cs: ConformalStructure,
    seed: int = 0,
    outer_iterations: int = 30,
    inner_tolerance: float = 1e-9,
) -> RigidityCertificate:
    """Estimate the smallest mean-zero Rayleigh quotient of the weighted
    bilaplacian h -> flat_lap(e^{2u} flat_lap h) by inverse iteration.

    A strictly positive quotient certifies that the only periodic angle
    functions annihilated by the operator are constants, i.e. the purely
    vertical critical fields are rigid.  The verdict compares the quotient
    against the flat lattice's smallest nonzero eigenvalue with a 1e-6
    safety margin.
    """
    lattice = cs.lattice

    def apply_field(h: ScalarField) -> ScalarField:
        return flat_laplacian(cs.e2u * flat_laplacian(h))

    ws = _workspace(cs, "flat_weighted", "spectral_biharmonic", apply_field)

    # start inside the operator's resolvable subspace: modes the derivative
    # multipliers annihilate (the mean and the unpaired highest frequencies)
    # are invisible to the operator and would leave the inner solves chasing
    # an inconsistent component forever
    lap_m = _laplacian_multiplier(lattice)
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(lattice.shape)
    x = np.fft.ifft2(np.where(lap_m != 0.0, np.fft.fft2(raw), 0.0)).real
    x = ws.project(x)
    x /= np.sqrt(ws.inner(x, x))

    budget = 10 * lattice.n1 * lattice.n2
    rayleigh = float(ws.inner(x, ws.apply(x)))
    for _ in range(outer_iterations):
        y, _, _ = _pcg(ws, x, inner_tolerance, budget)
        y = ws.project(y)
        y /= np.sqrt(ws.inner(y, y))
        updated = float(ws.inner(y, ws.apply(y)))
        x = y
        if abs(updated - rayleigh) <= 1e-9 * max(abs(updated), 1e-300):
            rayleigh = updated
            break
        rayleigh = updated

    nonzero = lap_m[lap_m != 0.0]
    flat_reference = float(np.min(nonzero * nonzero))
    verdict = rayleigh >= 1e-6 * flat_reference
    return RigidityCertificate(smallest_rayleigh=rayleigh, verdict=verdict)


def descent_oracle(
    cs: ConformalStructure,
    homotopy: HomotopyClass,
    steps: int = 500,
    step_rule: str = "preconditioned",
) -> DescentResult:
    """Minimize the energy over the periodic part by line-searched descent.

    An independent check on the linear solver: no operator equation is
    formed; each step moves against the energy gradient (twice the
    critical-point residual) with an exact-minimizing step along the
    direction, guarded by halving if roundoff ever breaks monotonicity.

    ``step_rule`` selects the descent direction: ``"preconditioned"``
    applies the spectral inverse-bilaplacian to the gradient (the gradient
    in the inner product in which the operator is best conditioned, making
    convergence grid-independent); ``"plain"`` uses the raw gradient, which
    converges too slowly for production use but exercises the textbook
    iteration.

    Returns the final angle field, the energy trace (nonincreasing), and a
    flag set when the line search stalls before the gradient target.
    """
    if step_rule not in ("preconditioned", "plain"):
        raise ValueError(f"unknown step_rule: {step_rule!r}")
    lattice = cs.lattice
    precondition = (
        _spectral_inverse_bilaplacian(cs)
        if step_rule == "preconditioned"
        else (lambda arr: arr - np.mean(arr))
    )
    cell = lattice.area / (lattice.n1 * lattice.n2)

    def inner(x: NDArray, y: NDArray) -> float:
        return float(np.sum(x * y)) * cell

    alpha = np.zeros(lattice.shape)
    theta = AngleField(homotopy, ScalarField(lattice, alpha))
    energy = bienergy(cs, theta).bienergy
    trace = [energy]
    stalled = False
    reference_slope: float | None = None

    for _ in range(steps):
        gradient = 2.0 * el_residual(cs, theta, "flat_weighted").values
        direction = -precondition(gradient)
        slope = inner(gradient, direction)  # negative along a descent direction
        if reference_slope is None:
            reference_slope = abs(slope)
            if reference_slope == 0.0:
                break
        if abs(slope) <= _DESCENT_GRADIENT_REDUCTION**2 * reference_slope:
            break

        curvature = inner(
            apply_operator_P(cs, ScalarField(lattice, direction), "flat_weighted").values,
            direction,
        )
        step = -slope / (2.0 * curvature) if curvature > 0.0 else 1.0
        for _halving in range(40):
            candidate = alpha + step * direction
            candidate_theta = AngleField(homotopy, ScalarField(lattice, candidate))
            candidate_energy = bienergy(cs, candidate_theta).bienergy
            if candidate_energy <= energy:
                break
            step *= 0.5
        else:
            stalled = True
            break
        alpha, theta, energy = candidate, candidate_theta, candidate_energy
        trace.append(energy)

    final = AngleField(homotopy, ScalarField(lattice, alpha - np.mean(alpha)))
    return DescentResult(angle=final, energy_trace=trace, stalled=stalled)
