"""Solver: operator properties, solves per winding class, rigidity, descent.

The linear solve is cross-checked against closed-form flat cases, against
an energy-descent minimizer that never forms the operator equation, and
across its two assemblies of the same PDE.
"""

from __future__ import annotations

import numpy as np
import pytest

from torusfield.angles import AngleField, HomotopyClass, angle_to_unit_field, winding_class
from torusfield.conformal import ConformalStructure
from torusfield.energy import bienergy, directional_derivative_check
from torusfield.lattice import (
    LatticeSpec,
    ScalarField,
    bandlimited_field,
    flat_laplacian,
    integrate_inner,
)
from torusfield.solver import (
    CompatibilityError,
    ConvergenceError,
    DescentResult,
    SolveOptions,
    SolveReport,
    _check_compatibility,
    _workspace,
    apply_operator_P,
    descent_oracle,
    right_hand_side,
    section_rigidity_check,
    solve_homotopy_class,
)

TWO_PI = 2.0 * np.pi
FOURTH_POWER_OF_2PI = 1558.5454565440389  # (2*pi)**4


def structure_from(lattice: LatticeSpec, fn) -> ConformalStructure:
    return ConformalStructure.from_exponent(ScalarField.from_function(lattice, fn))


def random_structure(lattice: LatticeSpec, seed: int) -> ConformalStructure:
    rng = np.random.default_rng(seed)
    return ConformalStructure.from_exponent(bandlimited_field(lattice, rng, band=3, amplitude=0.3))


@pytest.fixture
def flat64() -> ConformalStructure:
    lattice = LatticeSpec.unit_square(64)
    return ConformalStructure.from_exponent(ScalarField.from_constant(lattice, 0.0))


@pytest.fixture
def wavy64() -> ConformalStructure:
    return structure_from(LatticeSpec.unit_square(64), lambda x, y: 0.2 * np.sin(TWO_PI * x))


### Options validation

def test_options_validate_ranges():
    with pytest.raises(ValueError, match="tolerance"):
        SolveOptions(tolerance=0.0)
    with pytest.raises(ValueError, match="tolerance"):
        SolveOptions(tolerance=1.5)
    with pytest.raises(ValueError, match="max_iterations"):
        SolveOptions(max_iterations=0)
    with pytest.raises(ValueError, match="preconditioner"):
        SolveOptions(preconditioner="ilu")
    with pytest.raises(ValueError, match="formulation"):
        SolveOptions(formulation="weak")


### Operator properties

def test_operator_kills_constants(wavy64):
    const = ScalarField.from_constant(wavy64.lattice, 3.7)
    assert apply_operator_P(wavy64, const, "flat_weighted").max_abs() <= 1e-12
    assert apply_operator_P(wavy64, const, "curved").max_abs() <= 1e-10


def test_operator_is_biharmonic_on_flat_square(flat64):
    lam1, _ = flat64.lattice.fractional_coords
    h = ScalarField(flat64.lattice, np.sin(TWO_PI * lam1))
    for formulation in ("curved", "flat_weighted"):
        out = apply_operator_P(flat64, h, formulation)
        expected = FOURTH_POWER_OF_2PI * h.values
        # noise floor: spectral roundoff amplified by |k|^4 at the highest
        # resolved mode, ~(pi*n)^4 * eps ~ 2e-7 at n=64
        assert np.max(np.abs(out.values - expected)) <= 1e-9 * FOURTH_POWER_OF_2PI


@pytest.mark.parametrize("seed", range(10))
def test_operator_symmetry(seed):
    lattice = LatticeSpec.unit_square(64)
    cs = random_structure(lattice, seed)
    rng = np.random.default_rng(seed + 1000)
    h1 = bandlimited_field(lattice, rng, band=5)
    h2 = bandlimited_field(lattice, rng, band=5)

    flat_lhs = integrate_inner(apply_operator_P(cs, h1, "flat_weighted"), h2)
    flat_rhs = integrate_inner(h1, apply_operator_P(cs, h2, "flat_weighted"))
    assert abs(flat_lhs - flat_rhs) <= 1e-9 * max(abs(flat_lhs), abs(flat_rhs))

    curved_lhs = cs.integrate(apply_operator_P(cs, h1, "curved"), h2)
    curved_rhs = cs.integrate(h1, apply_operator_P(cs, h2, "curved"))
    assert abs(curved_lhs - curved_rhs) <= 1e-9 * max(abs(curved_lhs), abs(curved_rhs))


def test_operator_positive_semidefinite_with_constant_kernel():
    lattice = LatticeSpec.unit_square(64)
    cs = random_structure(lattice, 77)
    rng = np.random.default_rng(78)
    for _ in range(50):
        h = bandlimited_field(lattice, rng, band=5)
        quad = integrate_inner(apply_operator_P(cs, h, "flat_weighted"), h)
        assert quad > 0.0
    const = ScalarField.from_constant(lattice, 1.3)
    quad = integrate_inner(apply_operator_P(cs, const, "flat_weighted"), const)
    assert abs(quad) <= 1e-10


def test_operator_formulations_differ_by_conformal_factor():
    lattice = LatticeSpec.unit_square(64)
    cs = random_structure(lattice, 80)
    rng = np.random.default_rng(81)
    h = bandlimited_field(lattice, rng, band=4)
    curved = apply_operator_P(cs, h, "curved")
    flat = apply_operator_P(cs, h, "flat_weighted")
    scale = max(1.0, curved.max_abs())
    assert (curved - cs.e2u * flat).max_abs() <= 1e-8 * scale


def test_operator_rejects_unknown_formulation(flat64):
    h = ScalarField.from_constant(flat64.lattice, 0.0)
    with pytest.raises(ValueError, match="formulation"):
        apply_operator_P(flat64, h, "weak")


### Solving

def test_flat_metric_solves_to_linear_representative(flat64):
    theta, report = solve_homotopy_class(flat64, HomotopyClass(2, -1))
    assert theta.periodic.max_abs() == 0.0
    assert report.iterations == 0
    assert report.final_relative_residual == 0.0
    assert report.energy.bienergy == 0.0
    assert report.homotopy_class == HomotopyClass(2, -1)


def test_constant_exponent_is_treated_as_flat():
    lattice = LatticeSpec.unit_square(32)
    cs = ConformalStructure.from_exponent(ScalarField.from_constant(lattice, 0.4))
    theta, report = solve_homotopy_class(cs, HomotopyClass(1, 0))
    assert theta.periodic.max_abs() == 0.0
    assert report.iterations == 0


def test_solve_converges_and_beats_linear_representative(wavy64):
    cls = HomotopyClass(1, 0)
    theta, report = solve_homotopy_class(wavy64, cls)
    assert report.final_relative_residual <= 1e-10
    assert report.iterations > 0
    assert report.wall_time >= 0.0
    linear = AngleField(cls, ScalarField.from_constant(wavy64.lattice, 0.0))
    assert report.energy.bienergy <= bienergy(wavy64, linear).bienergy
    assert theta.periodic.mean() == pytest.approx(0.0, abs=1e-14)


def test_solved_residual_is_small_in_scaled_maxnorm(wavy64):
    opts = SolveOptions(tolerance=1e-10, formulation="curved")
    _, report = solve_homotopy_class(wavy64, HomotopyClass(1, 0), opts)
    rhs_scale = right_hand_side(wavy64, HomotopyClass(1, 0), "curved").max_abs()
    assert report.el_residual_maxnorm <= 10.0 * opts.tolerance * rhs_scale


@pytest.mark.parametrize("cls", [HomotopyClass(1, 0), HomotopyClass(-1, 2)])
def test_formulations_agree_on_the_solved_field(cls):
    lattice = LatticeSpec.unit_square(64)
    cs = random_structure(lattice, 90)
    curved, _ = solve_homotopy_class(cs, cls, SolveOptions(formulation="curved"))
    flat, _ = solve_homotopy_class(cs, cls, SolveOptions(formulation="flat_weighted"))
    assert (curved.periodic - flat.periodic).max_abs() <= 1e-6
    Vc = angle_to_unit_field(curved)
    Vf = angle_to_unit_field(flat)
    assert (Vc.comp1 - Vf.comp1).max_abs() <= 1e-6
    assert (Vc.comp2 - Vf.comp2).max_abs() <= 1e-6


def test_solutions_are_critical_points(wavy64):
    theta, _ = solve_homotopy_class(wavy64, HomotopyClass(1, 1))
    rng = np.random.default_rng(95)
    for _ in range(3):
        beta = bandlimited_field(wavy64.lattice, rng, band=3, amplitude=0.5)
        pair = directional_derivative_check(wavy64, theta, beta, h=1e-4)
        assert abs(pair.analytic) <= 1e-6
        assert abs(pair.numeric) <= 1e-6


def test_solved_fields_keep_their_winding_class():
    lattice = LatticeSpec.unit_square(64)
    cs = random_structure(lattice, 96)
    for cls in [HomotopyClass(0, 0), HomotopyClass(1, 0), HomotopyClass(-2, 1)]:
        theta, _ = solve_homotopy_class(cs, cls)
        assert winding_class(angle_to_unit_field(theta)) == cls


def test_unpreconditioned_solve_matches_preconditioned():
    lattice = LatticeSpec.unit_square(16)
    cs = structure_from(lattice, lambda x, y: 0.1 * np.sin(TWO_PI * x))
    cls = HomotopyClass(1, 0)
    fast, _ = solve_homotopy_class(cs, cls, SolveOptions(formulation="flat_weighted"))
    slow, report = solve_homotopy_class(
        cs,
        cls,
        SolveOptions(formulation="flat_weighted", preconditioner="none"),
    )
    assert (fast.periodic - slow.periodic).max_abs() <= 1e-8
    assert report.iterations > 0


def test_nonconvergence_raises_with_history(wavy64):
    with pytest.raises(ConvergenceError) as excinfo:
        solve_homotopy_class(wavy64, HomotopyClass(1, 0), SolveOptions(max_iterations=2))
    history = excinfo.value.residual_history
    assert len(history) == 3
    assert history[0] == 1.0


def test_compatibility_guard_fires_on_unbalanced_source(wavy64):
    ws = _workspace(
        wavy64, "flat_weighted", "spectral_biharmonic",
        lambda h: apply_operator_P(wavy64, h, "flat_weighted"),
    )
    balanced = np.sin(TWO_PI * wavy64.lattice.fractional_coords[0])
    _check_compatibility(balanced - balanced.mean(), ws)  # no error
    with pytest.raises(CompatibilityError):
        _check_compatibility(np.ones(wavy64.lattice.shape), ws)


### Rigidity of the vertical problem

def test_rigidity_recovers_flat_reference_eigenvalue(flat64):
    cert = section_rigidity_check(flat64)
    assert cert.smallest_rayleigh == pytest.approx(FOURTH_POWER_OF_2PI, rel=1e-6)
    assert cert.verdict


def test_rigidity_holds_for_curved_metric():
    cs = structure_from(LatticeSpec.unit_square(64), lambda x, y: 0.3 * np.cos(TWO_PI * y))
    cert = section_rigidity_check(cs)
    assert cert.smallest_rayleigh > 0.0
    assert cert.verdict


def test_rigidity_operator_annihilates_constants(wavy64):
    const = ScalarField.from_constant(wavy64.lattice, 2.0)
    lap = flat_laplacian(const)
    numerator = integrate_inner(lap, lap, weight=wavy64.e2u)
    assert numerator == 0.0


### Descent oracle

def test_descent_on_flat_metric_is_immediate(flat64):
    result = descent_oracle(flat64, HomotopyClass(1, 0), steps=10)
    assert result.energy_trace == [0.0]
    assert not result.stalled
    assert result.angle.periodic.max_abs() == 0.0


def test_descent_matches_linear_solver():
    cs = structure_from(
        LatticeSpec.unit_square(64),
        lambda x, y: 0.2 * np.sin(TWO_PI * x) * np.cos(TWO_PI * y),
    )
    cls = HomotopyClass(0, 1)
    solved, report = solve_homotopy_class(cs, cls)
    result = descent_oracle(cs, cls, steps=500)
    assert not result.stalled
    final = result.energy_trace[-1]
    assert final == pytest.approx(report.energy.bienergy, rel=1e-6)
    assert (result.angle.periodic - solved.periodic).max_abs() <= 1e-5
    diffs = np.diff(result.energy_trace)
    assert np.all(diffs <= 0.0)


@pytest.mark.filterwarnings("ignore::torusfield.conformal.ResolutionWarning")
def test_descent_plain_rule_is_monotone(wavy64):
    # the raw gradient genuinely carries |k|^4-amplified high modes (that is
    # why production preconditions), so the resolution warning is expected
    result = descent_oracle(wavy64, HomotopyClass(1, 0), steps=5, step_rule="plain")
    assert isinstance(result, DescentResult)
    diffs = np.diff(result.energy_trace)
    assert np.all(diffs <= 0.0)


def test_descent_rejects_unknown_rule(flat64):
    with pytest.raises(ValueError, match="step_rule"):
        descent_oracle(flat64, HomotopyClass(0, 0), steps=1, step_rule="newton")
