"""Command line: solve a winding class, re-measure a saved field, verify the
calculus identities, probe second-order stability, classify on model groups.

Exit codes follow the usual convention: 0 on success, 1 when a requested
check, comparison, or solve fails, 2 for unusable input.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import io as runio
from .angles import AngleField, HomotopyClass
from .conformal import ConformalStructure, frame_connection, section_residual_pair
from .energy import bienergy
from .lattice import (
    ScalarField,
    bandlimited_field,
    flat_laplacian,
    integrate_inner,
    rotate_J,
)
from .liegroups import LeftInvariantModel, classify, compare_known, hyperbolic, sol3, su2
from .solver import (
    ConvergenceError,
    apply_operator_P,
    section_rigidity_check,
    solve_homotopy_class,
)
from .stability import NotCriticalError, hessian_vs_energy_check


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage problems by exiting
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.handler(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NotCriticalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


### Argument plumbing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusfield",
        description="Critical unit vector fields on conformally flat tori, "
        "and their classification on model groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one winding class and write artifacts")
    _add_geometry_flags(solve)
    _add_solver_flags(solve)
    solve.add_argument(
        "--outputs",
        help="comma list of artifacts to write: csv, pgm, json, quiver",
    )
    solve.add_argument("--outdir", help="output directory (default: TORUSFIELD_OUTDIR or .)")
    solve.set_defaults(handler=_cmd_solve)

    energy = sub.add_parser("energy", help="recompute the energy of a saved field table")
    energy.add_argument("--field", required=True, help="field table written by solve")
    energy.add_argument(
        "--lattice",
        default=None,
        help="generators the writing run used (default unit-square); "
        "the table stores only fractional coordinates",
    )
    energy.set_defaults(handler=_cmd_energy)

    verify = sub.add_parser("verify", help="run the calculus identity checks")
    _add_geometry_flags(verify)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(handler=_cmd_verify)

    stability = sub.add_parser(
        "stability", help="solve, then compare the second variation with the energy"
    )
    _add_geometry_flags(stability)
    _add_solver_flags(stability)
    stability.add_argument("--samples", type=int, default=5)
    stability.add_argument("--seed", type=int, default=0)
    stability.set_defaults(handler=_cmd_stability)

    lie = sub.add_parser(
        "lie", help="classify critical unit fields on a three-parameter model group"
    )
    lie.add_argument(
        "--model", required=True, choices=("su2", "sol3", "hyperbolic"), help="model family"
    )
    lie.add_argument(
        "--params",
        help="comma list: su2 wants three scales (default 1,1,1), "
        "hyperbolic wants dimension,curvature-scale (default 3,1)",
    )
    lie.add_argument(
        "--problem",
        default="biharmonic-section",
        choices=("harmonic-section", "biharmonic-section", "biharmonic-vector-field"),
    )
    lie.add_argument(
        "--compare",
        action="store_true",
        help="check the computed set against the known classification",
    )
    lie.add_argument("--resolution", type=int, default=20000)
    lie.add_argument("--seed", type=int, default=0)
    lie.set_defaults(handler=_cmd_lie)

    return parser


def _add_geometry_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--lattice", help="'unit-square' or 'd1x,d1y;d2x,d2y'")
    sub.add_argument("--grid", help="grid counts: N or N1xN2")
    sub.add_argument("--u", help="conformal exponent: expression, number, or @samplefile")
    sub.add_argument("--config", help="key = value file; explicit flags override it")


def _add_solver_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--class",
        dest="winding",
        type=int,
        nargs=2,
        metavar=("M", "N"),
        help="winding numbers along the two generators",
    )
    sub.add_argument("--tolerance", type=float, help="relative residual target")
    sub.add_argument("--formulation", choices=("curved", "flat_weighted"))


def _load_config(args: argparse.Namespace) -> runio.RunConfig:
    """Defaults, then the config file, then explicit flags."""
    config = runio.RunConfig()
    if getattr(args, "config", None):
        config = runio.RunConfig.from_text(
            Path(args.config).read_text(encoding="utf-8")
        )
    overrides: dict[str, object] = {}
    for key in ("lattice", "grid", "u", "tolerance", "formulation"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "winding", None) is not None:
        overrides["winding"] = tuple(args.winding)
    if getattr(args, "outputs", None) is not None:
        overrides["outputs"] = tuple(
            kind for kind in args.outputs.split(",") if kind
        )
    return replace(config, **overrides)


def _resolve_outdir(args: argparse.Namespace) -> Path:
    if getattr(args, "outdir", None):
        return Path(args.outdir)
    env = os.environ.get("TORUSFIELD_OUTDIR")
    return Path(env) if env else Path(".")


### Subcommands


def _cmd_solve(args: argparse.Namespace) -> int:
    config = _load_config(args)
    cs, homotopy, opts = runio.realize(config)
    theta, report = solve_homotopy_class(cs, homotopy, opts)
    print(
        f"class ({homotopy.m}, {homotopy.n}): {report.iterations} iterations, "
        f"relative residual {report.final_relative_residual:.3e}, "
        f"bienergy {report.energy.bienergy:.12g}"
    )
    if config.outputs:
        for path in runio.write_outputs(_resolve_outdir(args), config, cs, theta, report):
            print(f"wrote {path}")
    return 0


def _cmd_energy(args: argparse.Namespace) -> int:
    cs, theta = runio.read_field_csv(args.field, args.lattice or "unit-square")
    breakdown = bienergy(cs, theta)
    print(f"class ({theta.homotopy.m}, {theta.homotopy.n})")
    for name, value in breakdown._asdict().items():
        print(f"{name} = {value:.17g}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    config = _load_config(args)
    cs, homotopy, _ = runio.realize(config)
    rng = np.random.default_rng(getattr(args, "seed", 0))
    failures = 0
    for name, check in _VERIFY_CHECKS:
        ok, detail = check(cs, homotopy, rng)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    if failures:
        print(f"{failures} of {len(_VERIFY_CHECKS)} checks failed")
        return 1
    print(f"all {len(_VERIFY_CHECKS)} checks passed")
    return 0


def _cmd_stability(args: argparse.Namespace) -> int:
    config = _load_config(args)
    cs, homotopy, opts = runio.realize(config)
    theta, _ = solve_homotopy_class(cs, homotopy, opts)
    rng = np.random.default_rng(args.seed)
    failures = 0
    for index in range(args.samples):
        beta = bandlimited_field(cs.lattice, rng, band=3, amplitude=0.5)
        wide = hessian_vs_energy_check(cs, theta, beta, h=1e-3)
        narrow = hessian_vs_energy_check(cs, theta, beta, h=5e-4)
        nonnegative = wide.quadratic_value >= 0.0
        # the gap shrinks like h^2; below the quadrature noise floor the
        # ratio is meaningless, so small gaps pass outright
        floor = 1e-9 * max(1.0, abs(wide.quadratic_value))
        if wide.gap <= floor:
            converges, ratio_note = True, "gap at noise floor"
        else:
            ratio = wide.gap / max(narrow.gap, 1e-300)
            converges = 3.5 <= ratio <= 4.5
            ratio_note = f"halving ratio {ratio:.2f}"
        ok = nonnegative and converges
        failures += 0 if ok else 1
        print(
            f"{'PASS' if ok else 'FAIL'} direction {index}: "
            f"quadratic {wide.quadratic_value:.6e}, {ratio_note}"
        )
    if failures:
        print(f"{failures} of {args.samples} directions failed")
        return 1
    print(f"second variation nonnegative and quadratically matched "
          f"on all {args.samples} directions")
    return 0


def _cmd_lie(args: argparse.Namespace) -> int:
    model = _build_model(args.model, args.params)
    problem = args.problem.replace("-", "_")
    if args.compare:
        report = compare_known(model, problem, resolution=args.resolution, seed=args.seed)
        for text in report.matched:
            print(f"matched: {text}")
        for text in report.missing:
            print(f"missing: {text}")
        for text in report.extra:
            print(f"unexpected: {text}")
        if report.passed:
            print("classification matches the known solution set")
            return 0
        print("classification does NOT match the known solution set")
        return 1
    result = classify(model, problem, resolution=args.resolution, seed=args.seed)
    suffix = " (ambiguous)" if result.ambiguous else ""
    print(f"{model.name}, {args.problem}: {result.kind}{suffix}")
    for component in result.components:
        print(f"  {component.describe()}")
    return 0


def _build_model(family: str, params_text: str | None) -> LeftInvariantModel:
    params: list[float] = []
    if params_text:
        try:
            params = [float(piece) for piece in params_text.split(",") if piece.strip()]
        except ValueError:
            raise ValueError(f"--params wants a comma list of numbers, got {params_text!r}")
    if family == "su2":
        if not params:
            params = [1.0, 1.0, 1.0]
        if len(params) != 3:
            raise ValueError("su2 wants exactly three scales, e.g. --params 2,1.5,1")
        return su2(*params)
    if family == "sol3":
        if params:
            raise ValueError("sol3 has no parameters; drop --params")
        return sol3()
    if not params:
        params = [3.0, 1.0]
    if len(params) != 2 or params[0] != int(params[0]):
        raise ValueError(
            "hyperbolic wants dimension,curvature-scale with integer dimension, "
            "e.g. --params 4,1"
        )
    return hyperbolic(int(params[0]), params[1])


### Identity checks behind `verify`

_Check = Callable[
    [ConformalStructure, HomotopyClass, np.random.Generator], tuple[bool, str]
]


def _random_angle(cs: ConformalStructure, homotopy, rng) -> AngleField:
    return AngleField(homotopy, bandlimited_field(cs.lattice, rng, band=4, amplitude=0.4))


def _check_laplacian_rescaling(cs, homotopy, rng):
    """Curved Laplacian == e^{2u} * flat Laplacian, as operators on samples."""
    f = bandlimited_field(cs.lattice, rng, band=4)
    composed = cs.laplacian(f)
    rescaled = cs.e2u * flat_laplacian(f)
    scale = max(1.0, rescaled.max_abs())
    gap = (composed - rescaled).max_abs() / scale
    return gap <= 1e-8, f"max gap {gap:.2e} (tolerance 1e-08)"


def _check_residual_collapse(cs, homotopy, rng):
    """Flat and curved tangential residuals differ by the factor e^{-3u}."""
    theta = _random_angle(cs, homotopy, rng)
    pair = section_residual_pair(cs, theta)
    em3u = ScalarField(cs.lattice, np.exp(-3.0 * cs.u.values))
    predicted = em3u * pair.curved
    scale = max(1.0, pair.flat.comp1.max_abs(), pair.flat.comp2.max_abs())
    gap = max(
        (pair.flat.comp1 - predicted.comp1).max_abs(),
        (pair.flat.comp2 - predicted.comp2).max_abs(),
    ) / scale
    return gap <= 1e-8, f"max gap {gap:.2e} (tolerance 1e-08)"


def _check_tangential_formula(cs, homotopy, rng):
    """Numerically projected tangential residual == (lap theta) J V."""
    theta = _random_angle(cs, homotopy, rng)
    pair = section_residual_pair(cs, theta)
    total = theta.total_samples()
    lap = flat_laplacian(theta.periodic).values
    formula1, formula2 = -np.sin(total) * lap, np.cos(total) * lap
    scale = max(1.0, float(np.max(np.abs(lap))))
    gap = max(
        float(np.max(np.abs(pair.flat.comp1.values - formula1))),
        float(np.max(np.abs(pair.flat.comp2.values - formula2))),
    ) / scale
    return gap <= 1e-8, f"max gap {gap:.2e} (tolerance 1e-08)"


def _check_self_adjointness(cs, homotopy, rng):
    """The fourth-order operator is symmetric in the flat L2 pairing."""
    f = bandlimited_field(cs.lattice, rng, band=4)
    g = bandlimited_field(cs.lattice, rng, band=4)
    left = integrate_inner(apply_operator_P(cs, f, "flat_weighted"), g)
    right = integrate_inner(f, apply_operator_P(cs, g, "flat_weighted"))
    scale = max(1.0, abs(left), abs(right))
    gap = abs(left - right) / scale
    return gap <= 1e-8, f"pairing gap {gap:.2e} (tolerance 1e-08)"


def _check_gauss_bonnet(cs, homotopy, rng):
    """Total curvature of a torus vanishes."""
    total = cs.integrate(cs.kg)
    scale = max(1.0, cs.integrate(ScalarField(cs.lattice, np.abs(cs.kg.values))))
    gap = abs(total) / scale
    return gap <= 1e-8, f"total curvature {total:.2e} (tolerance 1e-08)"


def _check_frame_twist(cs, homotopy, rng):
    """The frame vector Z is -J of the curved gradient of u."""
    Z = frame_connection(cs).Z
    direct = rotate_J(cs.gradient(cs.u))
    gap = max((Z.comp1 + direct.comp1).max_abs(), (Z.comp2 + direct.comp2).max_abs())
    scale = max(1.0, direct.comp1.max_abs(), direct.comp2.max_abs())
    return gap / scale <= 1e-12, f"max gap {gap:.2e} (tolerance 1e-12)"


def _check_rigidity(cs, homotopy, rng):
    """Purely vertical critical fields admit no nonconstant null directions."""
    certificate = section_rigidity_check(cs, seed=int(rng.integers(2**31)))
    return certificate.verdict, (
        f"smallest mean-zero Rayleigh quotient {certificate.smallest_rayleigh:.6e}"
    )


_VERIFY_CHECKS: list[tuple[str, _Check]] = [
    ("laplacian-conformal-rescaling", _check_laplacian_rescaling),
    ("tangential-projection-formula", _check_tangential_formula),
    ("residual-conformal-collapse", _check_residual_collapse),
    ("operator-self-adjointness", _check_self_adjointness),
    ("gauss-bonnet-total-curvature", _check_gauss_bonnet),
    ("frame-twist-identity", _check_frame_twist),
    ("vertical-rigidity", _check_rigidity),
]


if __name__ == "__main__":
    sys.exit(main())
