"""
Property suites run by ``fracdiff verify``.

Each check returns (passed, detail). Results are printed as TAP: a plan line followed by one
``ok``/``not ok`` line per check.
"""

import logging
from typing import Callable, Dict, List, Optional, TextIO, Tuple

import numpy as np
from scipy.special import erfc

from fracdiff.config import SolverSettings
from fracdiff.errors import FracDiffError
from fracdiff.fracquad import residual_int_eq
from fracdiff.grid import TimeGrid
from fracdiff.ibvp import BoundaryPath, DerivativeKind, IBVPProblem, InitialData, RobinBC, eval_u, solve
from fracdiff.specfun import (
    FracIndex,
    delta_mu,
    r_closed_form_half,
    r_eval,
    r_laplace,
    r_line_integral_check,
    r_mainardi_relation_check,
    r_partial_a,
    r_series,
    r_tail_integral_check,
)
from fracdiff.stefan import neumann_alpha, rl_ansatz_check, stefan1_residuals, stefan1_solve, stefan2_solve
from fracdiff.volterra import KernelEntry, KernelMatrix, constant_kernel, solve_first_kind

logger = logging.getLogger(__name__)

CheckResult = Tuple[bool, str]
Check = Callable[[SolverSettings], CheckResult]


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


# --------------------------------------------------------------------------- specfun


def _closed_forms(settings: SolverSettings) -> CheckResult:
    rng = np.random.default_rng(7)
    a = rng.uniform(0.1, 5.0, 50)
    t = rng.uniform(0.1, 5.0, 50)
    worst = 0.0
    for mu in (0.0, 0.5, 1.0):
        exact = r_closed_form_half(mu, a, t)
        idx = FracIndex(mu, 0.5)
        worst = max(worst, _rel(r_series(idx, a, t, settings.eval), exact))
        worst = max(worst, _rel(r_laplace(idx, a, t, settings.eval.inversion), exact))
    return worst <= 1e-8, f"max relative error {worst:.2e}"


def _cross_routes(settings: SolverSettings) -> CheckResult:
    worst = 0.0
    for nu in (0.1, 0.25, 0.4, 0.5):
        for mu in (0.0, 0.3, 0.5, 1.0, 1.7):
            idx = FracIndex(mu, nu)
            a = np.array([0.2, 0.8, 1.5, 3.0])[:, None] * np.ones((1, 4))
            t = np.ones((4, 1)) * np.array([0.3, 1.0, 2.0, 4.0])[None, :]
            series = np.asarray(r_series(idx, a, t, settings.eval))
            inverted = np.asarray(r_laplace(idx, a, t, settings.eval.inversion))
            mask = np.abs(series) > 1e-6
            if np.any(mask):
                worst = max(worst, _rel(inverted[mask], series[mask]))
    return worst <= 1e-6, f"max relative disagreement {worst:.2e}"


def _a_zero_limit(settings: SolverSettings) -> CheckResult:
    idx = FracIndex(0.7, 0.3)
    value = float(r_eval(idx, 1e-6, 2.0, settings.eval))
    target = float(delta_mu(0.7, 2.0))
    return abs(value - target) <= 1e-4 * abs(target), f"R(1e-6, 2) = {value!r}, delta = {target!r}"


def _partial_a(settings: SolverSettings) -> CheckResult:
    idx = FracIndex(1.0, 0.4)
    a, t, step = 0.9, 1.3, 1e-5
    fd = (float(r_eval(idx, a + step, t, settings.eval)) - float(r_eval(idx, a - step, t, settings.eval))) / (2 * step)
    exact = float(r_partial_a(idx, a, t, settings.eval))
    return _rel(fd, exact) <= 1e-5, f"finite difference {fd!r}, exact {exact!r}"


def _integral_identities(settings: SolverSettings) -> CheckResult:
    idx = FracIndex(0.5, 0.4)
    line, delta = r_line_integral_check(idx, 1.5, settings.eval.quad, settings.eval)
    tail, shifted = r_tail_integral_check(idx, 0.7, 1.5, settings.eval.quad, settings.eval)
    m1, m2 = r_mainardi_relation_check(0.4, 0.8, 1.5, settings.eval)
    errors = (abs(line - delta), _rel(tail, shifted), _rel(m1, m2))
    return errors[0] <= 1e-4 and errors[1] <= 1e-5 and errors[2] <= 1e-8, f"errors {errors}"


# --------------------------------------------------------------------------- fracquad


def _integral_equation_convergence(settings: SolverSettings) -> CheckResult:
    details = []
    passed = True
    for nu in (0.25, 0.4):
        idx = FracIndex(1.0, nu)
        coarse = np.max(np.abs(residual_int_eq(idx, 1.0, TimeGrid(2.0, 128), settings.eval).values[1:]))
        fine = np.max(np.abs(residual_int_eq(idx, 1.0, TimeGrid(2.0, 256), settings.eval).values[1:]))
        ratio = coarse / fine if fine > 0 else np.inf
        passed = passed and ratio >= 2.5
        details.append(f"nu={nu}: ratio {ratio:.2f}")
    return passed, ", ".join(details)


# --------------------------------------------------------------------------- volterra


def _unit_kernel(settings: SolverSettings) -> CheckResult:
    grid = TimeGrid(1.0, 32)
    solution = solve_first_kind(KernelMatrix.scalar(constant_kernel(1.0)), lambda t: t, None, grid)
    error = float(np.max(np.abs(solution.densities[0].values - 1.0)))
    return error <= 1e-12, f"max |phi - 1| = {error:.2e}"


def _abel_kernel(settings: SolverSettings) -> CheckResult:
    nu = 0.25
    grid = TimeGrid(1.0, 128)
    entry = KernelEntry(lambda t, tau: 0.5 * np.asarray(delta_mu(2 * nu, t - tau)), 2 * nu - 1)
    solution = solve_first_kind(KernelMatrix.scalar(entry), lambda t: t, None, grid)
    density = solution.densities[0]
    mids = density.midpoints
    keep = mids >= 0.5
    exact = 2.0 * np.asarray(delta_mu(2.0 - 2 * nu, mids[keep]))
    error = _rel(density.values[keep], exact)
    return error <= 3e-2, f"relative error {error:.2e}"


# --------------------------------------------------------------------------- ibvp


def _half_line(kind: DerivativeKind) -> IBVPProblem:
    return IBVPProblem(
        kind=kind,
        nu=0.5,
        kappa=1.0,
        left=RobinBC.dirichlet(1.0),
        right=RobinBC(1.0, 0.0),
        left_path=BoundaryPath.constant(0.0),
        right_path=BoundaryPath.plus_infinity(),
        initial=InitialData.constant(0.0),
    )


def _classical_limit(settings: SolverSettings) -> CheckResult:
    grid = TimeGrid(1.0, 64)
    caputo = solve(_half_line(DerivativeKind.CAPUTO), grid, settings.eval, settings.condition_limit)
    rl = solve(_half_line(DerivativeKind.RIEMANN_LIOUVILLE), grid, settings.eval, settings.condition_limit)
    worst = 0.0
    split = 0.0
    for x in (0.1, 0.5, 1.0, 2.0):
        for t in (0.25, 0.5, 1.0):
            u = eval_u(caputo, x, t)
            worst = max(worst, abs(u - float(erfc(x / (2.0 * np.sqrt(t))))))
            split = max(split, abs(u - eval_u(rl, x, t)))
    return worst <= 1e-3 and split <= 1e-6, f"erfc error {worst:.2e}, Caputo/RL split {split:.2e}"


def _constant_ivp(settings: SolverSettings) -> CheckResult:
    problem = IBVPProblem(
        kind=DerivativeKind.CAPUTO,
        nu=0.3,
        kappa=1.0,
        left=RobinBC(1.0, 0.0),
        right=RobinBC(1.0, 0.0),
        left_path=BoundaryPath.minus_infinity(),
        right_path=BoundaryPath.plus_infinity(),
        initial=InitialData.constant(3.0),
    )
    solution = solve(problem, TimeGrid(1.0, 16), settings.eval)
    values = [eval_u(solution, x, t) for x in (-1.0, 0.0, 2.0) for t in (0.1, 1.0)]
    error = max(abs(v - 3.0) for v in values)
    return error <= 1e-12, f"max |u - 3| = {error:.2e}"


# --------------------------------------------------------------------------- stefan


def _neumann(settings: SolverSettings) -> CheckResult:
    solution = stefan1_solve(0.5, 1.0, cfg=settings.eval)
    oracle = neumann_alpha(1.0)
    ok = abs(solution.alpha - oracle) <= 1e-6 and abs(solution.alpha - 0.620063) <= 1e-4
    return ok, f"alpha {solution.alpha!r}, Neumann {oracle!r}"


def _similarity_residuals(settings: SolverSettings) -> CheckResult:
    worst = 0.0
    for nu in (0.25, 0.3, 0.4):
        report = stefan1_residuals(stefan1_solve(nu, 1.0, cfg=settings.eval), [0.5, 1.0, 2.0])
        worst = max(worst, float(np.max(report["right_bc"])), float(np.max(report["stefan"])))
    return worst <= 1e-10, f"max residual {worst:.2e}"


def _rl_exclusion(settings: SolverSettings) -> CheckResult:
    report = rl_ansatz_check(0.3, 0.5, [0.5, 1.0, 2.0], u0=-0.5, cfg=settings.eval)
    return report.spread > 1e-3, f"spread {report.spread:.3e}"


def _front_tracking_coincidence(settings: SolverSettings) -> CheckResult:
    grid = TimeGrid(0.5, 32)
    caputo = stefan2_solve(DerivativeKind.CAPUTO, 0.5, 1.0, grid, settings.eval, settings.newton)
    rl = stefan2_solve(DerivativeKind.RIEMANN_LIOUVILLE, 0.5, 1.0, grid, settings.eval, settings.newton)
    gap = float(np.max(np.abs(caputo.eta.values - rl.eta.values)))
    return gap <= 5 * settings.newton.tol, f"max eta gap {gap:.2e}"


SUITES: Dict[str, List[Tuple[str, Check]]] = {
    "specfun": [
        ("closed forms at nu = 1/2", _closed_forms),
        ("series and Laplace routes agree", _cross_routes),
        ("a -> 0 limit is delta_mu", _a_zero_limit),
        ("d/da R matches finite differences", _partial_a),
        ("integral identities", _integral_identities),
    ],
    "fracquad": [
        ("integral equation residual converges", _integral_equation_convergence),
    ],
    "volterra": [
        ("unit kernel reproduces the derivative", _unit_kernel),
        ("Abel kernel matches closed form", _abel_kernel),
    ],
    "ibvp": [
        ("half-line Dirichlet recovers erfc", _classical_limit),
        ("constant initial value is preserved", _constant_ivp),
    ],
    "stefan": [
        ("Neumann constant", _neumann),
        ("problem one residuals", _similarity_residuals),
        ("Riemann-Liouville ansatz exclusion", _rl_exclusion),
        ("problem two: Caputo and RL coincide at nu = 1/2", _front_tracking_coincidence),
    ],
}

SUITE_NAMES = tuple(SUITES) + ("all",)


def run_suite(name: str, settings: SolverSettings, stream: TextIO, checks: Optional[Dict[str, List[Tuple[str, Check]]]] = None) -> bool:
    """Run one suite (or ``all``) and print TAP to ``stream``; True iff every check passed."""
    registry = checks or SUITES
    if name == "all":
        selected = [(f"{suite}: {label}", check) for suite, items in registry.items() for label, check in items]
    elif name in registry:
        selected = [(f"{name}: {label}", check) for label, check in registry[name]]
    else:
        raise ValueError(f"unknown suite {name!r}")

    stream.write("TAP version 13\n")
    stream.write(f"1..{len(selected)}\n")
    all_passed = True
    for number, (label, check) in enumerate(selected, start=1):
        try:
            passed, detail = check(settings)
        except (FracDiffError, ArithmeticError, ValueError) as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        status = "ok" if passed else "not ok"
        stream.write(f"{status} {number} - {label} # {detail}\n")
        if not passed:
            logger.error(f"Check failed: {label} ({detail})")
        all_passed = all_passed and passed
    return all_passed
