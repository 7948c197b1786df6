"""
Command-line entry point.

    fracdiff eval-r --mu 1 --nu 0.5 --a 1 --t 1
    fracdiff solve-ibvp run.json
    fracdiff solve-stefan one --nu 0.5 --r 1
    fracdiff solve-stefan two --nu 0.4 --r 1 --steps 128 --t-end 1 --csv front.csv
    fracdiff verify all
    fracdiff demo-profiles

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 non-convergence,
4 ill-posed Volterra system, 5 unsupported problem.
"""

import argparse
import csv
import itertools
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np
from pydantic import ValidationError

from fracdiff import __version__
from fracdiff.config import DEFAULT_CONFIG_PATH, ConfigManager, SolverSettings, solver_settings
from fracdiff.errors import ConvergenceError, DomainError, IllPosedError, UnsupportedProblemError
from fracdiff.grid import TimeGrid
from fracdiff.ibvp import IBVPSolution, boundary_residuals, eval_u, eval_ux, solve
from fracdiff.logger import command_logger, setup_service_logger
from fracdiff.pulses import PulseSum
from fracdiff.schema import EvalRParams, RunConfig, StefanParams
from fracdiff.specfun import FracIndex, r_eval, r_eval_detailed
from fracdiff.stefan import stefan1_residuals, stefan1_solve, stefan2_solve
from fracdiff.verify import SUITE_NAMES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_CONVERGENCE = 3
EXIT_ILL_POSED = 4
EXIT_UNSUPPORTED = 5

DEMO_NUS = (0.3, 0.4, 0.5)


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _fmt(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(value) for value in row])


def _write_table(path: Optional[str], header: Sequence[str], rows: Iterable[Sequence[Any]], stdout: TextIO) -> None:
    if path:
        with open(path, "w", newline="") as handle:
            write_csv(handle, header, rows)
        logger.info(f"Wrote {path}")
    else:
        write_csv(stdout, header, rows)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _dump_json(payload: Dict[str, Any], path: Optional[str], stdout: TextIO) -> None:
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2)
    if path:
        with open(path, "w") as handle:
            handle.write(text + "\n")
        logger.info(f"Wrote {path}")
    else:
        stdout.write(text + "\n")


# --------------------------------------------------------------------------- commands


def cmd_eval_r(args: argparse.Namespace, settings: SolverSettings, stdout: TextIO) -> int:
    params = EvalRParams(mu=args.mu, nu=args.nu, a=args.a, t=args.t, method=args.method)
    rows = []
    for mu, nu, a, t in itertools.product(params.mu, params.nu, params.a, params.t):
        result = r_eval_detailed(FracIndex(mu, nu), a, t, settings.eval, params.method)
        rows.append((mu, nu, a, t, float(result.value), result.method))
    _write_table(args.output, ("mu", "nu", "a", "t", "value", "method_used"), rows, stdout)
    return EXIT_OK


def _density_payload(solution: IBVPSolution, left: bool) -> Dict[str, Any]:
    density = solution.phi_minus if left else solution.phi_plus
    samples = solution.density_samples(left)
    payload: Dict[str, Any] = {"t": samples.nodes, "values": samples.values}
    if isinstance(density, PulseSum):
        payload["symbolic"] = repr(density)
    return payload


def cmd_solve_ibvp(args: argparse.Namespace, settings: SolverSettings, stdout: TextIO) -> int:
    with open(args.run_config, "r") as handle:
        raw = json.load(handle)
    run = RunConfig.model_validate(raw)
    problem = run.to_problem()
    grid = run.grid.to_grid()
    solution = solve(problem, grid, settings.eval, settings.condition_limit)

    points = []
    for t in run.output.t:
        lo, hi = problem.domain_at(t)
        for x in run.output.x:
            if lo <= x <= hi:
                points.append((x, t))
            else:
                logger.warning(f"Skipping x={x} at t={t}: outside [{lo}, {hi}]")

    def evaluate(point):
        x, t = point
        return x, t, eval_u(solution, x, t), eval_ux(solution, x, t)

    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        rows = list(pool.map(evaluate, points))
    _write_table(run.output.csv, ("x", "t", "u", "ux"), rows, stdout)

    summary = {
        "diagnostics": solution.diagnostics,
        "phi_minus": _density_payload(solution, True),
        "phi_plus": _density_payload(solution, False),
        "boundary_residuals": boundary_residuals(solution, run.output.t),
        "output_times": run.output.t,
    }
    if run.output.json_path:
        _dump_json(summary, run.output.json_path, stdout)
    logger.info(f"solve-ibvp finished: {len(rows)} points, route {solution.diagnostics.get('route')}")
    return EXIT_OK


def cmd_solve_stefan(args: argparse.Namespace, settings: SolverSettings, stdout: TextIO) -> int:
    params = StefanParams(
        problem=args.problem,
        nu=args.nu,
        r=args.r,
        kind=args.kind,
        steps=args.steps,
        t_end=args.t_end,
        points=args.points,
    )
    if params.problem == "one":
        solution = stefan1_solve(params.nu, params.r, params.kind, settings.eval)
        times = [params.t_end * k / 4 for k in range(1, 5)]
        residuals = stefan1_residuals(solution, times)
        rows = []
        for t in times:
            xs, us = solution.profile(t, params.points)
            uxs = solution.ux(xs, t)
            rows.extend(zip(itertools.repeat(t), xs, us, uxs))
        if args.csv:
            _write_table(args.csv, ("t", "x", "u", "ux"), rows, stdout)
        summary = {
            "alpha": solution.alpha,
            "u0": solution.u0,
            "nu": solution.nu,
            "r": solution.r,
            "kind": solution.kind.value,
            "max_residual_right_bc": float(np.max(residuals["right_bc"])),
            "max_residual_stefan": float(np.max(residuals["stefan"])),
        }
    else:
        grid = TimeGrid(params.t_end, params.steps)
        state = stefan2_solve(params.kind, params.nu, params.r, grid, settings.eval, settings.newton)
        rows = zip(grid.nodes, state.eta.values, state.phi_minus.values, state.residual_bc, state.residual_stefan)
        if args.csv:
            _write_table(args.csv, ("t", "eta", "phi_minus", "residual_bc", "residual_stefan"), rows, stdout)
        summary = {
            "nu": state.nu,
            "r": state.r,
            "kind": state.kind.value,
            "eta_end": float(state.eta.values[-1]),
            "monotone": state.monotone,
            "direction": state.direction,
            "max_residual_bc": float(np.max(state.residual_bc)),
            "max_residual_stefan": float(np.max(state.residual_stefan)),
        }
    _dump_json(summary, args.json, stdout)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, settings: SolverSettings, stdout: TextIO) -> int:
    passed = run_suite(args.suite, settings, stdout)
    logger.info(f"verify {args.suite}: {'passed' if passed else 'FAILED'}")
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def cmd_demo_profiles(args: argparse.Namespace, settings: SolverSettings, stdout: TextIO) -> int:
    """R_{nu,nu}(a, t) and R_{0,nu}(a, t) for nu in 0.3, 0.4, 0.5 over t in (0, t_end]."""
    if args.points < 2 or not args.t_end > 0:
        raise DomainError("demo-profiles needs points >= 2 and t_end > 0")
    times = np.linspace(args.t_end / args.points, args.t_end, args.points)
    rows = []
    for nu in DEMO_NUS:
        for label, mu in (("R_nu_nu", nu), ("R_0_nu", 0.0)):
            values = np.asarray(r_eval(FracIndex(mu, nu), args.a, times, settings.eval))
            rows.extend((label, nu, mu, args.a, t, v) for t, v in zip(times, values))
    _write_table(args.output, ("profile", "nu", "mu", "a", "t", "value"), rows, stdout)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracdiff",
        description="Auxiliary R functions, fractional diffusion IBVPs and fractional Stefan problems",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="YAML settings file")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-r", help="Evaluate R_{mu,nu}(a, t)")
    p.add_argument("--mu", type=_float_list, required=True)
    p.add_argument("--nu", type=_float_list, required=True)
    p.add_argument("--a", type=_float_list, required=True)
    p.add_argument("--t", type=_float_list, required=True)
    p.add_argument("--method", default="auto", choices=["auto", "series", "laplace", "integral"])
    p.add_argument("--output", help="CSV path; stdout when omitted")
    p.set_defaults(handler=cmd_eval_r)

    p = sub.add_parser("solve-ibvp", help="Solve an IBVP described by a JSON run config")
    p.add_argument("run_config", help="JSON run configuration")
    p.set_defaults(handler=cmd_solve_ibvp)

    p = sub.add_parser("solve-stefan", help="Solve fractional Stefan problem one or two")
    p.add_argument("problem", choices=["one", "two"])
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--kind", default="caputo", choices=["caputo", "rl"])
    p.add_argument("--steps", type=int, default=128, help="Time steps (two)")
    p.add_argument("--t-end", type=float, default=1.0, dest="t_end")
    p.add_argument("--points", type=int, default=21, help="Profile points per time (one)")
    p.add_argument("--csv", help="CSV output path")
    p.add_argument("--json", help="JSON summary path; stdout when omitted")
    p.set_defaults(handler=cmd_solve_stefan)

    p = sub.add_parser("verify", help="Run property suites, TAP output")
    p.add_argument("suite", choices=list(SUITE_NAMES))
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("demo-profiles", help="R_{nu,nu}(a, t) and R_{0,nu}(a, t) profiles")
    p.add_argument("--a", type=float, default=2.5)
    p.add_argument("--t-end", type=float, default=5.0, dest="t_end")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--output", help="CSV path; stdout when omitted")
    p.set_defaults(handler=cmd_demo_profiles)

    return parser


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    stdout = stdout or sys.stdout

    config = ConfigManager(args.config)
    if args.debug:
        config.set("log_level", "DEBUG")
    setup_service_logger(config.get_all())
    log = command_logger(args.command)

    try:
        settings = solver_settings(config.get_all())
        log.info(f"Starting {args.command}")
        started = time.perf_counter()
        code = args.handler(args, settings, stdout)
        log.info(f"{args.command} exited with {code} after {time.perf_counter() - started:.3f}s")
        return code
    except UnsupportedProblemError as e:
        log.error(f"Unsupported problem: {e}")
        return EXIT_UNSUPPORTED
    except IllPosedError as e:
        log.error(f"Ill-posed system: {e}")
        return EXIT_ILL_POSED
    except (DomainError, ValidationError) as e:
        log.error(f"Invalid input: {e}")
        return EXIT_INVALID
    except (OSError, json.JSONDecodeError) as e:
        log.error(f"Cannot read input: {e}")
        return EXIT_INVALID
    except ConvergenceError as e:
        log.error(f"No convergence: {e}")
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
