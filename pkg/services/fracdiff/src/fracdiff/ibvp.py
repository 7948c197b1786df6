"""
Initial-boundary value problems for the time-fractional diffusion equation

    D^{2 nu} u = kappa u_xx,   eta^-(t) < x < eta^+(t),
    a u + b u_x = g^-(t) at x = eta^-(t),   c u + d u_x = g^+(t) at x = eta^+(t),

with D^{2 nu} of Caputo or Riemann-Liouville type, solved by the embedding method.

The problem is embedded into a whole-line problem forced by unknown densities phi^- (left of
eta^-) and phi^+ (right of eta^+). The boundary conditions turn into first-kind Volterra
equations for phi^+-, which are solved either in closed form (Abel inversion of pulse-sum
data) or by product integration. u and u_x are then assembled from the initial-data
convolution and the two layer integrals.
"""

import logging
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import rgamma

from fracdiff.errors import DomainError
from fracdiff.grid import SampledFn, TimeGrid
from fracdiff.pulses import PulseSum
from fracdiff.specfun import DEFAULT_EVAL, EvalConfig, FracIndex, delta_mu, r_convolve_pulses, r_eval, wright_via_r
from fracdiff.volterra import (
    DEFAULT_CONDITION_LIMIT,
    KernelEntry,
    KernelMatrix,
    PanelDensity,
    abel_invert,
    solve_first_kind,
)

logger = logging.getLogger(__name__)

TimeFunction = Callable[[np.ndarray], np.ndarray]
BoundaryData = Union[PulseSum, TimeFunction]
Density = Union[PulseSum, PanelDensity]

# Tolerance for "x lies on the boundary" and for the domain check
BOUNDARY_ATOL = 1e-12


class DerivativeKind(str, Enum):
    CAPUTO = "caputo"
    RIEMANN_LIOUVILLE = "rl"

    @classmethod
    def parse(cls, value: Union[str, "DerivativeKind"]) -> "DerivativeKind":
        if isinstance(value, DerivativeKind):
            return value
        text = str(value).strip().lower().replace("_", "-")
        if text in ("caputo", "c"):
            return cls.CAPUTO
        if text in ("rl", "riemann-liouville"):
            return cls.RIEMANN_LIOUVILLE
        raise DomainError(f"unknown derivative kind {value!r}; expected caputo or rl")

    def initial_order(self, nu: float) -> float:
        """Order of the R kernel convolved with the initial data in u."""
        return 1.0 - nu if self is DerivativeKind.CAPUTO else nu

    def initial_flux_order(self, nu: float) -> float:
        """Order of the R kernel convolved with the initial data in u_x."""
        return 1.0 - 2.0 * nu if self is DerivativeKind.CAPUTO else 0.0


# --------------------------------------------------------------------------- boundary rows


@dataclass(frozen=True)
class RobinBC:
    """coeff_u * u + coeff_ux * u_x = data(t) on one boundary."""

    coeff_u: float
    coeff_ux: float
    data: BoundaryData = field(default_factory=PulseSum.zero)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.coeff_u) and math.isfinite(self.coeff_ux)):
            raise DomainError("boundary coefficients must be finite")
        if abs(self.coeff_u) + abs(self.coeff_ux) == 0:
            raise DomainError("a boundary row needs |coeff_u| + |coeff_ux| > 0")

    @classmethod
    def dirichlet(cls, value: float) -> "RobinBC":
        return cls(1.0, 0.0, PulseSum.constant(value))

    @property
    def symbolic(self) -> bool:
        return isinstance(self.data, PulseSum)

    def data_at(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(self.data(np.asarray(t, dtype=float)), dtype=float)


# --------------------------------------------------------------------------- paths

FINITE = "finite"
MINUS_INFINITY = "minus_infinity"
PLUS_INFINITY = "plus_infinity"

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


@dataclass(frozen=True)
class BoundaryPath:
    """A boundary position eta(t), possibly at -infinity or +infinity."""

    kind: str = FINITE
    func: Optional[TimeFunction] = None
    label: str = ""
    constant_value: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in (FINITE, MINUS_INFINITY, PLUS_INFINITY):
            raise DomainError(f"unknown path kind {self.kind!r}")
        if self.kind == FINITE and self.func is None:
            raise DomainError("a finite path needs an evaluator")

    @classmethod
    def constant(cls, value: float) -> "BoundaryPath":
        value = float(value)
        return cls(FINITE, lambda t: np.full(np.shape(t), value), repr(value), value)

    @classmethod
    def linear(cls, start: float, slope: float) -> "BoundaryPath":
        if slope == 0:
            return cls.constant(start)
        start, slope = float(start), float(slope)
        return cls(FINITE, lambda t: start + slope * np.asarray(t, dtype=float), f"{start!r}+{slope!r}*t")

    @classmethod
    def power(cls, scale: float, exponent: float) -> "BoundaryPath":
        if not exponent > 0:
            raise DomainError(f"power paths need exponent > 0, got {exponent}")
        if scale == 0:
            return cls.constant(0.0)
        scale, exponent = float(scale), float(exponent)
        return cls(
            FINITE,
            lambda t: scale * np.asarray(t, dtype=float) ** exponent,
            f"{scale!r}*t^{exponent!r}",
        )

    @classmethod
    def custom(cls, func: TimeFunction, label: str = "custom") -> "BoundaryPath":
        return cls(FINITE, func, label)

    @classmethod
    def minus_infinity(cls) -> "BoundaryPath":
        return cls(MINUS_INFINITY, label="-infinity")

    @classmethod
    def plus_infinity(cls) -> "BoundaryPath":
        return cls(PLUS_INFINITY, label="+infinity")

    @property
    def is_infinite(self) -> bool:
        return self.kind != FINITE

    @property
    def is_constant(self) -> bool:
        return self.constant_value is not None

    def __call__(self, t: Union[float, np.ndarray]) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == MINUS_INFINITY:
            return np.full(t.shape, -np.inf)
        if self.kind == PLUS_INFINITY:
            return np.full(t.shape, np.inf)
        return np.asarray(self.func(t), dtype=float)


def parse_path(text: str) -> BoundaryPath:
    """
    Parse a boundary path: ``c``, ``c1+c2*t``, ``c*t``, ``c*t^p``, ``+infinity`` or ``-infinity``.
    """
    expr = str(text).replace(" ", "").lower()
    if expr in ("+infinity", "infinity", "+inf", "inf"):
        return BoundaryPath.plus_infinity()
    if expr in ("-infinity", "-inf"):
        return BoundaryPath.minus_infinity()
    if re.fullmatch(_NUMBER, expr):
        return BoundaryPath.constant(float(expr))
    match = re.fullmatch(rf"({_NUMBER})([+-])({_NUMBER})\*t", expr)
    if match:
        slope = float(match.group(3)) * (1.0 if match.group(2) == "+" else -1.0)
        return BoundaryPath.linear(float(match.group(1)), slope)
    match = re.fullmatch(rf"({_NUMBER})\*t", expr)
    if match:
        return BoundaryPath.linear(0.0, float(match.group(1)))
    match = re.fullmatch(rf"({_NUMBER})\*t\^({_NUMBER})", expr)
    if match:
        return BoundaryPath.power(float(match.group(1)), float(match.group(2)))
    raise DomainError(f"cannot parse boundary path {text!r}")


# --------------------------------------------------------------------------- initial data

CONSTANT = "constant"
PIECEWISE_CONSTANT = "piecewise_constant"
SAMPLED = "sampled"
CUSTOM = "custom"

EXTEND_CONSTANT = "constant"
EXTEND_ZERO = "zero"


@dataclass(frozen=True)
class InitialData:
    """
    Initial profile f(x) with a structure tag and the rule used to extend it to the whole line.

    ``extension`` is either ``constant`` (continue the boundary values of f) or ``zero``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    tag: str = CUSTOM
    value: Optional[float] = None
    extension: str = EXTEND_CONSTANT

    def __post_init__(self) -> None:
        if self.tag not in (CONSTANT, PIECEWISE_CONSTANT, SAMPLED, CUSTOM):
            raise DomainError(f"unknown initial data tag {self.tag!r}")
        if self.extension not in (EXTEND_CONSTANT, EXTEND_ZERO):
            raise DomainError(f"unknown extension {self.extension!r}; expected constant or zero")

    @classmethod
    def constant(cls, value: float, extension: str = EXTEND_CONSTANT) -> "InitialData":
        value = float(value)
        return cls(lambda x: np.full(np.shape(x), value), CONSTANT, value, extension)

    @classmethod
    def piecewise_constant(
        cls, breakpoints: Sequence[float], values: Sequence[float], extension: str = EXTEND_CONSTANT
    ) -> "InitialData":
        """values[i] on (breakpoints[i-1], breakpoints[i]); one more value than breakpoints."""
        breaks = np.asarray(breakpoints, dtype=float)
        levels = np.asarray(values, dtype=float)
        if len(levels) != len(breaks) + 1 or np.any(np.diff(breaks) <= 0):
            raise DomainError("need increasing breakpoints and one more value than breakpoints")
        return cls(lambda x: levels[np.searchsorted(breaks, np.asarray(x, dtype=float))], PIECEWISE_CONSTANT, None, extension)

    @classmethod
    def sampled(
        cls, xs: Sequence[float], values: Sequence[float], extension: str = EXTEND_CONSTANT
    ) -> "InitialData":
        xs_arr = np.asarray(xs, dtype=float)
        vals = np.asarray(values, dtype=float)
        if xs_arr.shape != vals.shape or len(xs_arr) < 2 or np.any(np.diff(xs_arr) <= 0):
            raise DomainError("sampled initial data needs matching, increasing abscissae")
        return cls(lambda x: np.interp(np.asarray(x, dtype=float), xs_arr, vals), SAMPLED, None, extension)

    @classmethod
    def custom(cls, func: Callable[[np.ndarray], np.ndarray], extension: str = EXTEND_CONSTANT) -> "InitialData":
        return cls(func, CUSTOM, None, extension)

    def with_extension(self, extension: str) -> "InitialData":
        return replace(self, extension=extension)

    def uniform_value(self, lo: float, hi: float) -> Optional[float]:
        """The constant c when the extension is identically c on the whole line."""
        if self.tag != CONSTANT:
            return None
        if self.extension == EXTEND_CONSTANT or (np.isinf(lo) and np.isinf(hi)):
            return self.value
        return None

    def extended(self, lo: float, hi: float) -> Callable[[np.ndarray], np.ndarray]:
        """f_ext: f on [lo, hi], continued outside according to ``extension``."""
        func = self.func
        if self.extension == EXTEND_CONSTANT:
            def ext(x: np.ndarray) -> np.ndarray:
                return np.asarray(func(np.clip(x, lo, hi)), dtype=float)
        else:
            def ext(x: np.ndarray) -> np.ndarray:
                x = np.asarray(x, dtype=float)
                inside = (x >= lo) & (x <= hi)
                return np.where(inside, np.asarray(func(np.clip(x, lo, hi)), dtype=float), 0.0)
        return ext


# --------------------------------------------------------------------------- problem


@dataclass(frozen=True)
class IBVPProblem:
    kind: DerivativeKind
    nu: float
    kappa: float
    left: RobinBC
    right: RobinBC
    left_path: BoundaryPath
    right_path: BoundaryPath
    initial: InitialData

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DerivativeKind.parse(self.kind))
        if not 0 < self.nu <= 0.5:
            raise DomainError(f"IBVP solvers need nu in (0, 1/2], got {self.nu}")
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.left_path.kind == PLUS_INFINITY or self.right_path.kind == MINUS_INFINITY:
            raise DomainError("the left path cannot be +infinity nor the right path -infinity")
        lo, hi = self.domain_at(0.0)
        if not lo < hi:
            raise DomainError(f"need eta^-(0) < eta^+(0), got {lo} and {hi}")

    @property
    def sqrt_kappa(self) -> float:
        return math.sqrt(self.kappa)

    def domain_at(self, t: float) -> Tuple[float, float]:
        return float(self.left_path(t)), float(self.right_path(t))

    @property
    def f_ext(self) -> Callable[[np.ndarray], np.ndarray]:
        lo, hi = self.domain_at(0.0)
        return self.initial.extended(lo, hi)

    @property
    def uniform_initial(self) -> Optional[float]:
        lo, hi = self.domain_at(0.0)
        return self.initial.uniform_value(lo, hi)


# --------------------------------------------------------------------------- layer kernels


def layer_u(nu: float, kappa: float, d: np.ndarray, sigma: np.ndarray, cfg: EvalConfig = DEFAULT_EVAL) -> np.ndarray:
    """
    int over a forcing half-line of (1/(2 sqrt(kappa))) R_{nu,nu}(|x - xi|/sqrt(kappa), sigma) dxi.

    ``d`` is the signed distance from the evaluation point to the half-line's edge, positive
    when the point lies outside the half-line. The result is (1/2) R_{2nu,nu}(d/sqrt(kappa), sigma)
    for d >= 0 and delta_{2nu}(sigma) - (1/2) R_{2nu,nu}(-d/sqrt(kappa), sigma) otherwise.
    """
    d, sigma = np.broadcast_arrays(np.asarray(d, dtype=float), np.asarray(sigma, dtype=float))
    idx = FracIndex(2.0 * nu, nu)
    half = 0.5 * np.asarray(r_eval(idx, np.abs(d) / math.sqrt(kappa), sigma, cfg))
    return np.where(d >= 0, half, np.asarray(delta_mu(2.0 * nu, sigma)) - half)


def layer_flux(nu: float, kappa: float, d: np.ndarray, sigma: np.ndarray, cfg: EvalConfig = DEFAULT_EVAL) -> np.ndarray:
    """(1/(2 sqrt(kappa))) R_{nu,nu}(|d|/sqrt(kappa), sigma), the magnitude of d/dx of ``layer_u``."""
    d, sigma = np.broadcast_arrays(np.asarray(d, dtype=float), np.asarray(sigma, dtype=float))
    root = math.sqrt(kappa)
    return 0.5 / root * np.asarray(r_eval(FracIndex(nu, nu), np.abs(d) / root, sigma, cfg))


def _side_exponent(nu: float, coeff_ux: float) -> float:
    return nu - 1.0 if coeff_ux != 0 else 2.0 * nu - 1.0


def _kernel_entries(problem: IBVPProblem, cfg: EvalConfig) -> Dict[str, KernelEntry]:
    nu, kappa = problem.nu, problem.kappa
    a, b = problem.left.coeff_u, problem.left.coeff_ux
    c, d = problem.right.coeff_u, problem.right.coeff_ux
    left, right = problem.left_path, problem.right_path

    def k11(t: float, tau: np.ndarray) -> np.ndarray:
        gap = left(t) - left(tau)
        sigma = t - tau
        return a * layer_u(nu, kappa, gap, sigma, cfg) - b * layer_flux(nu, kappa, gap, sigma, cfg)

    def k12(t: float, tau: np.ndarray) -> np.ndarray:
        gap = right(tau) - left(t)
        sigma = t - tau
        return a * layer_u(nu, kappa, gap, sigma, cfg) + b * layer_flux(nu, kappa, gap, sigma, cfg)

    def k21(t: float, tau: np.ndarray) -> np.ndarray:
        gap = right(t) - left(tau)
        sigma = t - tau
        return c * layer_u(nu, kappa, gap, sigma, cfg) - d * layer_flux(nu, kappa, gap, sigma, cfg)

    def k22(t: float, tau: np.ndarray) -> np.ndarray:
        gap = right(tau) - right(t)
        sigma = t - tau
        return c * layer_u(nu, kappa, gap, sigma, cfg) + d * layer_flux(nu, kappa, gap, sigma, cfg)

    return {
        "11": KernelEntry(k11, _side_exponent(nu, b)),
        "12": KernelEntry(k12, 0.0),
        "21": KernelEntry(k21, 0.0),
        "22": KernelEntry(k22, _side_exponent(nu, d)),
    }


def kernel_matrix(problem: IBVPProblem, t: float, tau: float, cfg: EvalConfig = DEFAULT_EVAL) -> np.ndarray:
    """
    The 2x2 kernel values K_ij(t, tau), 0 <= tau < t.

    Entries touching an infinite endpoint are zero. A diagonal entry at a point where the
    path does not move keeps its pulse value, e.g. (a/2) delta_{2nu}(t - tau).
    """
    if not 0 <= tau < t:
        raise DomainError(f"kernels are defined for 0 <= tau < t, got t={t}, tau={tau}")
    lo_t, hi_t = problem.domain_at(t)
    lo_tau, hi_tau = problem.domain_at(tau)
    if lo_t > hi_tau or lo_tau > hi_t:
        raise DomainError("boundary paths cross; kernel arguments would change sign")
    entries = _kernel_entries(problem, cfg)
    tau_arr = np.array([tau], dtype=float)
    out = np.zeros((2, 2))
    left_finite = not problem.left_path.is_infinite
    right_finite = not problem.right_path.is_infinite
    if left_finite:
        out[0, 0] = entries["11"].evaluate(t, tau_arr)[0]
    if right_finite:
        out[1, 1] = entries["22"].evaluate(t, tau_arr)[0]
    if left_finite and right_finite:
        out[0, 1] = entries["12"].evaluate(t, tau_arr)[0]
        out[1, 0] = entries["21"].evaluate(t, tau_arr)[0]
    return out


# --------------------------------------------------------------------------- initial-data terms


def _similarity_weight(mu: float, nu: float, w: float, cfg: EvalConfig) -> float:
    """W(-w; -nu, mu) for w >= 0."""
    if w <= 0.0:
        return float(rgamma(mu))
    return float(wright_via_r(w, nu, mu, cfg))


def _spread(
    problem: IBVPProblem, x: np.ndarray, t: np.ndarray, mu: float, odd: bool, cfg: EvalConfig
) -> np.ndarray:
    """
    (1/2) int_0^inf R_{mu,nu}(z, t) [f_ext(x + sqrt(kappa) z) +- f_ext(x - sqrt(kappa) z)] dz.

    Integrated in the similarity variable w = z t^{-nu}, where R becomes t^{mu+nu-1} W(-w; -nu, mu).
    """
    nu = problem.nu
    f_ext = problem.f_ext
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    stretch = problem.sqrt_kappa * t ** nu
    sign = -1.0 if odd else 1.0

    def integrand(w: float) -> np.ndarray:
        return _similarity_weight(mu, nu, w, cfg) * (f_ext(x + stretch * w) + sign * f_ext(x - stretch * w))

    value, error = quad_vec(
        integrand, 0.0, cfg.quad.tail_width, epsabs=cfg.quad.abs_tol, epsrel=cfg.quad.rel_tol, limit=cfg.quad.limit
    )
    logger.debug(f"Initial-data quadrature (mu={mu}) error estimate {error:.2e}")
    return 0.5 * t ** (mu + nu - 1.0) * value


def initial_u(problem: IBVPProblem, x: np.ndarray, t: np.ndarray, cfg: EvalConfig = DEFAULT_EVAL) -> np.ndarray:
    """int (1/(2 sqrt(kappa))) R_{mu0,nu}(|x - xi|/sqrt(kappa), t) f_ext(xi) dxi, mu0 by derivative kind."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    order = problem.kind.initial_order(problem.nu)
    value = problem.uniform_initial
    if value is not None:
        return value * np.asarray(delta_mu(order + problem.nu, t)) * np.ones_like(x)
    return _spread(problem, x, t, order, odd=False, cfg=cfg)


def initial_ux(problem: IBVPProblem, x: np.ndarray, t: np.ndarray, cfg: EvalConfig = DEFAULT_EVAL) -> np.ndarray:
    """x-derivative of ``initial_u``; zero for uniform initial data."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    if problem.uniform_initial is not None:
        return np.zeros(x.shape)
    order = problem.kind.initial_flux_order(problem.nu)
    return _spread(problem, x, t, order, odd=True, cfg=cfg) / problem.sqrt_kappa


# --------------------------------------------------------------------------- right-hand sides


def _side(problem: IBVPProblem, left: bool) -> Tuple[RobinBC, BoundaryPath]:
    return (problem.left, problem.left_path) if left else (problem.right, problem.right_path)


def _side_rhs(problem: IBVPProblem, grid: TimeGrid, left: bool, cfg: EvalConfig) -> Union[PulseSum, SampledFn]:
    bc, path = _side(problem, left)
    if path.is_infinite:
        return bc.data if bc.symbolic else SampledFn.from_callable(grid, bc.data_at, singular_exponent=None)

    uniform = problem.uniform_initial
    if uniform is not None:
        order = problem.kind.initial_order(problem.nu) + problem.nu
        shift = PulseSum.pulse(order, bc.coeff_u * uniform)
        if bc.symbolic:
            return bc.data - shift
        values = np.full(grid.n_steps + 1, np.nan)
        values[1:] = bc.data_at(grid.nodes[1:]) - shift(grid.nodes[1:])
        return SampledFn(grid, values)

    t = grid.nodes[1:]
    x = path(t)
    values = np.full(grid.n_steps + 1, np.nan)
    values[1:] = bc.data_at(t) - bc.coeff_u * initial_u(problem, x, t, cfg)
    if bc.coeff_ux != 0:
        values[1:] -= bc.coeff_ux * initial_ux(problem, x, t, cfg)
    return SampledFn(grid, values)


def compute_h(
    problem: IBVPProblem, grid: TimeGrid, cfg: EvalConfig = DEFAULT_EVAL
) -> Tuple[Union[PulseSum, SampledFn], Union[PulseSum, SampledFn]]:
    """
    Right-hand sides h^- and h^+ of the boundary Volterra equations.

    Uniform initial data give pulse sums when the boundary data are pulse sums, e.g.
    h^- = g^- - a c for Caputo and g^- - a c delta_{2nu} for Riemann-Liouville. At an
    infinite endpoint the initial-data terms vanish and h equals the boundary data.
    """
    return _side_rhs(problem, grid, True, cfg), _side_rhs(problem, grid, False, cfg)


def _sampled(h: Union[PulseSum, SampledFn], grid: TimeGrid) -> SampledFn:
    return h.sample(grid) if isinstance(h, PulseSum) else h


# --------------------------------------------------------------------------- solve


@dataclass(frozen=True)
class IBVPSolution:
    problem: IBVPProblem
    grid: TimeGrid
    phi_minus: Density
    phi_plus: Density
    cfg: EvalConfig = DEFAULT_EVAL
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def density_samples(self, left: bool = True) -> SampledFn:
        """Node samples of a density; Dirac parts are left out, node 0 is unset."""
        density = self.phi_minus if left else self.phi_plus
        if isinstance(density, PanelDensity):
            return density.at_nodes(self.grid)
        regular = PulseSum({o: c for o, c in density if o > 0})
        values = np.full(self.grid.n_steps + 1, np.nan)
        values[1:] = regular(self.grid.nodes[1:]) if not regular.is_zero else 0.0
        return SampledFn(self.grid, values)


def _pulse_kernel(coeff_u: float, coeff_ux: float, nu: float, kappa: float, left: bool) -> Dict[float, float]:
    """Same-side kernel at a motionless boundary as {pulse order: coefficient}."""
    flux_sign = -1.0 if left else 1.0
    terms: Dict[float, float] = {}
    if coeff_u != 0:
        terms[2.0 * nu] = coeff_u / 2.0
    if coeff_ux != 0:
        terms[nu] = terms.get(nu, 0.0) + flux_sign * coeff_ux / (2.0 * math.sqrt(kappa))
    return terms


def _pulse_entry(terms: Dict[float, float]) -> KernelEntry:
    exponent = min(terms) - 1.0

    def evaluate(t: float, tau: np.ndarray) -> np.ndarray:
        sigma = t - np.asarray(tau, dtype=float)
        return sum(coeff * np.asarray(delta_mu(order, sigma)) for order, coeff in terms.items())

    return KernelEntry(evaluate, exponent)


def _solve_scalar_side(
    problem: IBVPProblem,
    grid: TimeGrid,
    h: Union[PulseSum, SampledFn],
    left: bool,
    entry: Optional[KernelEntry],
    condition_limit: float,
) -> Tuple[Density, str]:
    bc, path = _side(problem, left)
    motionless = path.is_infinite or path.is_constant
    terms = _pulse_kernel(bc.coeff_u, bc.coeff_ux, problem.nu, problem.kappa, left)
    if motionless and len(terms) == 1 and isinstance(h, PulseSum):
        ((order, coeff),) = terms.items()
        return abel_invert(h / coeff, order), "abel"
    if entry is None:
        entry = _pulse_entry(terms)
    solution = solve_first_kind(KernelMatrix.scalar(entry), _sampled(h, grid), None, grid, condition_limit)
    return solution.densities[0], "volterra"


def solve(
    problem: IBVPProblem,
    grid: TimeGrid,
    cfg: EvalConfig = DEFAULT_EVAL,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> IBVPSolution:
    """
    Determine the boundary densities phi^- and phi^+.

    Both endpoints infinite: phi^+- = 0. One endpoint infinite: the finite side is a scalar
    equation and the infinite side's density follows from its own data alone. Both finite:
    the coupled 2x2 system.
    """
    if grid.n_steps < 16:
        raise DomainError(f"IBVP grids need n_steps >= 16, got {grid.n_steps}")
    left_inf = problem.left_path.is_infinite
    right_inf = problem.right_path.is_infinite
    diagnostics: Dict[str, Any] = {}

    if left_inf and right_inf:
        logger.info("Both endpoints infinite: pure initial value problem")
        return IBVPSolution(problem, grid, PulseSum.zero(), PulseSum.zero(), cfg, {"route": "free"})

    h_minus, h_plus = compute_h(problem, grid, cfg)
    entries = _kernel_entries(problem, cfg)

    if left_inf or right_inf:
        finite_left = right_inf
        h_finite = h_minus if finite_left else h_plus
        h_infinite = h_plus if finite_left else h_minus
        entry = entries["11"] if finite_left else entries["22"]
        phi_finite, finite_route = _solve_scalar_side(problem, grid, h_finite, finite_left, entry, condition_limit)
        phi_infinite, infinite_route = _solve_scalar_side(
            problem, grid, h_infinite, not finite_left, None, condition_limit
        )
        if finite_left:
            phi_minus, phi_plus = phi_finite, phi_infinite
            diagnostics["route"] = f"left:{finite_route},right:{infinite_route}"
        else:
            phi_minus, phi_plus = phi_infinite, phi_finite
            diagnostics["route"] = f"left:{infinite_route},right:{finite_route}"
    else:
        kernel = KernelMatrix.pair(entries["11"], entries["12"], entries["21"], entries["22"])
        solution = solve_first_kind(
            kernel, _sampled(h_minus, grid), _sampled(h_plus, grid), grid, condition_limit
        )
        phi_minus, phi_plus = solution.densities
        diagnostics["route"] = "volterra-2x2"
        diagnostics["residual_norms"] = solution.residual_norms

    logger.info(f"Solved IBVP ({problem.kind.value}, nu={problem.nu}) by {diagnostics['route']}")
    return IBVPSolution(problem, grid, phi_minus, phi_plus, cfg, diagnostics)


# --------------------------------------------------------------------------- evaluation


def _check_point(solution: IBVPSolution, x: float, t: float) -> None:
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    numeric = any(isinstance(p, PanelDensity) for p in (solution.phi_minus, solution.phi_plus))
    if numeric and t > solution.grid.t_end * (1 + 1e-12):
        raise DomainError(f"t={t} lies beyond the solved time span {solution.grid.t_end}")
    lo, hi = solution.problem.domain_at(t)
    if x < lo - BOUNDARY_ATOL or x > hi + BOUNDARY_ATOL:
        raise DomainError(f"x={x} lies outside [{lo}, {hi}] at t={t}")


def _layer_history(solution: IBVPSolution, x: float, t: float, left: bool, flux: bool) -> float:
    problem = solution.problem
    density = solution.phi_minus if left else solution.phi_plus
    path = problem.left_path if left else problem.right_path
    if path.is_infinite:
        return 0.0
    nu, kappa, cfg = problem.nu, problem.kappa, solution.cfg

    if isinstance(density, PulseSum):
        if density.is_zero:
            return 0.0
        distance = abs(x - float(path(t))) / problem.sqrt_kappa
        if flux:
            value = r_convolve_pulses(FracIndex(nu, nu), distance, t, density, cfg) / (2.0 * problem.sqrt_kappa)
            return float(-value if left else value)
        return float(0.5 * r_convolve_pulses(FracIndex(2.0 * nu, nu), distance, t, density, cfg))

    def gap(tau: np.ndarray) -> np.ndarray:
        return x - path(tau) if left else path(tau) - x

    if flux:
        sign = -1.0 if left else 1.0
        entry = KernelEntry(lambda s, tau: sign * layer_flux(nu, kappa, gap(tau), s - tau, cfg), nu - 1.0)
    else:
        entry = KernelEntry(lambda s, tau: layer_u(nu, kappa, gap(tau), s - tau, cfg), 2.0 * nu - 1.0)
    return density.convolve(entry, t)


def eval_u(solution: IBVPSolution, x: float, t: float) -> float:
    """u(x, t) for eta^-(t) <= x <= eta^+(t)."""
    _check_point(solution, x, t)
    value = float(initial_u(solution.problem, x, t, solution.cfg))
    value += _layer_history(solution, x, t, left=True, flux=False)
    value += _layer_history(solution, x, t, left=False, flux=False)
    return value


def eval_ux(solution: IBVPSolution, x: float, t: float) -> float:
    """du/dx(x, t) for eta^-(t) <= x <= eta^+(t)."""
    _check_point(solution, x, t)
    value = float(initial_ux(solution.problem, x, t, solution.cfg))
    value += _layer_history(solution, x, t, left=True, flux=True)
    value += _layer_history(solution, x, t, left=False, flux=True)
    return value


def boundary_residuals(solution: IBVPSolution, times: Sequence[float]) -> Dict[str, np.ndarray]:
    """coeff_u u + coeff_ux u_x - g at each finite boundary and each requested time."""
    problem = solution.problem
    report: Dict[str, np.ndarray] = {}
    for name, bc, path in (("left", problem.left, problem.left_path), ("right", problem.right, problem.right_path)):
        if path.is_infinite:
            continue
        residuals = []
        for t in times:
            x = float(path(t))
            value = bc.coeff_u * eval_u(solution, x, t) - float(bc.data_at(np.array([t]))[0])
            if bc.coeff_ux != 0:
                value += bc.coeff_ux * eval_ux(solution, x, t)
            residuals.append(value)
        report[name] = np.asarray(residuals)
    return report
