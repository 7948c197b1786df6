"""
One-phase fractional Stefan problems.

Problem one: u = 1 at x = 0, melting front eta(t) = 2 alpha t^nu. The similarity ansatz reduces
the problem to a transcendental equation for alpha, after which u and eta are explicit.

Problem two: u = 0 on the front, u -> -1 far away, eta(0) = 0. The front and the boundary
density phi^- are advanced together by time marching; each step solves a 2x2 nonlinear
system with damped Newton.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf, gamma, rgamma

from fracdiff.errors import AmbiguousRootError, ConvergenceError, DomainError, NoRootError, UnsupportedProblemError
from fracdiff.fracquad import caputo_at
from fracdiff.grid import SampledFn, TimeGrid
from fracdiff.ibvp import DerivativeKind, layer_flux, layer_u
from fracdiff.pulses import PulseSum
from fracdiff.specfun import DEFAULT_EVAL, EvalConfig, FracIndex, r_eval, wright_via_r
from fracdiff.volterra import KernelEntry, PanelDensity, panel_weights

logger = logging.getLogger(__name__)

ALPHA_BRACKET = (1e-6, 8.0)
ALPHA_SCAN_POINTS = 400
ALPHA_XTOL = 1e-13


def _check_nu(nu: float) -> None:
    if not 0 < nu <= 0.5:
        raise DomainError(f"nu must lie in (0, 1/2], got {nu}")


def _front_wright(alpha: Union[float, np.ndarray], nu: float, beta: float, cfg: EvalConfig) -> np.ndarray:
    """W(-2 alpha; -nu, beta)."""
    return np.asarray(wright_via_r(2.0 * np.asarray(alpha, dtype=float), nu, beta, cfg), dtype=float)


def stefan1_equation(alpha: Union[float, np.ndarray], nu: float, r: float, cfg: EvalConfig = DEFAULT_EVAL) -> np.ndarray:
    """(2 alpha r Gamma(1+nu)/Gamma(1-nu)) (1 - W(-2a;-nu,1)) - W(-2a;-nu,1-nu)."""
    alpha = np.asarray(alpha, dtype=float)
    w1 = _front_wright(alpha, nu, 1.0, cfg)
    w2 = _front_wright(alpha, nu, 1.0 - nu, cfg)
    return 2.0 * alpha * r * gamma(1.0 + nu) * rgamma(1.0 - nu) * (1.0 - w1) - w2


def _sign_brackets(xs: np.ndarray, values: np.ndarray) -> List[Tuple[float, float]]:
    signs = np.sign(values)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    return [(float(xs[i]), float(xs[i + 1])) for i in flips]


def _unique_root(func, lo: float, hi: float, what: str) -> float:
    xs = np.linspace(lo, hi, ALPHA_SCAN_POINTS)
    values = np.asarray(func(xs), dtype=float)
    zeros = xs[values == 0.0]
    if zeros.size:
        return float(zeros[0])
    brackets = _sign_brackets(xs, values)
    if not brackets:
        raise NoRootError(f"{what}: no sign change on [{lo}, {hi}]", (lo, hi))
    if len(brackets) > 1:
        raise AmbiguousRootError(f"{what}: {len(brackets)} sign changes on [{lo}, {hi}]", brackets)
    a, b = brackets[0]
    return float(brentq(lambda x: float(func(x)), a, b, xtol=ALPHA_XTOL))


def stefan1_alpha(nu: float, r: float, cfg: EvalConfig = DEFAULT_EVAL) -> float:
    """
    Similarity constant alpha of problem one.

    Scans ``ALPHA_BRACKET`` for sign changes of ``stefan1_equation`` and refines the single
    one with Brent's method.

    Raises:
        NoRootError: no sign change in the bracket.
        AmbiguousRootError: more than one sign change.
    """
    _check_nu(nu)
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    alpha = _unique_root(lambda a: stefan1_equation(a, nu, r, cfg), *ALPHA_BRACKET, what="alpha equation")
    logger.debug(f"alpha(nu={nu}, r={r}) = {alpha!r}")
    return alpha


def neumann_alpha(r: float) -> float:
    """Root of r sqrt(pi) alpha erf(alpha) exp(alpha^2) = 1, the classical Neumann constant."""
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")

    def equation(alpha: float) -> float:
        return r * math.sqrt(math.pi) * alpha * erf(alpha) * math.exp(alpha * alpha) - 1.0

    return float(brentq(equation, 1e-12, 8.0, xtol=ALPHA_XTOL))


@dataclass(frozen=True)
class Stefan1Solution:
    """Closed-form solution of problem one; u = u0 + (1 - u0) R_{1,nu}(x, t) on 0 <= x <= eta(t)."""

    nu: float
    r: float
    alpha: float
    u0: float
    kind: DerivativeKind = DerivativeKind.CAPUTO
    cfg: EvalConfig = field(default=DEFAULT_EVAL, compare=False, repr=False)

    def eta(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return 2.0 * self.alpha * np.asarray(t, dtype=float) ** self.nu

    def _check(self, x: np.ndarray, t: np.ndarray) -> None:
        if np.any(~(t > 0)):
            raise DomainError("t must be > 0")
        if np.any(x < 0) or np.any(x > self.eta(t) * (1 + 1e-12)):
            raise DomainError("x must lie in [0, eta(t)]")

    def u(self, x: Union[float, np.ndarray], t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        self._check(x, t)
        value = self.u0 + (1.0 - self.u0) * np.asarray(r_eval(FracIndex(1.0, self.nu), x, t, self.cfg))
        return float(value) if value.ndim == 0 else value

    def ux(self, x: Union[float, np.ndarray], t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        self._check(x, t)
        value = -(1.0 - self.u0) * np.asarray(r_eval(FracIndex(1.0 - self.nu, self.nu), x, t, self.cfg))
        return float(value) if value.ndim == 0 else value

    def profile(self, t: float, n_points: int = 51) -> Tuple[np.ndarray, np.ndarray]:
        """(x, u) on n_points equispaced abscissae of [0, eta(t)]."""
        if n_points < 2:
            raise DomainError("a profile needs at least two points")
        xs = np.linspace(0.0, float(self.eta(t)), n_points)
        return xs, np.asarray(self.u(xs, t))


def _u0_from_alpha(alpha: float, nu: float, cfg: EvalConfig) -> float:
    w1 = float(_front_wright(alpha, nu, 1.0, cfg))
    return -w1 / (1.0 - w1)


def stefan1_solve(
    nu: float,
    r: float,
    kind: Union[str, DerivativeKind] = DerivativeKind.CAPUTO,
    cfg: EvalConfig = DEFAULT_EVAL,
) -> Stefan1Solution:
    """
    Solve problem one for (alpha, u0) given (nu, r).

    Raises:
        UnsupportedProblemError: Riemann-Liouville kind with nu < 1/2, where the similarity
            ansatz has no solution.
    """
    kind = DerivativeKind.parse(kind)
    _check_nu(nu)
    if kind is DerivativeKind.RIEMANN_LIOUVILLE and nu < 0.5:
        raise UnsupportedProblemError(
            f"the similarity ansatz fails for the Riemann-Liouville derivative at nu={nu} < 1/2; "
            "see rl_ansatz_check"
        )
    alpha = stefan1_alpha(nu, r, cfg)
    u0 = _u0_from_alpha(alpha, nu, cfg)
    logger.info(f"Problem one (nu={nu}, r={r}): alpha={alpha!r}, u0={u0!r}")
    return Stefan1Solution(nu=nu, r=r, alpha=alpha, u0=u0, kind=kind, cfg=cfg)


def stefan1_from_u0(nu: float, u0: float, cfg: EvalConfig = DEFAULT_EVAL) -> Stefan1Solution:
    """Inverse route: alpha from W(-2 alpha; -nu, 1) = -u0/(1 - u0), then r from the Stefan condition."""
    _check_nu(nu)
    target = -u0 / (1.0 - u0)
    if not 0 < target < 1:
        raise DomainError(f"u0={u0} gives W(-2 alpha; -nu, 1) = {target}, outside (0, 1)")
    alpha = _unique_root(
        lambda a: _front_wright(a, nu, 1.0, cfg) - target, *ALPHA_BRACKET, what="front Wright equation"
    )
    w2 = float(_front_wright(alpha, nu, 1.0 - nu, cfg))
    r = (1.0 - u0) * gamma(1.0 - nu) * w2 / (2.0 * alpha * gamma(1.0 + nu))
    return Stefan1Solution(nu=nu, r=float(r), alpha=alpha, u0=u0, cfg=cfg)


def stefan1_residuals(sol: Stefan1Solution, t_samples: Sequence[float]) -> Dict[str, np.ndarray]:
    """
    Residuals of the front condition and the fractional Stefan condition at each sample time.

    right_bc = |R_{1,nu}(eta, t) + u0/(1 - u0)|,
    stefan = |-r D^{2nu} eta + (1 - u0) R_{1-nu,nu}(eta, t)| with D^{2nu} eta in closed form.
    """
    t = np.asarray(t_samples, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("sample times must be > 0")
    nu = sol.nu
    eta = np.asarray(sol.eta(t))
    right_bc = np.abs(np.asarray(r_eval(FracIndex(1.0, nu), eta, t, sol.cfg)) + sol.u0 / (1.0 - sol.u0))
    d_eta = 2.0 * sol.alpha * gamma(1.0 + nu) * rgamma(1.0 - nu) * t ** (-nu)
    flux = (1.0 - sol.u0) * np.asarray(r_eval(FracIndex(1.0 - nu, nu), eta, t, sol.cfg))
    stefan = np.abs(-sol.r * d_eta + flux)
    return {"t": t, "right_bc": right_bc, "stefan": stefan}


@dataclass(frozen=True)
class AnsatzReport:
    t: np.ndarray
    values: np.ndarray
    u0: float

    @property
    def spread(self) -> float:
        return float(np.max(self.values) - np.min(self.values))

    @property
    def trivial(self) -> bool:
        """u0 = 0 makes the expression constant; the exclusion only concerns u0 != 0."""
        return self.u0 == 0.0


def rl_ansatz_check(
    nu: float,
    alpha: float,
    t_samples: Sequence[float],
    u0: Optional[float] = None,
    cfg: EvalConfig = DEFAULT_EVAL,
) -> AnsatzReport:
    """
    Evaluate W(-2a;-nu,1) - u0 t^{2nu-1} W(-2a;-nu,2nu) + u0 t^{2nu-1}/Gamma(2nu) over t.

    The Riemann-Liouville front condition under the similarity ansatz requires this to be
    constant in t, which fails for nu < 1/2 and u0 != 0. u0 defaults to the Caputo value
    implied by alpha.
    """
    if not 0 < nu < 0.5:
        raise DomainError(f"the ansatz check needs nu in (0, 1/2), got {nu}")
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    t = np.asarray(t_samples, dtype=float)
    if t.size < 2 or np.any(~(t > 0)):
        raise DomainError("need at least two sample times, all > 0")
    if u0 is None:
        u0 = _u0_from_alpha(alpha, nu, cfg)
    w1 = float(_front_wright(alpha, nu, 1.0, cfg))
    w_2nu = float(_front_wright(alpha, nu, 2.0 * nu, cfg))
    power = t ** (2.0 * nu - 1.0)
    values = w1 - u0 * power * w_2nu + u0 * power * rgamma(2.0 * nu)
    return AnsatzReport(t=t, values=values, u0=float(u0))


# --------------------------------------------------------------------------- problem two


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iter: int = 50
    damping: float = 0.5
    startup_substeps: int = 4
    max_backtracks: int = 12

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise DomainError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1 or self.startup_substeps < 1:
            raise DomainError("max_iter and startup_substeps must be >= 1")
        if not 0 < self.damping < 1:
            raise DomainError(f"damping must lie in (0, 1), got {self.damping}")


DEFAULT_NEWTON = NewtonConfig()


@dataclass(frozen=True)
class Stefan2State:
    """
    Result of problem two time marching.

    ``edges``, ``eta_edges`` and ``phi_panels`` describe the computation (start-up sub-panels
    included); ``eta``, ``phi_minus`` and the residuals are reported at the grid nodes.
    """

    kind: DerivativeKind
    nu: float
    r: float
    grid: TimeGrid
    edges: np.ndarray
    eta_edges: np.ndarray
    phi_panels: np.ndarray
    eta: SampledFn
    phi_minus: SampledFn
    residual_bc: np.ndarray
    residual_stefan: np.ndarray
    iterations: np.ndarray
    cfg: EvalConfig = field(default=DEFAULT_EVAL, compare=False, repr=False)

    @property
    def density(self) -> PanelDensity:
        return PanelDensity(self.edges, self.phi_panels)

    @property
    def direction(self) -> str:
        """One of constant, increasing, decreasing or non-monotone."""
        steps = np.diff(self.eta_edges)
        slack = 1e-12 * max(1.0, float(np.max(np.abs(self.eta_edges))))
        rising = bool(np.all(steps >= -slack))
        falling = bool(np.all(steps <= slack))
        if rising and falling:
            return "constant"
        if rising:
            return "increasing"
        if falling:
            return "decreasing"
        return "non-monotone"

    @property
    def monotone(self) -> bool:
        return self.direction != "non-monotone"

    def eta_at(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return np.interp(t, self.edges, self.eta_edges)


def _forcing(kind: DerivativeKind, nu: float) -> PulseSum:
    """h^-(t): 1 for Caputo, delta_{2nu}(t) for Riemann-Liouville."""
    return PulseSum.constant(1.0) if kind is DerivativeKind.CAPUTO else PulseSum.pulse(2.0 * nu)


def _startup_edges(grid: TimeGrid, substeps: int) -> np.ndarray:
    first = np.linspace(0.0, grid.h, substeps + 1)
    return np.concatenate([first, grid.nodes[2:]])


class _StepSystem:
    """The two discretized equations at edge n as functions of (phi_n, eta_n)."""

    def __init__(self, nu: float, r: float, edges: np.ndarray, eta: np.ndarray, phi: np.ndarray, n: int, h_n: float, cfg: EvalConfig):
        self.nu = nu
        self.r = r
        self.edges = edges[: n + 1]
        self.eta = eta[: n + 1].copy()
        self.phi = phi[:n]
        self.h_n = h_n
        self.cfg = cfg

    def weights(self, eta_n: float) -> Tuple[np.ndarray, np.ndarray, float]:
        eta = self.eta
        eta[-1] = eta_n
        edges = self.edges
        t_n = edges[-1]
        nu, cfg = self.nu, self.cfg

        def path(tau: np.ndarray) -> np.ndarray:
            return np.interp(tau, edges, eta)

        w_u = panel_weights(lambda t, tau: layer_u(nu, 1.0, eta_n - path(tau), t - tau, cfg), 2.0 * nu - 1.0, t_n, edges[:-1], edges[1:])
        w_f = panel_weights(lambda t, tau: layer_flux(nu, 1.0, eta_n - path(tau), t - tau, cfg), nu - 1.0, t_n, edges[:-1], edges[1:])
        d_eta = caputo_at(eta, edges, 2.0 * nu)
        return w_u, w_f, d_eta

    def residual(self, phi_n: float, eta_n: float) -> Tuple[np.ndarray, np.ndarray]:
        """(residual vector, d residual / d phi_n)."""
        w_u, w_f, d_eta = self.weights(eta_n)
        phi = self.phi.copy()
        phi[-1] = phi_n
        bc = float(np.dot(w_u, phi)) - self.h_n
        stefan = self.r * d_eta - 1.0 + float(np.dot(w_f, phi))
        return np.array([bc, stefan]), np.array([w_u[-1], w_f[-1]])

    def scales(self, eta_n: float) -> np.ndarray:
        eta = self.eta
        eta[-1] = eta_n
        d_eta = caputo_at(eta, self.edges, 2.0 * self.nu)
        return np.array([max(1.0, abs(self.h_n)), max(1.0, abs(self.r * d_eta))])


def _newton(system: _StepSystem, phi_n: float, eta_n: float, ncfg: NewtonConfig, step: int) -> Tuple[float, float, np.ndarray, int]:
    residual, d_phi = system.residual(phi_n, eta_n)
    for iteration in range(ncfg.max_iter + 1):
        scales = system.scales(eta_n)
        if np.all(np.abs(residual) <= ncfg.tol * scales):
            return phi_n, eta_n, residual, iteration
        if iteration == ncfg.max_iter:
            break
        delta = 1e-7 * max(abs(eta_n), 1e-6)
        shifted, _ = system.residual(phi_n, eta_n + delta)
        jacobian = np.column_stack([d_phi, (shifted - residual) / delta])
        try:
            update = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError as e:
            raise ConvergenceError(f"Newton step {step}: singular Jacobian ({e})") from e

        norm = float(np.max(np.abs(residual) / scales))
        lam = 1.0
        for _ in range(ncfg.max_backtracks):
            trial_phi = phi_n + lam * update[0]
            trial_eta = eta_n + lam * update[1]
            trial, trial_d = system.residual(trial_phi, trial_eta)
            if np.all(np.isfinite(trial)) and float(np.max(np.abs(trial) / scales)) < norm:
                break
            lam *= ncfg.damping
        phi_n, eta_n, residual, d_phi = trial_phi, trial_eta, trial, trial_d
        logger.debug(f"Newton step {step}, iteration {iteration + 1}: residual {residual}, damping {lam}")

    raise ConvergenceError(
        f"Newton iteration did not converge at step {step} after {ncfg.max_iter} iterations; "
        f"residuals {residual.tolist()}"
    )


def stefan2_solve(
    kind: Union[str, DerivativeKind],
    nu: float,
    r: float,
    grid: TimeGrid,
    cfg: EvalConfig = DEFAULT_EVAL,
    newton: NewtonConfig = DEFAULT_NEWTON,
) -> Stefan2State:
    """
    March problem two over ``grid``.

    At each edge t_n the left boundary condition and the fractional Stefan condition are
    imposed with the density constant on every panel and eta linear between edges. The
    first grid step is split into ``newton.startup_substeps`` sub-panels.

    Raises:
        DomainError: nu, r or the grid out of range.
        ConvergenceError: Newton failed at some step.
    """
    kind = DerivativeKind.parse(kind)
    _check_nu(nu)
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    if grid.n_steps < 32:
        raise DomainError(f"Problem two needs n_steps >= 32, got {grid.n_steps}")

    forcing = _forcing(kind, nu)
    edges = _startup_edges(grid, newton.startup_substeps)
    count = len(edges) - 1
    eta = np.zeros(count + 1)
    phi = np.zeros(count)
    res_bc = np.zeros(count + 1)
    res_stefan = np.zeros(count + 1)
    iterations = np.zeros(count + 1, dtype=int)

    for n in range(1, count + 1):
        t_n = edges[n]
        h_n = float(forcing(t_n))
        if n == 1:
            phi_guess = 2.0 * h_n / float(PulseSum.pulse(2.0 * nu + 1.0)(t_n))
            lead = 1.0 - 0.5 * phi_guess * float(PulseSum.pulse(nu + 1.0)(t_n))
            eta_guess = gamma(2.0 - 2.0 * nu) * t_n ** (2.0 * nu) * lead / r
        else:
            phi_guess = phi[n - 2]
            eta_guess = eta[n - 1]
            if n > 2:
                eta_guess += (eta[n - 1] - eta[n - 2]) * (t_n - edges[n - 1]) / (edges[n - 1] - edges[n - 2])
        eta[n] = eta_guess
        system = _StepSystem(nu, r, edges, eta, phi, n, h_n, cfg)
        phi[n - 1], eta[n], residual, iterations[n] = _newton(system, phi_guess, eta_guess, newton, n)
        res_bc[n], res_stefan[n] = np.abs(residual)

    node_index = np.concatenate([[0], newton.startup_substeps + np.arange(grid.n_steps)])
    eta_nodes = SampledFn(grid, eta[node_index])
    density = PanelDensity(edges, phi)
    phi_nodes = density.at_nodes(grid)

    state = Stefan2State(
        kind=kind,
        nu=nu,
        r=r,
        grid=grid,
        edges=edges,
        eta_edges=eta,
        phi_panels=phi,
        eta=eta_nodes,
        phi_minus=phi_nodes,
        residual_bc=res_bc[node_index],
        residual_stefan=res_stefan[node_index],
        iterations=iterations[node_index],
        cfg=cfg,
    )
    if not state.monotone:
        logger.warning(
            f"Problem two front is not monotone (nu={nu}, r={r}, {kind.value}): "
            f"eta ranges over [{float(eta.min())!r}, {float(eta.max())!r}]"
        )
    logger.info(
        f"Problem two ({kind.value}, nu={nu}, r={r}): eta({grid.t_end})={float(eta[-1])!r}, "
        f"max residuals {res_bc.max():.2e}/{res_stefan.max():.2e}"
    )
    return state


def stefan2_eval_u(state: Stefan2State, x: float, t: float) -> float:
    """u(x, t) = -h^-(t) + int_0^t (1/2) R_{2nu,nu}(x - eta(tau), t - tau) phi^-(tau) dtau for x >= eta(t)."""
    if not 0 < t <= state.grid.t_end * (1 + 1e-12):
        raise DomainError(f"t must lie in (0, {state.grid.t_end}], got {t}")
    front = float(state.eta_at(t))
    if x < front - 1e-12 * max(1.0, abs(front)):
        raise DomainError(f"x={x} lies behind the front eta({t})={front}")
    nu, cfg = state.nu, state.cfg
    edges, eta_edges = state.edges, state.eta_edges

    def kernel(s: float, tau: np.ndarray) -> np.ndarray:
        return layer_u(nu, 1.0, x - np.interp(tau, edges, eta_edges), s - tau, cfg)

    history = state.density.convolve(KernelEntry(kernel, 2.0 * nu - 1.0), t)
    return -float(_forcing(state.kind, nu)(t)) + history
