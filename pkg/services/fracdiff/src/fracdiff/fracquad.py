"""
Fractional integrals and derivatives of functions sampled on uniform grids.

- Riemann-Liouville integrals use product integration: the sampled function is
  interpolated piecewise linearly and integrated exactly against (t - tau)^{mu-1}/Gamma(mu).
  A function that blows up like t^p at the origin has its first panel integrated exactly
  against t^p instead.
- Caputo derivatives use the L1 scheme.
- Riemann-Liouville derivatives differentiate the integral of order 1 - mu numerically.

The residual evaluators sample R_{mu,nu}(a, .) and plug it into the fractional integral
equation and the fractional ODE it satisfies.
"""

import logging
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import gamma, hyp2f1, rgamma

from fracdiff.errors import DomainError
from fracdiff.grid import SampledFn, TimeGrid
from fracdiff.specfun import DEFAULT_EVAL, EvalConfig, FracIndex, r_eval

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def product_weights(mu: float, n_steps: int) -> np.ndarray:
    """
    Weights W with D^{-mu} f(t_n) ~ h^mu * sum_j W[n, j] f_j for piecewise-linear f.

    The returned array is read-only and shared between callers.
    """
    if mu <= 0:
        raise DomainError(f"integration order must be > 0, got {mu}")
    k = np.arange(1, n_steps + 1, dtype=float)
    p1 = k ** (mu + 1.0) - (k - 1.0) ** (mu + 1.0)
    p0 = k ** mu - (k - 1.0) ** mu
    left = np.zeros(n_steps + 2)
    right = np.zeros(n_steps + 2)
    left[1 : n_steps + 1] = (p1 / (mu + 1.0) - (k - 1.0) * p0 / mu) * rgamma(mu)
    right[1 : n_steps + 1] = (k * p0 / mu - p1 / (mu + 1.0)) * rgamma(mu)

    n = np.arange(n_steps + 1)[:, None]
    j = np.arange(n_steps + 1)[None, :]
    distance = np.clip(n - j, 0, n_steps)
    weights = np.where(j <= n - 1, left[distance], 0.0)
    weights = weights + np.where((j >= 1) & (j <= n), right[np.clip(distance + 1, 0, n_steps + 1)], 0.0)
    weights.setflags(write=False)
    return weights


def singular_panel_moment(mu: float, p: float, n: np.ndarray) -> np.ndarray:
    """(1/Gamma(mu)) int_0^1 (n - s)^{mu-1} s^p ds for integer n >= 1."""
    n = np.asarray(n, dtype=float)
    moments = np.empty_like(n)
    first = n == 1
    moments[first] = gamma(p + 1.0) * rgamma(mu + p + 1.0)
    rest = ~first
    nr = n[rest]
    moments[rest] = nr ** (mu - 1.0) / (p + 1.0) * hyp2f1(1.0 - mu, p + 1.0, p + 2.0, 1.0 / nr) * rgamma(mu)
    return moments


@lru_cache(maxsize=64)
def l1_weights(mu: float, n_steps: int) -> np.ndarray:
    """b_k = (k+1)^{1-mu} - k^{1-mu}, k = 0..n_steps-1."""
    k = np.arange(n_steps, dtype=float)
    weights = (k + 1.0) ** (1.0 - mu) - k ** (1.0 - mu)
    weights.setflags(write=False)
    return weights


def rl_integral(f: SampledFn, mu: float) -> SampledFn:
    """Riemann-Liouville integral D^{-mu} f at every node."""
    if mu <= 0:
        raise DomainError(f"integration order must be > 0, got {mu}")
    grid = f.grid
    values = f.values.copy()
    p = f.singular_exponent
    if p is None and f.origin_unset:
        raise DomainError("f is unset at t = 0; declare its singular exponent")

    weights = product_weights(mu, grid.n_steps)
    if p is None:
        integral = weights @ values
        integral[0] = 0.0
        return SampledFn(grid, grid.h ** mu * integral)

    # First panel carries f_1 (t/h)^p instead of the linear interpolant
    n = np.arange(1, grid.n_steps + 1)
    k = n.astype(float)
    right_first = (k * (k ** mu - (k - 1.0) ** mu) / mu - (k ** (mu + 1.0) - (k - 1.0) ** (mu + 1.0)) / (mu + 1.0)) * rgamma(mu)
    values[0] = 0.0
    integral = weights @ values
    integral[1:] += (singular_panel_moment(mu, p, n) - right_first) * values[1]
    integral *= grid.h ** mu

    order = mu + p
    if order > 1e-12:
        integral[0] = 0.0
        return SampledFn(grid, integral)
    if order > -1e-12:
        integral[0] = values[1] * grid.h ** (-p) * gamma(p + 1.0)
        return SampledFn(grid, integral)
    integral[0] = np.nan
    return SampledFn(grid, integral, singular_exponent=order)


def _require_regular(f: SampledFn, what: str) -> None:
    if f.is_singular or f.origin_unset:
        raise DomainError(f"{what} needs a finite value at t = 0")


def caputo_derivative(f: SampledFn, mu: float) -> SampledFn:
    """L1 approximation of the Caputo derivative of order mu in (0, 1); node 0 is unset."""
    if not 0 < mu < 1:
        raise DomainError(f"Caputo order must lie in (0, 1), got {mu}")
    _require_regular(f, "the Caputo derivative")
    grid = f.grid
    increments = np.diff(f.values)
    b = l1_weights(mu, grid.n_steps)
    derivative = np.empty(grid.n_steps + 1)
    derivative[0] = np.nan
    derivative[1:] = np.convolve(b, increments)[: grid.n_steps] * grid.h ** (-mu) * rgamma(2.0 - mu)
    return SampledFn(grid, derivative)


def caputo_at(values: np.ndarray, edges: np.ndarray, mu: float) -> float:
    """
    L1 Caputo derivative of order mu in (0, 1] at edges[-1] on arbitrary panel edges.

    ``values`` are the samples at ``edges``; mu = 1 gives the backward difference.
    """
    values = np.asarray(values, dtype=float)
    edges = np.asarray(edges, dtype=float)
    if len(values) != len(edges) or len(edges) < 2:
        raise DomainError("need matching values and edges, at least two of each")
    slopes = np.diff(values) / np.diff(edges)
    if mu == 1.0:
        return float(slopes[-1])
    if not 0 < mu < 1:
        raise DomainError(f"Caputo order must lie in (0, 1], got {mu}")
    t_n = edges[-1]
    span = (t_n - edges[:-1]) ** (1.0 - mu) - (t_n - edges[1:]) ** (1.0 - mu)
    return float(np.dot(slopes, span) * rgamma(2.0 - mu))


def rl_derivative(f: SampledFn, mu: float) -> SampledFn:
    """Riemann-Liouville derivative d/dt D^{-(1-mu)} f, mu in (0, 1); node 0 is unset."""
    if not 0 < mu < 1:
        raise DomainError(f"Riemann-Liouville order must lie in (0, 1), got {mu}")
    grid = f.grid
    integral = rl_integral(f, 1.0 - mu)
    derivative = np.empty(grid.n_steps + 1)
    derivative[0] = np.nan
    if integral.origin_unset:
        derivative[1:] = np.gradient(integral.values[1:], grid.h, edge_order=2)
    else:
        derivative[1:] = np.gradient(integral.values, grid.h, edge_order=2)[1:]

    exponent: Optional[float] = None
    if f.is_singular:
        exponent = f.singular_exponent - mu
    elif f.values[0] != 0.0:
        exponent = -mu
    if exponent is not None and not -1.0 < exponent < 0.0:
        exponent = None
    return SampledFn(grid, derivative, singular_exponent=exponent)


def _sample_r(idx: FracIndex, a: float, grid: TimeGrid, cfg: EvalConfig) -> SampledFn:
    if idx.mu == 0:
        raise DomainError("mu = 0 is excluded: R_{0,nu}(a, .) is not sampled by these residuals")
    if not idx.series_admissible:
        raise DomainError(f"residual checks need nu <= 1/2, got {idx.nu}")
    if a <= 0:
        raise DomainError(f"a must be > 0, got {a}")
    values = np.zeros(grid.n_steps + 1)
    values[1:] = r_eval(idx, a, grid.nodes[1:], cfg)
    return SampledFn(grid, values)


def residual_int_eq(idx: FracIndex, a: float, grid: TimeGrid, cfg: EvalConfig = DEFAULT_EVAL) -> SampledFn:
    """a nu D^{-(1-nu)} y - t y + mu D^{-1} y for y = R_{mu,nu}(a, .)."""
    y = _sample_r(idx, a, grid, cfg)
    fractional = rl_integral(y, 1.0 - idx.nu).values
    whole = rl_integral(y, 1.0).values
    residual = a * idx.nu * fractional - grid.nodes * y.values + idx.mu * whole
    return SampledFn(grid, residual)


def residual_ode(
    idx: FracIndex,
    a: float,
    grid: TimeGrid,
    cfg: EvalConfig = DEFAULT_EVAL,
    y: Optional[SampledFn] = None,
) -> SampledFn:
    """
    a nu D^nu y - t y' - (1 - mu) y, Caputo D^nu by L1 and y' by second-order differences.

    ``y`` defaults to R_{mu,nu}(a, .) sampled on ``grid``; passing it checks the evaluator
    on other inputs. Node 0 is unset.
    """
    if y is None:
        y = _sample_r(idx, a, grid, cfg)
    slope = np.gradient(y.values, grid.h, edge_order=2)
    residual = a * idx.nu * caputo_derivative(y, idx.nu).values - grid.nodes * slope - (1.0 - idx.mu) * y.values
    residual[0] = np.nan
    return SampledFn(grid, residual)


def mainardi_from_f_aux(nu: float, a: float, grid: TimeGrid, cfg: EvalConfig = DEFAULT_EVAL) -> SampledFn:
    """t^nu D^{-(1-nu)} (t^{-1} F(a t^{-nu}; nu)), which equals M(a t^{-nu}; nu)."""
    if not 0 < nu <= 0.5:
        raise DomainError(f"nu must lie in (0, 1/2], got {nu}")
    if a <= 0:
        raise DomainError(f"a must be > 0, got {a}")
    r0 = np.zeros(grid.n_steps + 1)
    r0[1:] = r_eval(FracIndex(0.0, nu), a, grid.nodes[1:], cfg)
    integral = rl_integral(SampledFn(grid, r0), 1.0 - nu)
    return SampledFn(grid, grid.nodes ** nu * integral.values)
