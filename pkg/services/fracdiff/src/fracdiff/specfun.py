"""
Auxiliary functions R_{mu,nu}(a, t), Wright and Mainardi functions, power-law pulses.

R_{mu,nu}(a, t) is the inverse Laplace transform of s^{-mu} exp(-a s^nu). Three routes
are available:

- the Wright series t^{mu-1} W(-a t^{-nu}; -nu, mu), valid for nu <= 1/2;
- a real-axis integral obtained by collapsing the Bromwich contour onto the branch cut,
  also for nu <= 1/2;
- numerical Laplace inversion (module ``laplace``), valid for every 0 < nu <= 1.

``r_eval`` dispatches between them. Every routine accepts numpy arrays for ``a`` and
``t`` and broadcasts them; scalars in give floats out.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import erfc, gammaln, gammasgn, rgamma

from fracdiff.errors import ConvergenceError, DomainError, SymbolicOnlyError
from fracdiff.laplace import DEFAULT_INVERSION, InversionConfig, invert_many
from fracdiff.pulses import PowerLawPulse, PulseSum

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

SERIES = "series"
LAPLACE = "laplace"
INTEGRAL = "integral"
LIMIT = "limit"


@dataclass(frozen=True)
class FracIndex:
    """The pair (mu, nu) indexing R_{mu,nu}."""

    mu: float
    nu: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.mu) or self.mu < 0:
            raise DomainError(f"mu must be >= 0, got {self.mu}")
        if not 0 < self.nu <= 1:
            raise DomainError(f"nu must lie in (0, 1], got {self.nu}")
        object.__setattr__(self, "mu", PowerLawPulse(self.mu).order)

    @property
    def series_admissible(self) -> bool:
        return self.nu <= 0.5

    def shifted(self, dmu: float) -> "FracIndex":
        """(mu + dmu, nu), with near-integer orders snapped to the integer."""
        return FracIndex(PowerLawPulse(self.mu + dmu).order, self.nu)


@dataclass(frozen=True)
class SeriesConfig:
    max_terms: int = 400
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    # Arguments a t^{-nu} above this go straight to Laplace inversion
    switch_argument: float = 30.0
    # Fail over when the largest term exceeds the sum by this factor
    cancellation_limit: float = 1e8
    # ... or when the rounding estimate peak * terms * eps exceeds this fraction of the sum
    accuracy_target: float = 1e-10

    def __post_init__(self) -> None:
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"max_terms must be a positive integer, got {self.max_terms}")
        for name in ("rel_tol", "abs_tol", "switch_argument", "cancellation_limit", "accuracy_target"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and positive, got {value}")


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    limit: int = 200
    # Integration runs out to a t^{-nu} + tail_width in the similarity variable
    tail_width: float = 40.0


@dataclass(frozen=True)
class EvalConfig:
    series: SeriesConfig = field(default_factory=SeriesConfig)
    inversion: InversionConfig = DEFAULT_INVERSION
    quad: QuadConfig = field(default_factory=QuadConfig)


DEFAULT_EVAL = EvalConfig()


@dataclass(frozen=True)
class REvaluation:
    value: ArrayLike
    method: str
    failover: bool = False


def _out(values: np.ndarray) -> ArrayLike:
    values = np.asarray(values, dtype=float)
    return float(values) if values.ndim == 0 else values


# --------------------------------------------------------------------------- pulses


def delta_mu(mu: float, t: ArrayLike) -> ArrayLike:
    """delta_mu(t) = t^{mu-1} / Gamma(mu) for mu > 0 and t > 0."""
    if mu < 0:
        raise DomainError(f"mu must be >= 0, got {mu}")
    if mu == 0:
        raise SymbolicOnlyError("delta_0 is the Dirac pulse; use delta_pulse(0) instead")
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise DomainError("delta_mu is evaluated at t > 0 only")
    return _out(t_arr ** (mu - 1.0) * rgamma(mu))


def delta_pulse(mu: float) -> PowerLawPulse:
    return PowerLawPulse(mu)


# --------------------------------------------------------------------------- series


@dataclass
class _SeriesSum:
    value: np.ndarray
    peak: np.ndarray
    converged: np.ndarray
    terms: int


def _wright_sum(z: np.ndarray, alpha: float, beta: float, cfg: SeriesConfig) -> _SeriesSum:
    z = np.asarray(z, dtype=float)
    total = np.zeros_like(z)
    carry = np.zeros_like(z)
    peak = np.zeros_like(z)
    quiet = np.zeros(z.shape, dtype=int)
    converged = np.zeros(z.shape, dtype=bool)
    sign_z = np.sign(z)
    with np.errstate(divide="ignore"):
        log_abs_z = np.log(np.abs(z))

    j = 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for j in range(cfg.max_terms):
            x = alpha * j + beta
            if x <= 0 and x == np.floor(x):
                term = np.zeros_like(z)
            else:
                log_power = 0.0 if j == 0 else j * log_abs_z - gammaln(j + 1.0)
                magnitude = np.exp(log_power - gammaln(x))
                term = (sign_z ** j) * gammasgn(x) * magnitude
                term = np.where(magnitude == 0.0, 0.0, term)

            # Kahan compensated accumulation
            y = term - carry
            updated = total + y
            carry = (updated - total) - y
            total = updated

            peak = np.maximum(peak, np.abs(term))
            tol = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(total))
            quiet = np.where(np.abs(term) <= tol, quiet + 1, 0)
            converged |= quiet >= 3
            if np.all(converged):
                break

    return _SeriesSum(total, peak, converged, j + 1)


def wright(z: ArrayLike, alpha: float, beta: float, cfg: SeriesConfig = SeriesConfig()) -> ArrayLike:
    """
    Wright function W(z; alpha, beta) = sum_j z^j / (j! Gamma(alpha j + beta)).

    Terms at poles of Gamma vanish exactly. Raises ConvergenceError when ``max_terms`` is
    reached first.
    """
    if alpha <= -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    z_arr = np.asarray(z, dtype=float)
    result = _wright_sum(z_arr, alpha, beta, cfg)
    if not np.all(result.converged):
        worst = z_arr[~result.converged].flat[0] if z_arr.ndim else float(z_arr)
        raise ConvergenceError(
            f"Wright series did not converge in {cfg.max_terms} terms (z={worst!r})"
        )
    return _out(result.value)


def mainardi(z: ArrayLike, nu: float, cfg: SeriesConfig = SeriesConfig()) -> ArrayLike:
    """Mainardi function M(z; nu) = W(-z; -nu, 1 - nu)."""
    if not 0 < nu < 1:
        raise DomainError(f"nu must lie in (0, 1), got {nu}")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise DomainError("the Mainardi function is evaluated at z >= 0")
    return wright(-z_arr, -nu, 1.0 - nu, cfg)


def f_aux(z: ArrayLike, nu: float, cfg: SeriesConfig = SeriesConfig()) -> ArrayLike:
    """F(z; nu) = W(-z; -nu, 0), so that F(a t^{-nu}; nu) = t R_{0,nu}(a, t)."""
    if not 0 < nu <= 0.5:
        raise DomainError(f"nu must lie in (0, 1/2], got {nu}")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise DomainError("F(z; nu) is evaluated at z >= 0")
    return wright(-z_arr, -nu, 0.0, cfg)


def _check_positive(name: str, values: np.ndarray) -> None:
    if np.any(np.isnan(values)) or np.any(values <= 0):
        raise DomainError(f"{name} must be > 0")


def _series_with_failover(
    idx: FracIndex, a: np.ndarray, t: np.ndarray, cfg: EvalConfig
) -> Tuple[np.ndarray, np.ndarray]:
    a, t = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(t, dtype=float))
    shape = a.shape
    a, t = a.ravel(), t.ravel()
    argument = a * t ** (-idx.nu)
    values = np.empty(a.shape)
    failover = argument > cfg.series.switch_argument

    near = ~failover
    if np.any(near):
        summed = _wright_sum(-argument[near], -idx.nu, idx.mu, cfg.series)
        scaled = t[near] ** (idx.mu - 1.0) * summed.value
        magnitude = np.abs(summed.value)
        rounding = summed.peak * summed.terms * np.finfo(float).eps
        lossy = (
            (~summed.converged)
            | (summed.peak > cfg.series.cancellation_limit * magnitude)
            | (rounding > cfg.series.accuracy_target * magnitude)
        )
        values[near] = scaled
        failover[near] = lossy

    if np.any(failover):
        logger.debug(
            f"R_{{{idx.mu},{idx.nu}}}: {int(failover.sum())} point(s) moved to Laplace inversion"
        )
        values[failover] = _laplace_values(idx, a[failover], t[failover], cfg.inversion)
    return values.reshape(shape), failover.reshape(shape)


def r_series(idx: FracIndex, a: ArrayLike, t: ArrayLike, cfg: EvalConfig = DEFAULT_EVAL) -> ArrayLike:
    """R_{mu,nu}(a, t) = t^{mu-1} W(-a t^{-nu}; -nu, mu), nu <= 1/2, with Laplace failover."""
    if not idx.series_admissible:
        raise DomainError(f"the series route requires nu <= 1/2, got {idx.nu}")
    a_arr, t_arr = np.asarray(a, dtype=float), np.asarray(t, dtype=float)
    _check_positive("a", a_arr)
    _check_positive("t", t_arr)
    values, _ = _series_with_failover(idx, a_arr, t_arr, cfg)
    return _out(values)


# --------------------------------------------------------------------------- Laplace route


def _laplace_values(idx: FracIndex, a: np.ndarray, t: np.ndarray, cfg: InversionConfig) -> np.ndarray:
    a_flat = np.ravel(a)
    t_flat = np.ravel(t)
    mu, nu = idx.mu, idx.nu

    def transform(s: np.ndarray) -> np.ndarray:
        log_s = np.log(s)
        return np.exp(-mu * log_s - a_flat[:, None] * np.exp(nu * log_s))

    return invert_many(transform, t_flat, cfg).reshape(np.shape(a))


def r_laplace(
    idx: FracIndex, a: ArrayLike, t: ArrayLike, inv_cfg: InversionConfig = DEFAULT_INVERSION
) -> ArrayLike:
    """R_{mu,nu}(a, t) by numerical inversion of s^{-mu} exp(-a s^nu); any 0 < nu <= 1."""
    a_arr, t_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(t, dtype=float))
    _check_positive("a", a_arr)
    _check_positive("t", t_arr)
    return _out(_laplace_values(idx, a_arr, t_arr, inv_cfg))


# --------------------------------------------------------------------------- real-axis route


def _integrated_exponential(m: int, t: float, z: float) -> float:
    """m-fold integral in t of exp(-t z), starting from t = 0."""
    x = t * z
    if m == 0:
        return float(np.exp(-x))
    if x < 1.0:
        # t^m sum_k (-x)^k / (k + m)!
        k = np.arange(30)
        return float(t ** m * np.sum((-x) ** k * np.exp(-gammaln(k + m + 1.0))))
    value = -np.expm1(-x) / z
    for order in range(2, m + 1):
        value = (t ** (order - 1) * np.exp(-gammaln(order)) - value) / z
    return float(value)


def _real_integral_scalar(idx: FracIndex, a: float, t: float, qcfg: QuadConfig) -> float:
    m = int(np.floor(idx.mu))
    frac = idx.mu - m
    nu = idx.nu
    damping = a * np.cos(np.pi * nu)
    frequency = a * np.sin(np.pi * nu)
    phase = np.pi * frac

    def amplitude(w: float) -> float:
        if w <= 0.0:
            return 0.0
        z = w ** (1.0 / nu)
        log_part = -frac * np.log(z) - damping * w + (1.0 / nu - 1.0) * np.log(w)
        return _integrated_exponential(m, t, z) * np.exp(log_part) / (np.pi * nu)

    split = min(np.pi / frequency, 1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        head, head_err = quad(
            lambda w: amplitude(w) * np.sin(frequency * w + phase),
            0.0,
            split,
            epsabs=qcfg.abs_tol,
            epsrel=qcfg.rel_tol,
            limit=qcfg.limit,
        )
        tail_sin, err_sin = quad(
            amplitude, split, np.inf, weight="sin", wvar=frequency, epsabs=qcfg.abs_tol, limlst=100
        )
        tail_cos, err_cos = quad(
            amplitude, split, np.inf, weight="cos", wvar=frequency, epsabs=qcfg.abs_tol, limlst=100
        )
    value = head + np.cos(phase) * tail_sin + np.sin(phase) * tail_cos
    error = head_err + err_sin + err_cos
    if caught:
        logger.warning(f"Real-axis quadrature for R_{{{idx.mu},{idx.nu}}}({a}, {t}): {caught[0].message}")
        if error > 1e-8 * max(1.0, abs(value)):
            raise ConvergenceError(
                f"real-axis quadrature did not converge (error estimate {error:.2e})"
            )
    return float(value)


def r_real_integral(
    idx: FracIndex, a: ArrayLike, t: ArrayLike, qcfg: QuadConfig = QuadConfig()
) -> ArrayLike:
    """
    R_{mu,nu}(a, t) from the branch-cut integral, nu <= 1/2.

    With mu = m + mu', 0 <= mu' < 1, the integral is

        (1/pi) int_0^inf E_m(t, z) z^{-mu'} exp(-a cos(pi nu) z^nu) sin(a sin(pi nu) z^nu + pi mu') dz

    where E_m is the m-fold integral of exp(-t z) in t. After w = z^nu the oscillation is
    linear in w and the tail goes to QUADPACK's Fourier routine.
    """
    if not idx.series_admissible:
        raise DomainError(f"the real-axis route requires nu <= 1/2, got {idx.nu}")
    a_arr, t_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(t, dtype=float))
    _check_positive("a", a_arr)
    _check_positive("t", t_arr)
    values = np.vectorize(lambda ai, ti: _real_integral_scalar(idx, ai, ti, qcfg), otypes=[float])(
        a_arr, t_arr
    )
    return _out(values)


# --------------------------------------------------------------------------- dispatcher


def r_eval_detailed(
    idx: FracIndex, a: ArrayLike, t: ArrayLike, cfg: EvalConfig = DEFAULT_EVAL, method: str = "auto"
) -> REvaluation:
    """
    Evaluate R_{mu,nu}(a, t) and report the route taken.

    a = 0 gives delta_mu(t) (rejected for mu = 0, a Dirac pulse) and a = inf gives 0.
    ``method`` is one of auto, series, laplace, integral.
    """
    a_arr, t_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(t, dtype=float))
    _check_positive("t", t_arr)
    if np.any(np.isnan(a_arr)) or np.any(a_arr < 0):
        raise DomainError("a must be >= 0")

    values = np.zeros(a_arr.shape)
    at_zero = a_arr == 0.0
    at_inf = np.isinf(a_arr)
    inner = ~(at_zero | at_inf)
    failover = False
    used = LIMIT

    if np.any(at_zero):
        values[at_zero] = delta_mu(idx.mu, t_arr[at_zero])

    if np.any(inner):
        a_in, t_in = a_arr[inner], t_arr[inner]
        if method == "auto":
            method = SERIES if idx.series_admissible else LAPLACE
        if method == SERIES:
            if not idx.series_admissible:
                raise DomainError(f"the series route requires nu <= 1/2, got {idx.nu}")
            values[inner], moved = _series_with_failover(idx, a_in, t_in, cfg)
            failover = bool(np.any(moved))
        elif method == LAPLACE:
            values[inner] = _laplace_values(idx, a_in, t_in, cfg.inversion)
        elif method == INTEGRAL:
            values[inner] = r_real_integral(idx, a_in, t_in, cfg.quad)
        else:
            raise DomainError(f"unknown method {method!r}")
        used = method

    return REvaluation(_out(values), used, failover)


def r_eval(idx: FracIndex, a: ArrayLike, t: ArrayLike, cfg: EvalConfig = DEFAULT_EVAL) -> ArrayLike:
    """R_{mu,nu}(a, t) by the preferred route."""
    return r_eval_detailed(idx, a, t, cfg).value


def r_partial_a(idx: FracIndex, a: ArrayLike, t: ArrayLike, cfg: EvalConfig = DEFAULT_EVAL) -> ArrayLike:
    """dR_{mu,nu}/da = -R_{mu-nu,nu} for mu >= nu and a > 0."""
    if idx.mu < idx.nu - 1e-14:
        raise DomainError(f"d/da needs mu >= nu, got mu={idx.mu}, nu={idx.nu}")
    _check_positive("a", np.asarray(a, dtype=float))
    lowered = idx.shifted(-min(idx.nu, idx.mu))
    return _out(-np.asarray(r_eval(lowered, a, t, cfg)))


def r_closed_form_half(mu: float, a: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Closed forms of R_{mu,1/2} for mu in {0, 1/2, 1}."""
    a_arr = np.asarray(a, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    _check_positive("t", t_arr)
    if np.any(a_arr < 0):
        raise DomainError("a must be >= 0")
    gauss = np.exp(-(a_arr ** 2) / (4.0 * t_arr))
    if mu == 0:
        _check_positive("a", a_arr)
        return _out(a_arr * gauss / (2.0 * np.sqrt(np.pi * t_arr ** 3)))
    if mu == 0.5:
        return _out(gauss / np.sqrt(np.pi * t_arr))
    if mu == 1:
        return _out(erfc(a_arr / (2.0 * np.sqrt(t_arr))))
    raise DomainError(f"closed forms exist for mu in {{0, 1/2, 1}} only, got {mu}")


def r_convolve_pulses(
    idx: FracIndex, a: ArrayLike, t: ArrayLike, density: PulseSum, cfg: EvalConfig = DEFAULT_EVAL
) -> ArrayLike:
    """int_0^t R_{mu,nu}(a, t - tau) density(tau) dtau for a pulse-sum density."""
    total = np.zeros(np.broadcast(np.asarray(a), np.asarray(t)).shape)
    for order, coeff in density:
        total = total + coeff * np.asarray(r_eval(idx.shifted(order), a, t, cfg))
    return _out(total)


# --------------------------------------------------------------------------- identities


def _tail_upper(idx: FracIndex, a: float, t: float, qcfg: QuadConfig) -> float:
    return (a * t ** (-idx.nu) + qcfg.tail_width) * t ** idx.nu


def _quad_checked(func, lo: float, hi: float, qcfg: QuadConfig, what: str) -> float:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, error = quad(func, lo, hi, epsabs=qcfg.abs_tol, epsrel=qcfg.rel_tol, limit=qcfg.limit)
    if caught and error > 1e-7 * max(1.0, abs(value)):
        raise ConvergenceError(f"{what}: quadrature error estimate {error:.2e}")
    return float(value)


def r_tail_integral_check(
    idx: FracIndex, a: float, t: float, quad_cfg: QuadConfig = QuadConfig(), cfg: EvalConfig = DEFAULT_EVAL
) -> Tuple[float, float]:
    """(R_{mu+nu,nu}(a, t), int_a^inf R_{mu,nu}(z, t) dz)."""
    if a <= 0 or t <= 0:
        raise DomainError("a and t must be > 0")
    lhs = float(r_eval(idx.shifted(idx.nu), a, t, cfg))
    rhs = _quad_checked(
        lambda z: float(r_eval(idx, z, t, cfg)), a, _tail_upper(idx, a, t, quad_cfg), quad_cfg, "tail integral"
    )
    return lhs, rhs


def r_line_integral_check(
    idx: FracIndex, t: float, quad_cfg: QuadConfig = QuadConfig(), cfg: EvalConfig = DEFAULT_EVAL
) -> Tuple[float, float]:
    """(int_R (1/2) R_{mu,nu}(|z|, t) dz, delta_{mu+nu}(t))."""
    if idx.mu + idx.nu <= 0:
        raise DomainError("mu + nu must be > 0")
    if t <= 0:
        raise DomainError("t must be > 0")
    lhs = _quad_checked(
        lambda z: float(r_eval(idx, z, t, cfg)) if z > 0 else 0.0,
        0.0,
        _tail_upper(idx, 0.0, t, quad_cfg),
        quad_cfg,
        "line integral",
    )
    return lhs, float(delta_mu(idx.mu + idx.nu, t))


def r_mainardi_relation_check(
    nu: float, a: float, t: float, cfg: EvalConfig = DEFAULT_EVAL
) -> Tuple[float, float]:
    """(M(a t^{-nu}; nu), t^nu R_{1-nu,nu}(a, t))."""
    lhs = float(mainardi(a * t ** (-nu), nu, cfg.series))
    rhs = t ** nu * float(r_eval(FracIndex(1.0 - nu, nu), a, t, cfg))
    return lhs, rhs


def wright_via_r(z: ArrayLike, nu: float, beta: float, cfg: EvalConfig = DEFAULT_EVAL) -> ArrayLike:
    """W(-z; -nu, beta) = R_{beta,nu}(z, 1) for z >= 0; inherits the Laplace failover."""
    return r_eval(FracIndex(beta, nu), z, 1.0, cfg)
