"""
Numerical inversion of Laplace transforms on a fixed Talbot contour.

The Bromwich line is deformed into the cotangent contour

    s(theta) = (r / t) * theta * (cot(theta) + i),   0 <= theta < pi,

with r = min(contour_scale * M, radius_cap) for M nodes, and the trapezoidal rule is
applied in theta. Only the real part of the contour sum is kept. Transforms must be
analytic to the right of the contour; a branch cut along the negative real axis is fine.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from fracdiff.errors import DomainError, InversionError

logger = logging.getLogger(__name__)

Transform = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class InversionConfig:
    """Contour settings; the defaults give about ten digits for smooth transforms."""

    node_count: int = 32
    contour_scale: float = 0.4
    # exp(radius) multiplies the rounding error of the contour sum
    radius_cap: float = 12.8
    working_precision_guard: float = 1e13
    # Absolute error estimates below this never count as precision loss
    absolute_floor: float = 1e-13

    def __post_init__(self) -> None:
        if int(self.node_count) != self.node_count or self.node_count < 8:
            raise DomainError(f"node_count must be an integer >= 8, got {self.node_count}")
        if not self.contour_scale > 0:
            raise DomainError(f"contour_scale must be positive, got {self.contour_scale}")
        if not self.radius_cap > 0:
            raise DomainError(f"radius_cap must be positive, got {self.radius_cap}")
        if not self.working_precision_guard > 1:
            raise DomainError("working_precision_guard must exceed 1")


DEFAULT_INVERSION = InversionConfig()


def principal_power(s: np.ndarray, nu: float) -> np.ndarray:
    """s^nu = |s|^nu exp(i nu arg s) with arg s in (-pi, pi]."""
    s = np.asarray(s, dtype=complex)
    return np.exp(nu * np.log(s))


def _contour(cfg: InversionConfig):
    m = cfg.node_count
    r = min(cfg.contour_scale * m, cfg.radius_cap)
    theta = np.arange(m) * np.pi / m
    cot = np.zeros(m)
    cot[1:] = 1.0 / np.tan(theta[1:])
    # s / (r / t) and the weight ds/dtheta / (r / t) folded with the trapezoid factors
    shape = np.empty(m, dtype=complex)
    shape[0] = 1.0
    shape[1:] = theta[1:] * (cot[1:] + 1j)
    weight = np.empty(m, dtype=complex)
    weight[0] = 0.5
    weight[1:] = 1.0 + 1j * (theta[1:] * (1.0 + cot[1:] ** 2) - cot[1:])
    return r, shape, weight


def invert_many(
    F: Transform,
    t: Union[float, np.ndarray],
    cfg: InversionConfig = DEFAULT_INVERSION,
) -> np.ndarray:
    """
    Invert ``F`` at several times with one vectorised contour sum.

    Args:
        F: Maps a complex array of shape (len(t), node_count) to transform values of the
            same shape. Row k holds the contour nodes belonging to t[k].
        t: Positive times.
        cfg: Contour settings.

    Returns:
        np.ndarray: f(t) for each requested time.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if times.ndim != 1:
        raise DomainError("times must be a scalar or a one-dimensional array")
    if np.any(~np.isfinite(times)) or np.any(times <= 0):
        raise DomainError("Laplace inversion requires finite times t > 0")

    r, shape, weight = _contour(cfg)
    scale = (r / times)[:, None]
    s = scale * shape[None, :]

    with np.errstate(over="ignore", invalid="ignore"):
        values = np.asarray(F(s), dtype=complex)
        if values.shape != s.shape:
            raise DomainError(
                f"transform returned shape {values.shape}, expected {s.shape}"
            )
        terms = (np.exp(times[:, None] * s) * weight[None, :] * values).real

    bad = ~np.isfinite(terms)
    if np.any(bad):
        row, node = np.argwhere(bad)[0]
        raise InversionError(
            f"non-finite contour value at node {node} for t={times[row]!r}", node=int(node)
        )

    total = terms.sum(axis=1)
    magnitude = np.abs(terms).sum(axis=1)
    tiny = np.finfo(float).tiny
    with np.errstate(divide="ignore", invalid="ignore"):
        condition = np.where(magnitude > tiny, magnitude / np.maximum(np.abs(total), tiny), 1.0)
    prefactor = r / (cfg.node_count * times)
    abs_error = np.finfo(float).eps * magnitude * prefactor
    lost = (condition > cfg.working_precision_guard) & (abs_error > cfg.absolute_floor)
    if np.any(lost):
        worst = int(np.argmax(np.where(lost, condition, 0.0)))
        raise InversionError(
            f"contour sum lost precision at t={times[worst]!r} "
            f"(condition {condition[worst]:.3e})",
            condition=float(condition[worst]),
        )

    result = total * prefactor
    logger.debug(f"Inverted {len(times)} time(s) with {cfg.node_count} contour nodes")
    return result


def invert(F: Callable[[complex], complex], t: float, cfg: InversionConfig = DEFAULT_INVERSION) -> float:
    """
    Invert a scalar transform evaluator at a single time.

    ``F`` may be scalar-only; it is applied node by node.
    """
    def vectorised(s: np.ndarray) -> np.ndarray:
        try:
            out = F(s)
            if np.shape(out) == np.shape(s):
                return out
        except TypeError:
            pass
        return np.vectorize(F, otypes=[complex])(s)

    return float(invert_many(vectorised, t, cfg)[0])
