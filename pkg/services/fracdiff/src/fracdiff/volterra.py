"""
First-kind Volterra systems for boundary densities.

The unknown densities are piecewise constant on the panels (t_{j-1}, t_j]. On every panel
the kernel is split into a smooth factor, frozen at the panel midpoint, and the declared
diagonal power law (t - tau)^beta, which is integrated exactly. Time marching solves a
1x1 or 2x2 block at each node with the earlier panels as history.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from fracdiff.errors import DomainError, IllPosedError
from fracdiff.fracquad import rl_derivative
from fracdiff.grid import SampledFn, TimeGrid
from fracdiff.pulses import PulseSum

logger = logging.getLogger(__name__)

KernelFn = Callable[[float, np.ndarray], np.ndarray]

DEFAULT_CONDITION_LIMIT = 1e12


def panel_moments(t: float, lo: np.ndarray, hi: np.ndarray, exponent: float) -> np.ndarray:
    """int_lo^hi (t - tau)^exponent dtau for panels with hi <= t."""
    if exponent <= -1.0:
        raise DomainError(f"diagonal exponent must exceed -1, got {exponent}")
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if exponent == 0.0:
        return hi - lo
    power = exponent + 1.0
    return ((t - lo) ** power - np.maximum(t - hi, 0.0) ** power) / power


def panel_weights(
    kernel: KernelFn, exponent: float, t: float, lo: np.ndarray, hi: np.ndarray
) -> np.ndarray:
    """
    Product-integration weights of ``kernel(t, .)`` over the panels [lo, hi].

    The smooth factor kernel(t, tau) (t - tau)^{-exponent} is taken at the panel midpoint.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size == 0:
        return np.zeros(0)
    mid = 0.5 * (lo + hi)
    values = np.asarray(kernel(t, mid), dtype=float)
    smooth = values if exponent == 0.0 else values * (t - mid) ** (-exponent)
    return smooth * panel_moments(t, lo, hi, exponent)


@dataclass(frozen=True)
class KernelEntry:
    """One kernel K(t, tau) with its diagonal singularity (t - tau)^exponent."""

    evaluate: KernelFn
    exponent: float = 0.0

    def __post_init__(self) -> None:
        if not self.exponent > -1.0:
            raise DomainError(f"diagonal exponent must exceed -1, got {self.exponent}")

    def weights(self, t: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        return panel_weights(self.evaluate, self.exponent, t, lo, hi)


@dataclass(frozen=True)
class KernelMatrix:
    """Square matrix of kernels for one or two unknown densities."""

    entries: Tuple[Tuple[KernelEntry, ...], ...]

    def __post_init__(self) -> None:
        size = len(self.entries)
        if size not in (1, 2) or any(len(row) != size for row in self.entries):
            raise DomainError("kernel matrix must be 1x1 or 2x2")

    @classmethod
    def scalar(cls, entry: KernelEntry) -> "KernelMatrix":
        return cls(((entry,),))

    @classmethod
    def pair(
        cls, k11: KernelEntry, k12: KernelEntry, k21: KernelEntry, k22: KernelEntry
    ) -> "KernelMatrix":
        return cls(((k11, k12), (k21, k22)))

    @property
    def size(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class PanelDensity:
    """A density that is constant on each panel (edges[j-1], edges[j]]."""

    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)
        if values.shape != (len(edges) - 1,):
            raise DomainError("a panel density needs one value per panel")

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def truncated(self, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(lo, hi, values) of the panels clipped to [0, t]."""
        keep = self.edges[:-1] < t
        lo = self.edges[:-1][keep]
        hi = np.minimum(self.edges[1:][keep], t)
        return lo, hi, self.values[keep]

    def convolve(self, entry: KernelEntry, t: float) -> float:
        """int_0^t K(t, tau) phi(tau) dtau."""
        lo, hi, values = self.truncated(t)
        return float(np.dot(entry.weights(t, lo, hi), values))

    def at_nodes(self, grid: TimeGrid) -> SampledFn:
        """Values at grid nodes by linear interpolation between midpoints; node 0 extrapolated."""
        mids = self.midpoints
        nodes = grid.nodes
        values = np.interp(nodes, mids, self.values)
        if len(mids) >= 2:
            slope_lo = (self.values[1] - self.values[0]) / (mids[1] - mids[0])
            slope_hi = (self.values[-1] - self.values[-2]) / (mids[-1] - mids[-2])
            below = nodes < mids[0]
            above = nodes > mids[-1]
            values[below] = self.values[0] + slope_lo * (nodes[below] - mids[0])
            values[above] = self.values[-1] + slope_hi * (nodes[above] - mids[-1])
        return SampledFn(grid, values)


@dataclass(frozen=True)
class VolterraSolution:
    grid: TimeGrid
    densities: Tuple[PanelDensity, ...]
    # residuals[i, n]: discretized equation i at node n minus its right-hand side
    residuals: np.ndarray

    @property
    def residual_norms(self) -> Tuple[float, ...]:
        return tuple(float(np.max(np.abs(row[1:]))) for row in self.residuals)

    @property
    def phi_minus(self) -> SampledFn:
        return self.densities[0].at_nodes(self.grid)

    @property
    def phi_plus(self) -> Optional[SampledFn]:
        if len(self.densities) < 2:
            return None
        return self.densities[1].at_nodes(self.grid)


RightHandSide = Union[SampledFn, Callable[[np.ndarray], np.ndarray]]


def _rhs_values(rhs: RightHandSide, grid: TimeGrid) -> np.ndarray:
    if isinstance(rhs, SampledFn):
        if rhs.grid != grid:
            raise DomainError("right-hand side is sampled on a different grid")
        return rhs.values
    values = np.full(grid.n_steps + 1, np.nan)
    values[1:] = rhs(grid.nodes[1:])
    return values


def solve_first_kind(
    kernel: KernelMatrix,
    h_minus: RightHandSide,
    h_plus: Optional[RightHandSide],
    grid: TimeGrid,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> VolterraSolution:
    """
    Solve sum_k int_0^t K_ik(t, tau) phi_k(tau) dtau = h_i(t) at every grid node t_n > 0.

    Args:
        kernel: 1x1 or 2x2 kernel matrix.
        h_minus: Right-hand side of the first equation, sampled or callable.
        h_plus: Right-hand side of the second equation; None for a scalar kernel.
        grid: Time grid whose panels carry the piecewise-constant densities.
        condition_limit: Largest admissible condition number of a diagonal block.

    Returns:
        VolterraSolution: panel densities, node values and per-node residuals.

    Raises:
        IllPosedError: A diagonal block is singular to working precision.
    """
    size = kernel.size
    if (size == 2) != (h_plus is not None):
        raise DomainError("a 2x2 kernel needs two right-hand sides, a scalar kernel one")
    rhs = [_rhs_values(h_minus, grid)]
    if h_plus is not None:
        rhs.append(_rhs_values(h_plus, grid))
    rhs_arr = np.vstack(rhs)
    if np.any(~np.isfinite(rhs_arr[:, 1:])):
        raise DomainError("right-hand sides must be finite at t > 0")

    edges = grid.edges
    n_steps = grid.n_steps
    densities = np.zeros((size, n_steps))
    residuals = np.zeros((size, n_steps + 1))

    for n in range(1, n_steps + 1):
        t_n = edges[n]
        lo, hi = edges[:n], edges[1 : n + 1]
        weights = [[kernel.entries[i][k].weights(t_n, lo, hi) for k in range(size)] for i in range(size)]
        block = np.array([[weights[i][k][-1] for k in range(size)] for i in range(size)])
        history = np.array(
            [sum(np.dot(weights[i][k][:-1], densities[k, : n - 1]) for k in range(size)) for i in range(size)]
        )
        condition = np.linalg.cond(block) if np.all(np.isfinite(block)) else np.inf
        if not condition < condition_limit:
            raise IllPosedError(
                f"Volterra block at node {n} (t={t_n!r}) is singular, condition {condition:.3e}",
                node=n,
                condition=float(condition),
            )
        densities[:, n - 1] = np.linalg.solve(block, rhs_arr[:, n] - history)
        residuals[:, n] = block @ densities[:, n - 1] + history - rhs_arr[:, n]

    solution = VolterraSolution(
        grid=grid,
        densities=tuple(PanelDensity(edges, densities[i]) for i in range(size)),
        residuals=residuals,
    )
    logger.debug(
        f"Solved {size}x{size} first-kind system on {n_steps} steps, "
        f"residual norms {solution.residual_norms}"
    )
    return solution


def abel_invert(h: Union[PulseSum, SampledFn], order: float) -> Union[PulseSum, SampledFn]:
    """
    Solve D^{-order} phi = h for phi = D^order h.

    Pulse sums are inverted exactly, order in (0, 1]. Sampled data go through the numerical
    Riemann-Liouville derivative, order in (0, 1).
    """
    if not 0 < order <= 1:
        raise DomainError(f"Abel order must lie in (0, 1], got {order}")
    if isinstance(h, PulseSum):
        return h.differentiate(order)
    if isinstance(h, SampledFn):
        if order == 1:
            raise DomainError("order 1 inversion of sampled data is plain differentiation; not supported")
        return rl_derivative(h, order)
    raise DomainError(f"cannot invert data of type {type(h).__name__}")


def reconvolve(kernel: KernelMatrix, solution: VolterraSolution) -> np.ndarray:
    """Apply the discretized operator to the solved densities; row i, node n."""
    grid = solution.grid
    edges = grid.edges
    out = np.zeros((kernel.size, grid.n_steps + 1))
    for n in range(1, grid.n_steps + 1):
        lo, hi = edges[:n], edges[1 : n + 1]
        for i in range(kernel.size):
            out[i, n] = sum(
                np.dot(kernel.entries[i][k].weights(edges[n], lo, hi), solution.densities[k].values[:n])
                for k in range(kernel.size)
            )
    return out


def constant_kernel(value: float) -> KernelEntry:
    return KernelEntry(lambda t, tau: np.full(np.shape(tau), float(value)))
