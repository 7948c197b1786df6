"""
Uniform time grids and functions sampled on them.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from fracdiff.errors import DomainError


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k * h, h = t_end / n_steps, k = 0..n_steps."""

    t_end: float
    n_steps: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.t_end) or self.t_end <= 0:
            raise DomainError(f"t_end must be positive and finite, got {self.t_end}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise DomainError(f"n_steps must be an integer >= 2, got {self.n_steps}")

    @classmethod
    def from_step(cls, h: float, n_steps: int) -> "TimeGrid":
        return cls(t_end=h * n_steps, n_steps=n_steps)

    @property
    def h(self) -> float:
        return self.t_end / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.h

    @property
    def edges(self) -> np.ndarray:
        """Panel edges; identical to the nodes on a uniform grid."""
        return self.nodes

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_end, self.n_steps * factor)


@dataclass(frozen=True)
class SampledFn:
    """
    Values of a time function at the nodes of a grid.

    ``values[0]`` is NaN when the function is unset or blows up at t = 0. In the
    latter case ``singular_exponent`` holds p in (-1, 0) with f(t) ~ C t^p near 0.
    """

    grid: TimeGrid
    values: np.ndarray
    singular_exponent: Optional[float] = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n_steps + 1,):
            raise DomainError(
                f"expected {self.grid.n_steps + 1} values, got shape {values.shape}"
            )
        if self.singular_exponent is not None:
            p = self.singular_exponent
            if not -1.0 < p < 0.0:
                raise DomainError(f"singular exponent must lie in (-1, 0), got {p}")
        if np.any(~np.isfinite(values[1:])):
            raise DomainError("sampled values must be finite away from t = 0")

    @classmethod
    def from_callable(
        cls,
        grid: TimeGrid,
        f: Callable[[np.ndarray], np.ndarray],
        singular_exponent: Optional[float] = None,
    ) -> "SampledFn":
        nodes = grid.nodes
        values = np.empty_like(nodes)
        if singular_exponent is None:
            values[:] = f(nodes)
        else:
            values[0] = np.nan
            values[1:] = f(nodes[1:])
        return cls(grid, values, singular_exponent)

    @property
    def is_singular(self) -> bool:
        return self.singular_exponent is not None

    @property
    def origin_unset(self) -> bool:
        return bool(np.isnan(self.values[0]))

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values: np.ndarray) -> "SampledFn":
        return SampledFn(self.grid, values, self.singular_exponent)
