"""
Power-law pulses delta_mu(t) = t^{mu-1} / Gamma(mu) and their linear combinations.

delta_0 is the Dirac pulse at t = 0. It is never evaluated pointwise; it only takes
part in convolutions, where it acts as the identity. The Riemann-Liouville integral of
order beta maps delta_mu to delta_{mu+beta}, and the Riemann-Liouville derivative maps it
to delta_{mu-beta}, which is what lets boundary densities such as
2(1 - u0) delta_{1-2nu} be handled in closed form.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple, Union

import numpy as np
from scipy.special import rgamma

from fracdiff.errors import DomainError, SymbolicOnlyError
from fracdiff.grid import SampledFn, TimeGrid

# Orders closer than this are merged; sums of grid orders such as 2*nu + (1 - 2*nu)
# otherwise land a rounding error away from the intended value.
ORDER_ATOL = 1e-12

ArrayLike = Union[float, np.ndarray]


def _snap(order: float) -> float:
    nearest = round(order)
    if abs(order - nearest) < ORDER_ATOL:
        return float(nearest)
    return float(order)


@dataclass(frozen=True)
class PowerLawPulse:
    """The pulse delta_mu; order 0 is the Dirac pulse."""

    order: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.order) or self.order < -ORDER_ATOL:
            raise DomainError(f"pulse order must be >= 0, got {self.order}")
        object.__setattr__(self, "order", max(_snap(self.order), 0.0))

    @property
    def is_dirac(self) -> bool:
        return self.order == 0.0

    @property
    def coefficient(self) -> float:
        """1/Gamma(mu) for mu > 0."""
        if self.is_dirac:
            raise SymbolicOnlyError("the Dirac pulse has no power-law coefficient")
        return float(rgamma(self.order))

    @property
    def exponent(self) -> float:
        if self.is_dirac:
            raise SymbolicOnlyError("the Dirac pulse has no power-law exponent")
        return self.order - 1.0

    def __call__(self, t: ArrayLike) -> ArrayLike:
        if self.is_dirac:
            raise SymbolicOnlyError("delta_0 is the Dirac pulse and has no pointwise value")
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("power-law pulses are evaluated at t > 0 only")
        values = self.coefficient * t ** self.exponent
        return float(values) if values.ndim == 0 else values


class PulseSum:
    """Finite linear combination sum_i c_i delta_{mu_i}."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Dict[float, float]] = None):
        merged: Dict[float, float] = {}
        for order, coeff in (terms or {}).items():
            key = PowerLawPulse(order).order
            merged[key] = merged.get(key, 0.0) + float(coeff)
        self._terms: Tuple[Tuple[float, float], ...] = tuple(
            sorted((o, c) for o, c in merged.items() if c != 0.0)
        )

    @classmethod
    def zero(cls) -> "PulseSum":
        return cls()

    @classmethod
    def pulse(cls, order: float, coeff: float = 1.0) -> "PulseSum":
        return cls({order: coeff})

    @classmethod
    def constant(cls, value: float) -> "PulseSum":
        """The constant function ``value``, i.e. value * delta_1."""
        return cls({1.0: value})

    @classmethod
    def dirac(cls, coeff: float = 1.0) -> "PulseSum":
        return cls({0.0: coeff})

    def __iter__(self) -> Iterator[Tuple[float, float]]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        inner = " + ".join(f"{c!r}*delta_{o!r}" for o, c in self._terms) or "0"
        return f"PulseSum({inner})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PulseSum):
            return NotImplemented
        if len(self) != len(other):
            return False
        return all(
            abs(o1 - o2) < ORDER_ATOL and np.isclose(c1, c2, rtol=1e-12, atol=1e-14)
            for (o1, c1), (o2, c2) in zip(self, other)
        )

    def __hash__(self) -> int:
        return hash(self._terms)

    @property
    def terms(self) -> Dict[float, float]:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def has_dirac(self) -> bool:
        return any(order == 0.0 for order, _ in self._terms)

    @property
    def min_order(self) -> Optional[float]:
        return self._terms[0][0] if self._terms else None

    @property
    def singular_exponent(self) -> Optional[float]:
        """Exponent p of the leading t^p blow-up at 0, or None if the sum is bounded."""
        order = self.min_order
        if order is None or order >= 1.0:
            return None
        return order - 1.0

    def coefficient(self, order: float) -> float:
        return self.terms.get(PowerLawPulse(order).order, 0.0)

    def __add__(self, other: Union["PulseSum", float, int]) -> "PulseSum":
        if isinstance(other, (int, float)):
            other = PulseSum.constant(float(other))
        if not isinstance(other, PulseSum):
            return NotImplemented
        combined = self.terms
        for order, coeff in other:
            combined[order] = combined.get(order, 0.0) + coeff
        return PulseSum(combined)

    __radd__ = __add__

    def __neg__(self) -> "PulseSum":
        return PulseSum({o: -c for o, c in self})

    def __sub__(self, other: Union["PulseSum", float, int]) -> "PulseSum":
        if isinstance(other, (int, float)):
            other = PulseSum.constant(float(other))
        return self + (-other)

    def __rsub__(self, other: Union[float, int]) -> "PulseSum":
        return PulseSum.constant(float(other)) - self

    def __mul__(self, scale: float) -> "PulseSum":
        if not isinstance(scale, (int, float, np.floating)):
            return NotImplemented
        return PulseSum({o: c * float(scale) for o, c in self})

    __rmul__ = __mul__

    def __truediv__(self, scale: float) -> "PulseSum":
        return self * (1.0 / float(scale))

    def integrate(self, mu: float) -> "PulseSum":
        """Riemann-Liouville integral of order mu >= 0."""
        if mu < 0:
            raise DomainError(f"integration order must be >= 0, got {mu}")
        return PulseSum({o + mu: c for o, c in self})

    def differentiate(self, beta: float) -> "PulseSum":
        """Riemann-Liouville derivative of order beta >= 0."""
        if beta < 0:
            raise DomainError(f"differentiation order must be >= 0, got {beta}")
        shifted: Dict[float, float] = {}
        for order, coeff in self:
            new_order = _snap(order - beta)
            if new_order < -ORDER_ATOL:
                raise DomainError(
                    f"D^{beta} of delta_{order} is a distribution of negative order"
                )
            shifted[max(new_order, 0.0)] = shifted.get(max(new_order, 0.0), 0.0) + coeff
        return PulseSum(shifted)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        if self.has_dirac:
            raise SymbolicOnlyError(f"{self!r} contains a Dirac pulse")
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for order, coeff in self:
            total = total + coeff * PowerLawPulse(order)(t)
        return float(total) if total.ndim == 0 else total

    def sample(self, grid: TimeGrid) -> SampledFn:
        """Sample on a grid; unbounded sums leave node 0 unset with the exponent recorded."""
        exponent = self.singular_exponent
        if exponent is not None and exponent <= -1.0:
            raise SymbolicOnlyError(f"{self!r} cannot be sampled")
        if exponent is None:
            nodes = grid.nodes
            values = np.empty_like(nodes)
            values[1:] = self(nodes[1:])
            values[0] = sum(c for o, c in self if o == 1.0)
            return SampledFn(grid, values)
        return SampledFn.from_callable(grid, self, singular_exponent=exponent)
