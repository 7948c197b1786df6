"""
Validated run configurations for the command-line interface.

Configs are JSON documents checked with pydantic before any solver runs; unknown keys are
rejected. The models convert themselves into the library's problem types.
"""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fracdiff.grid import TimeGrid
from fracdiff.ibvp import BoundaryPath, DerivativeKind, IBVPProblem, InitialData, RobinBC, parse_path
from fracdiff.pulses import PulseSum


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BoundaryDataSpec(StrictModel):
    """g(t) as a constant or as a pulse sum {order: coefficient}."""

    constant: Optional[float] = None
    pulses: Dict[float, float] = Field(default_factory=dict)

    @field_validator("pulses")
    @classmethod
    def _orders_nonnegative(cls, value: Dict[float, float]) -> Dict[float, float]:
        if any(order < 0 for order in value):
            raise ValueError("pulse orders must be >= 0")
        return value

    def to_pulse_sum(self) -> PulseSum:
        data = PulseSum(dict(self.pulses))
        if self.constant is not None:
            data = data + PulseSum.constant(self.constant)
        return data


class RobinSpec(StrictModel):
    coeff_u: float
    coeff_ux: float = 0.0
    data: BoundaryDataSpec = Field(default_factory=BoundaryDataSpec)

    @model_validator(mode="after")
    def _not_both_zero(self) -> "RobinSpec":
        if abs(self.coeff_u) + abs(self.coeff_ux) == 0:
            raise ValueError("|coeff_u| + |coeff_ux| must be > 0")
        return self

    def to_bc(self) -> RobinBC:
        return RobinBC(self.coeff_u, self.coeff_ux, self.data.to_pulse_sum())


class PathsSpec(StrictModel):
    left: str = "0"
    right: str = "+infinity"

    def to_paths(self) -> Tuple[BoundaryPath, BoundaryPath]:
        return parse_path(self.left), parse_path(self.right)


class InitialSpec(StrictModel):
    type: Literal["constant", "piecewise_constant", "sampled"] = "constant"
    value: float = 0.0
    breakpoints: List[float] = Field(default_factory=list)
    values: List[float] = Field(default_factory=list)
    x: List[float] = Field(default_factory=list)
    extension: Literal["constant", "zero"] = "constant"

    def to_initial(self) -> InitialData:
        if self.type == "constant":
            return InitialData.constant(self.value, self.extension)
        if self.type == "piecewise_constant":
            return InitialData.piecewise_constant(self.breakpoints, self.values, self.extension)
        return InitialData.sampled(self.x, self.values, self.extension)


class GridSpec(StrictModel):
    t_end: float = Field(gt=0)
    n_steps: int = Field(ge=2)

    def to_grid(self) -> TimeGrid:
        return TimeGrid(self.t_end, self.n_steps)


class OutputSpec(StrictModel):
    x: List[float] = Field(min_length=1)
    t: List[float] = Field(min_length=1)
    csv: Optional[str] = None
    json_path: Optional[str] = Field(default=None, alias="json")

    @field_validator("t")
    @classmethod
    def _positive_times(cls, value: List[float]) -> List[float]:
        if any(not t > 0 for t in value):
            raise ValueError("output times must be > 0")
        return value


class RunConfig(StrictModel):
    """A solve-ibvp run: problem, time grid and output grid."""

    kind: Literal["caputo", "rl"] = "caputo"
    nu: float = Field(gt=0, le=0.5)
    kappa: float = Field(default=1.0, gt=0)
    left: RobinSpec
    right: RobinSpec
    paths: PathsSpec = Field(default_factory=PathsSpec)
    initial: InitialSpec = Field(default_factory=InitialSpec)
    grid: GridSpec
    output: OutputSpec

    def to_problem(self) -> IBVPProblem:
        left_path, right_path = self.paths.to_paths()
        return IBVPProblem(
            kind=DerivativeKind.parse(self.kind),
            nu=self.nu,
            kappa=self.kappa,
            left=self.left.to_bc(),
            right=self.right.to_bc(),
            left_path=left_path,
            right_path=right_path,
            initial=self.initial.to_initial(),
        )


class StefanParams(StrictModel):
    """Flags of solve-stefan."""

    problem: Literal["one", "two"]
    nu: float = Field(gt=0, le=0.5)
    r: float = Field(gt=0)
    kind: Literal["caputo", "rl"] = "caputo"
    steps: int = Field(default=128, ge=32)
    t_end: float = Field(default=1.0, gt=0)
    points: int = Field(default=21, ge=2)


class EvalRParams(StrictModel):
    """Flags of eval-r; every value list is combined with the others as a product."""

    mu: List[float] = Field(min_length=1)
    nu: List[float] = Field(min_length=1)
    a: List[float] = Field(min_length=1)
    t: List[float] = Field(min_length=1)
    method: Literal["auto", "series", "laplace", "integral"] = "auto"
