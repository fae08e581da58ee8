"""JSON run configuration."""

import json
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .functional import LoadSpec, MagnetoelasticProblem, VectorField
from .energy import StoredEnergyModel
from .magnetostatics import BoxGrid
from .mesh import BoundaryDatum, build_grid


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSection(_Section):
    n: int = Field(17, ge=3)
    gamma: Literal["left-edge", "full-boundary", "bottom-edge"] = "left-edge"


class ModelSection(_Section):
    p: float = Field(4.0, gt=2)
    a: float = Field(2.0, gt=1)


class MagnetostaticsSection(_Section):
    mu0: float = Field(1.0, ge=0)
    pad: float = Field(1.0, gt=0)
    N: int = Field(128, ge=4)
    cg_tol: float = Field(1e-10, gt=0)
    cg_max: int = Field(1000, ge=1)


class FieldSection(_Section):
    kind: Literal["zero", "constant", "gaussian-bump", "shear"] = "zero"
    value: List[float] = Field(default_factory=lambda: [0.0, 0.0], min_length=2, max_length=2)
    center: List[float] = Field(default_factory=lambda: [0.5, 0.5], min_length=2, max_length=2)
    width: float = Field(0.2, gt=0)
    alpha: float = 0.0

    def build(self):
        return VectorField(self.kind, tuple(self.value), tuple(self.center), self.width, self.alpha)


class LoadsSection(_Section):
    f: FieldSection = Field(default_factory=FieldSection)
    h: FieldSection = Field(
        default_factory=lambda: FieldSection(kind="constant", value=[0.1, 0.0])
    )


class BoundarySection(_Section):
    w: Literal["zero", "uniaxial-stretch", "shear", "bending"] = "uniaxial-stretch"
    alpha: float = 0.1


class SolverSection(_Section):
    tol: float = Field(1e-8, gt=0)
    max_iter: int = Field(5000, ge=1)
    memory: int = Field(10, ge=1)


class SweepSection(_Section):
    eps_start: float = Field(0.4, gt=0)
    eps_factor: float = Field(0.5, gt=0, lt=1)
    num_eps: int = Field(6, ge=1)
    warm_start: bool = True
    init_jitter: float = Field(0.0, ge=0)

    @property
    def eps_values(self):
        return [self.eps_start * self.eps_factor**k for k in range(self.num_eps)]

    @model_validator(mode="after")
    def _positive_tail(self):
        if not self.eps_start * self.eps_factor ** (self.num_eps - 1) > 0:
            raise ValueError("smallest eps underflows to zero")
        return self


class RigiditySection(_Section):
    n: int = Field(17, ge=3)
    p: float = Field(4.0, gt=2)
    samples: int = Field(200, ge=1)
    amplitude: float = Field(0.1, ge=0)
    modes: int = Field(2, ge=1)


class CheckSection(_Section):
    samples: int = Field(10_000, ge=1)


class RunConfig(_Section):
    grid: GridSection = Field(default_factory=GridSection)
    model: ModelSection = Field(default_factory=ModelSection)
    magnetostatics: MagnetostaticsSection = Field(default_factory=MagnetostaticsSection)
    loads: LoadsSection = Field(default_factory=LoadsSection)
    boundary: BoundarySection = Field(default_factory=BoundarySection)
    solver: SolverSection = Field(default_factory=SolverSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    rigidity: RigiditySection = Field(default_factory=RigiditySection)
    check: CheckSection = Field(default_factory=CheckSection)
    seed: int = Field(0, ge=0)
    output: Optional[str] = None

    def build_problem(self):
        ms = self.magnetostatics
        return MagnetoelasticProblem(
            build_grid(self.grid.n, self.grid.gamma),
            model=self.build_model(),
            box=BoxGrid(ms.pad, ms.N),
            mu0=ms.mu0,
            loads=LoadSpec(self.loads.f.build(), self.loads.h.build()),
            boundary=BoundaryDatum(self.boundary.w, self.boundary.alpha),
            cg_tol=ms.cg_tol,
            cg_max=ms.cg_max,
        )

    def build_model(self):
        return StoredEnergyModel(self.model.p, self.model.a)


def _format_error(err):
    first = err.errors()[0]
    path = ".".join(str(part) for part in first["loc"])
    return ConfigError(first["msg"], path)


def parse_config(data):
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise _format_error(err) from None


def load_config(path=None):
    """Load a :class:`RunConfig` from JSON; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON ({err.msg} at line {err.lineno})") from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    return parse_config(data)
