"""Nonlinear magnetoelastic energies, their linearized limit, and an eps-sweep harness."""

from .config import RunConfig, load_config, parse_config
from .energy import ElasticityTensor, StoredEnergyModel, g_p
from .errors import (
    ConfigError,
    DegenerateElement,
    Inadmissible,
    MagnetolinError,
    NoConvergence,
)
from .estimators import MagnetoelasticMinimizer, from_config
from .functional import EnergyReport, LoadSpec, MagnetoelasticProblem, VectorField
from .harness import (
    hypothesis_check,
    linear_solve,
    recovery_initializer,
    rigidity_probe,
    run_sweep,
)
from .magnetostatics import BoxGrid, PotentialSolver
from .mesh import BoundaryDatum, GridSpec, StateFields, build_grid
from .optimize import SolverStats, lbfgs, minimize

__version__ = "0.1.0"

__all__ = [
    "BoundaryDatum",
    "BoxGrid",
    "ConfigError",
    "DegenerateElement",
    "ElasticityTensor",
    "EnergyReport",
    "GridSpec",
    "Inadmissible",
    "LoadSpec",
    "MagnetoelasticMinimizer",
    "MagnetoelasticProblem",
    "MagnetolinError",
    "NoConvergence",
    "PotentialSolver",
    "RunConfig",
    "SolverStats",
    "StateFields",
    "StoredEnergyModel",
    "VectorField",
    "build_grid",
    "from_config",
    "g_p",
    "hypothesis_check",
    "lbfgs",
    "linear_solve",
    "load_config",
    "minimize",
    "parse_config",
    "recovery_initializer",
    "rigidity_probe",
    "run_sweep",
]
