"""Asymptotic-preserving IMEX discrete-velocity solver for the ES-BGK equation."""

from .config import ScenarioConfig, parse_config, preset
from .errors import CFLError, ConfigError, ESBGKError, InvalidStateError, SPDError, WallError
from .relaxation import RelaxationParams, TauModel, relax, relaxation_step, update_moments, update_sigma
from .solver import KineticSolver, run
from .transport import BoundarySpec, Inflow, SpatialGrid, cfl_dt, transport_step
from .velocity import MomentSet, VelocityGrid, gaussian, heat_flux, maxwellian, moments, second_moment

__version__ = "0.1.0"

__all__ = [
    "BoundarySpec",
    "CFLError",
    "ConfigError",
    "ESBGKError",
    "Inflow",
    "InvalidStateError",
    "KineticSolver",
    "MomentSet",
    "RelaxationParams",
    "SPDError",
    "ScenarioConfig",
    "SpatialGrid",
    "TauModel",
    "VelocityGrid",
    "WallError",
    "cfl_dt",
    "gaussian",
    "heat_flux",
    "maxwellian",
    "moments",
    "parse_config",
    "preset",
    "relax",
    "relaxation_step",
    "run",
    "second_moment",
    "transport_step",
    "update_moments",
    "update_sigma",
]
