"""Fronts of bistable reaction-diffusion systems and the first-order change
of their speed under a perturbation of the diffusion matrix."""

from .errors import (
    ConfigurationError,
    FrontSpeedError,
    HypothesisViolation,
    NonConvergenceError,
    NonTransversalityError,
    NormalizationError,
    SimulationBlowUp,
    StageError,
    TrackingError,
)
from .front_solver import FrontSolution, NewtonOptions, solve_standing_front, solve_travelling_front
from .grid import Grid, build_grid, grid_with_spacing
from .kernels import BACKEND
from .models import DiffusionSpec, make_model
from .sensitivity import SensitivityReport, full_report

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigurationError",
    "DiffusionSpec",
    "FrontSolution",
    "FrontSpeedError",
    "Grid",
    "HypothesisViolation",
    "NewtonOptions",
    "NonConvergenceError",
    "NonTransversalityError",
    "NormalizationError",
    "SensitivityReport",
    "SimulationBlowUp",
    "StageError",
    "TrackingError",
    "build_grid",
    "full_report",
    "grid_with_spacing",
    "make_model",
    "solve_standing_front",
    "solve_travelling_front",
]
