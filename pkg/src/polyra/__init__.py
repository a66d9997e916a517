"""Polytope-based online allocation with time-flexible customers."""

from .core import (
    ArrivalEvent,
    ArrivalSequence,
    PeriodTrace,
    ProblemInstance,
    ball_queyranne_L,
    big_G,
    opt_period,
    opt_total_flexible,
    validate_instance,
)
from .engine import BucketState, SimulationReport, end_of_period, polyra_accept, run_simulation
from .polytope import NestSizes, Polytope, check_consistency, max_increment, nested_polytope
from .simplex import LinearProgram, LpSolution, solve_lp

__version__ = "0.1.0"

__all__ = [
    "ArrivalEvent",
    "ArrivalSequence",
    "BucketState",
    "LinearProgram",
    "LpSolution",
    "NestSizes",
    "PeriodTrace",
    "Polytope",
    "ProblemInstance",
    "SimulationReport",
    "ball_queyranne_L",
    "big_G",
    "check_consistency",
    "end_of_period",
    "max_increment",
    "nested_polytope",
    "opt_period",
    "opt_total_flexible",
    "polyra_accept",
    "run_simulation",
    "solve_lp",
    "validate_instance",
]
