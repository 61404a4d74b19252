"""Averaged iteratively regularized incremental subgradient solver for VI-constrained problems."""

from .geometry import Ball, Box, NonnegativeOrthant, Polyhedron, WholeSpace, contains, diameter_bound, project, project_polyhedron
from .problem import (
    AgentOracle,
    ConstraintBlock,
    ProblemMetadata,
    VIConstrainedProblem,
    build_equality_coupled_problem,
    build_ncp_problem,
    build_penalty_agent,
    eval_global_mapping,
    eval_global_objective,
    validate_problem,
)
from .solver import RateSchedule, RunOptions, TikhonovSchedule, averaging_weights, run, schedule_values

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "Box",
    "NonnegativeOrthant",
    "Polyhedron",
    "WholeSpace",
    "contains",
    "diameter_bound",
    "project",
    "project_polyhedron",
    "AgentOracle",
    "ConstraintBlock",
    "ProblemMetadata",
    "VIConstrainedProblem",
    "build_equality_coupled_problem",
    "build_ncp_problem",
    "build_penalty_agent",
    "eval_global_mapping",
    "eval_global_objective",
    "validate_problem",
    "RateSchedule",
    "RunOptions",
    "TikhonovSchedule",
    "averaging_weights",
    "run",
    "schedule_values",
]
