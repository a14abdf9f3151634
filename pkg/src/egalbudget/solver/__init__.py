"""Optimization kernels shared by the rules and the price-of-fairness computations."""

from .egalitarian import (
    FREEZE_TOL,
    decomposition_feasible,
    hall_violation,
    leximin,
    lexicographic_max,
    lexicographic_stages,
    maximize_utility,
    maxmin_lp,
    optimal_egalitarian,
)
from .nash import NashConvergenceError, kkt_gradient, kkt_residual, nash_solve
from .simplex import LinearProgram, LPResult, SolverError, solve_lp

__all__ = [
    "FREEZE_TOL",
    "LPResult",
    "LinearProgram",
    "NashConvergenceError",
    "SolverError",
    "decomposition_feasible",
    "hall_violation",
    "kkt_gradient",
    "kkt_residual",
    "leximin",
    "lexicographic_max",
    "lexicographic_stages",
    "maximize_utility",
    "maxmin_lp",
    "nash_solve",
    "optimal_egalitarian",
    "solve_lp",
]
