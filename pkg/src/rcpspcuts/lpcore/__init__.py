"""Solver contract shared by the engine and the separation subproblems."""

from __future__ import annotations

from typing import Optional

from .bnb import solve_milp_builtin
from .external import solve_external, solve_highs_lp, solve_highs_milp
from .lpformat import format_lp, parse_lp, read_lp, write_lp
from .problem import (ERROR, INFEASIBLE, LIMIT, OPTIMAL, UNBOUNDED, LinearProblem, LpSolution, SolverError,
                      SolverHandle, build_problem)
from .simplex import solve_lp_builtin

DEFAULT = SolverHandle()


def solve_lp(prob: LinearProblem, handle: Optional[SolverHandle] = None) -> LpSolution:
    """Solve the LP relaxation of ``prob`` (integrality flags are ignored)."""
    handle = handle or DEFAULT
    if handle.kind == "builtin":
        return solve_lp_builtin(prob.relaxation(), time_limit=handle.time_limit)
    if handle.kind == "highs":
        return solve_highs_lp(prob, handle.time_limit)
    return solve_external(prob, handle.command, integer=False, time_limit=handle.time_limit)


def solve_milp(prob: LinearProblem, handle: Optional[SolverHandle] = None) -> LpSolution:
    handle = handle or DEFAULT
    if not prob.is_mip:
        return solve_lp(prob, handle)
    if handle.kind == "builtin":
        return solve_milp_builtin(prob, handle.time_limit, handle.node_limit, handle.mip_gap)
    if handle.kind == "highs":
        return solve_highs_milp(prob, handle.time_limit, handle.mip_gap)
    return solve_external(prob, handle.command, integer=True, time_limit=handle.time_limit)


__all__ = [
    "ERROR", "INFEASIBLE", "LIMIT", "OPTIMAL", "UNBOUNDED", "LinearProblem", "LpSolution", "SolverError",
    "SolverHandle", "build_problem", "solve_lp", "solve_milp", "format_lp", "parse_lp", "read_lp", "write_lp",
    "solve_lp_builtin", "solve_milp_builtin",
]
