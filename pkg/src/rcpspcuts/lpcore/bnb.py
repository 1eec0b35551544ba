"""Branch-and-bound over the builtin simplex.

Depth-first diving (nearest-rounding child first) until an incumbent exists, then
best-bound search.  A rounding heuristic fixes the rounded integer part and re-solves
for the continuous part at the root and periodically during the search.
"""

from __future__ import annotations

import heapq
import math
import time
from typing import Callable, Optional

import numpy as np

from .problem import ERROR, INFEASIBLE, LIMIT, OPTIMAL, UNBOUNDED, LinearProblem, LpSolution
from .simplex import solve_lp_builtin

INT_TOL = 1e-6
HEURISTIC_EVERY = 20


def _integral_objective(prob: LinearProblem) -> bool:
    c = prob.c
    if np.any((c != 0) & ~prob.integer):
        return False
    return bool(np.all(np.abs(c - np.round(c)) < 1e-12)) and float(prob.offset).is_integer()


def solve_milp_builtin(prob: LinearProblem, time_limit: Optional[float] = None, node_limit: int = 1_000_000,
                       gap: float = 1e-6, lp_solver: Callable = solve_lp_builtin) -> LpSolution:
    """Minimise (or maximise) ``prob`` exactly; ``gap`` is an absolute pruning tolerance."""
    deadline = time.monotonic() + time_limit if time_limit is not None else None
    sign = -1.0 if prob.maximize else 1.0
    lb = prob.lb.copy()
    ub = prob.ub.copy()
    ints = prob.integer
    lb[ints] = np.ceil(lb[ints] - INT_TOL)
    ub[ints] = np.floor(ub[ints] + INT_TOL)
    if np.any(lb > ub):
        return LpSolution(INFEASIBLE)
    round_bound = _integral_objective(prob)

    best_x: Optional[np.ndarray] = None
    best = math.inf  # in minimisation sense
    nodes = 0
    seq = 0
    heap: list = []
    stack: list = []  # dive nodes, used while there is no incumbent

    def incumbent(x):
        nonlocal best, best_x
        val = sign * prob.objective(x)
        if val < best:
            best, best_x = val, x

    def try_rounding(lo, hi, x):
        xi = np.clip(np.round(x), lo, hi)
        if not np.any(~ints):
            if prob.max_violation(xi) <= 1e-7:
                incumbent(xi)
            return
        flo, fhi = lo.copy(), hi.copy()
        flo[ints] = fhi[ints] = xi[ints]
        res = solve(flo, fhi)
        if res.status == OPTIMAL:
            y = res.x.copy()
            y[ints] = xi[ints]
            if prob.max_violation(y) <= 1e-7:
                incumbent(y)

    def solve(lo, hi):
        remaining = None if deadline is None else max(deadline - time.monotonic(), 1e-3)
        return lp_solver(prob.with_bounds(lo, hi).relaxation(), time_limit=remaining)

    def push(lo, hi):
        nonlocal seq, best, best_x
        res = solve(lo, hi)
        if res.status == INFEASIBLE:
            return None
        if res.status != OPTIMAL:
            return res.status
        val = sign * res.objective
        if round_bound:
            val = math.ceil(val - 1e-6)
        if val >= best - gap:
            return None
        x = res.x
        frac = np.abs(x - np.round(x))
        frac[~ints] = 0.0
        if frac.max(initial=0.0) <= INT_TOL:
            xi = x.copy()
            xi[ints] = np.round(xi[ints])
            incumbent(xi)
            return None
        if best_x is None and (seq == 0 or seq % HEURISTIC_EVERY == 0):
            try_rounding(lo, hi, x)
        node = (val, seq, lo, hi, x)
        if best_x is None:
            stack.append(node)
        else:
            heapq.heappush(heap, node)
        seq += 1
        return None

    def pop():
        if best_x is None and stack:
            return stack.pop()
        while stack:
            heapq.heappush(heap, stack.pop())
        return heapq.heappop(heap)

    root = push(lb, ub)
    nodes = 1
    if root == UNBOUNDED:
        return LpSolution(UNBOUNDED, nodes=1)
    if root in (LIMIT, ERROR):
        return LpSolution(root, nodes=1)
    status = OPTIMAL
    while heap or stack:
        val, _, lo, hi, x = pop()
        if val >= best - gap:
            continue
        if nodes >= node_limit or (deadline is not None and time.monotonic() > deadline):
            heapq.heappush(heap, (val, -1, lo, hi, x))
            status = LIMIT
            break
        frac = np.abs(x - np.floor(x) - 0.5)
        frac[~ints] = np.inf
        frac[np.abs(x - np.round(x)) <= INT_TOL] = np.inf
        j = int(np.argmin(frac))  # most fractional, lowest index on ties
        down_hi = hi.copy()
        down_hi[j] = math.floor(x[j])
        up_lo = lo.copy()
        up_lo[j] = math.ceil(x[j])
        children = [(lo, down_hi), (up_lo, hi)]
        if x[j] - math.floor(x[j]) >= 0.5:
            # the last child pushed is dived into first: make that the nearest rounding
            children.reverse()
        for child in reversed(children):
            out = push(*child)
            nodes += 1
            if out in (LIMIT, ERROR):
                status = LIMIT if out == LIMIT else ERROR
        if status == ERROR:
            break
    bound = min([best] + [h[0] for h in heap] + [h[0] for h in stack])
    if best_x is None:
        if status == OPTIMAL:
            return LpSolution(INFEASIBLE, nodes=nodes)
        return LpSolution(status, nodes=nodes, bound=sign * bound)
    return LpSolution(status, prob.objective(best_x), best_x, nodes=nodes, bound=sign * bound)
