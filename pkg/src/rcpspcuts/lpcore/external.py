"""Bridges to solvers outside this package.

``external``: the problem is written as a CPLEX LP file, a user-supplied shell
command template is run (``{lp}`` and ``{sol}`` are replaced by file paths),
and the solution file is read back.  The expected solution layout is the one
CBC writes with ``solu``::

    Optimal - objective value 3.00000000
          0 c0                   3                      0
          1 c1                   0.5                    -1

i.e. a status line followed by ``index name value [reduced-cost]`` rows;
columns that are not listed are zero.

``highs``: scipy's HiGHS bindings, used in-process.
"""

from __future__ import annotations

import math
import shlex
import subprocess
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .lpformat import write_lp
from .problem import ERROR, INFEASIBLE, LIMIT, OPTIMAL, UNBOUNDED, LinearProblem, LpSolution, SolverError

_STATUS_WORDS = (
    ("optimal", OPTIMAL),
    ("integer infeasible", INFEASIBLE),
    ("infeasible", INFEASIBLE),
    ("unbounded", UNBOUNDED),
    ("stopped", LIMIT),
)


def parse_solution(text: str, prob: LinearProblem) -> LpSolution:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SolverError("empty solution file")
    head = lines[0].strip().lower()
    status = next((s for word, s in _STATUS_WORDS if head.startswith(word)), None)
    if status is None:
        raise SolverError(f"unrecognised solution status line {lines[0]!r}")
    if status in (INFEASIBLE, UNBOUNDED):
        return LpSolution(status, message=lines[0].strip())
    index = {name: j for j, name in enumerate(_names(prob))}
    x = np.zeros(prob.n_cols)
    rc = np.zeros(prob.n_cols)
    seen = False
    for ln in lines[1:]:
        toks = ln.replace("**", " ").split()
        if len(toks) < 3 or toks[1] not in index:
            continue
        j = index[toks[1]]
        x[j] = float(toks[2])
        if len(toks) > 3:
            rc[j] = float(toks[3])
        seen = True
    if status == LIMIT and not seen:
        return LpSolution(LIMIT, message=lines[0].strip())
    return LpSolution(status, prob.objective(x), x, reduced_costs=rc, message=lines[0].strip())


def _names(prob: LinearProblem) -> list[str]:
    # neutral names keep the exchange independent of what the model calls its columns
    return [f"c{j}" for j in range(prob.n_cols)]


def solve_external(prob: LinearProblem, command: str, integer: bool, time_limit: Optional[float] = None) -> LpSolution:
    plain = LinearProblem(prob.c, prob.A, prob.sense, prob.b, prob.lb, prob.ub, prob.integer, prob.maximize,
                          _names(prob), None, prob.offset)
    with tempfile.TemporaryDirectory(prefix="rcpspcuts-") as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "model.sol"
        write_lp(plain, lp_path, integers=integer)
        cmd = command.format(lp=shlex.quote(str(lp_path)), sol=shlex.quote(str(sol_path)),
                             time=int(math.ceil(time_limit)) if time_limit else 0)
        try:
            proc = subprocess.run(cmd, shell=True, capture_output=True, text=True,
                                  timeout=None if time_limit is None else time_limit + 30)
        except subprocess.TimeoutExpired:
            return LpSolution(LIMIT, message="external solver timed out")
        if not sol_path.exists():
            raise SolverError(f"external solver wrote no solution (exit {proc.returncode}): "
                              f"{(proc.stderr or proc.stdout)[-400:]}")
        return parse_solution(sol_path.read_text(), plain)


def _highs_args(prob: LinearProblem):
    sign = -1.0 if prob.maximize else 1.0
    A = prob.A.tocsr()
    lo = np.where(prob.sense == "L", -np.inf, prob.b)
    hi = np.where(prob.sense == "G", np.inf, prob.b)
    return sign, A, lo, hi


def solve_highs_lp(prob: LinearProblem, time_limit: Optional[float] = None) -> LpSolution:
    sign, A, _, _ = _highs_args(prob)
    A_ub_parts, b_ub_parts = [], []
    le, ge, eq = prob.sense == "L", prob.sense == "G", prob.sense == "E"
    if le.any():
        A_ub_parts.append(A[le])
        b_ub_parts.append(prob.b[le])
    if ge.any():
        A_ub_parts.append(-A[ge])
        b_ub_parts.append(-prob.b[ge])
    A_ub = sp.vstack(A_ub_parts) if A_ub_parts else None
    b_ub = np.concatenate(b_ub_parts) if b_ub_parts else None
    opts = {"presolve": True}
    if time_limit:
        opts["time_limit"] = float(time_limit)
    res = linprog(sign * prob.c, A_ub=A_ub, b_ub=b_ub, A_eq=A[eq] if eq.any() else None,
                  b_eq=prob.b[eq] if eq.any() else None, bounds=np.column_stack([prob.lb, prob.ub]),
                  method="highs", options=opts)
    if res.status == 2:
        return LpSolution(INFEASIBLE, message=res.message)
    if res.status == 3:
        return LpSolution(UNBOUNDED, message=res.message)
    if res.status == 1:
        return LpSolution(LIMIT, message=res.message)
    if res.status != 0:
        return LpSolution(ERROR, message=res.message)
    rc = sign * (np.asarray(res.lower.marginals) + np.asarray(res.upper.marginals))
    x = np.asarray(res.x)
    return LpSolution(OPTIMAL, prob.objective(x), x, reduced_costs=rc, iterations=int(res.nit))


def solve_highs_milp(prob: LinearProblem, time_limit: Optional[float] = None, gap: float = 1e-6) -> LpSolution:
    sign, A, lo, hi = _highs_args(prob)
    opts = {"mip_rel_gap": 0.0}
    if time_limit:
        opts["time_limit"] = float(time_limit)
    cons = [LinearConstraint(A, lo, hi)] if prob.n_rows else []
    res = milp(sign * prob.c, constraints=cons, integrality=prob.integer.astype(int),
               bounds=Bounds(prob.lb, prob.ub), options=opts)
    if res.status == 2:
        return LpSolution(INFEASIBLE, message=res.message)
    if res.status == 3:
        return LpSolution(UNBOUNDED, message=res.message)
    if res.x is None:
        return LpSolution(LIMIT if res.status == 1 else ERROR, message=res.message)
    x = np.asarray(res.x)
    x[prob.integer] = np.round(x[prob.integer])
    return LpSolution(OPTIMAL if res.status == 0 else LIMIT, prob.objective(x), x, message=res.message)
