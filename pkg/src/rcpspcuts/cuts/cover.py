"""Knapsack cover cuts (CV) and the lifted multi-mode cover cuts (LCV) on renewable rows."""

from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np

from ..lpcore import LIMIT, OPTIMAL, SolverHandle, build_problem, solve_milp
from ..model import RENEW, RENEW_STRONG, ConstraintRow, Model
from .pool import LCV_MIN_VIOLATION, MIN_VIOLATION, Cut

OMEGA = 100_000.0
MU = 0.1
TOL = 1e-9


def _strict_rhs(coefs, rhs: float) -> float:
    """Smallest weight a set must reach to exceed ``rhs``."""
    if all(float(c).is_integer() for c in coefs):
        return math.floor(rhs + TOL) + 1
    return rhs + 1e-6


def separate_cover(x: np.ndarray, row: ConstraintRow, backend: Optional[SolverHandle] = None,
                   min_violation: float = MIN_VIOLATION) -> list[Cut]:
    """Most violated cover of a <=-row with nonnegative coefficients over binary columns.

    Solves min sum (1 - x_j) v_j s.t. sum b_j v_j > c over the columns with x_j > 0
    and returns sum_{V} x_j <= |V| - 1 when gamma < 1.
    """
    if row.sense != "L" or any(c < 0 for c in row.coefs):
        raise ValueError("cover separation needs a <=-row with nonnegative coefficients")
    support = [(c, b) for c, b in zip(row.cols, row.coefs) if x[c] > TOL and b > 0]
    if not support or sum(b for _, b in support) <= row.rhs + TOL:
        return []
    n = len(support)
    cost = np.array([1.0 - x[c] for c, _ in support])
    need = _strict_rhs([b for _, b in support], row.rhs)
    prob = build_problem(cost, [({i: b for i, (_, b) in enumerate(support)}, "G", need)],
                         np.zeros(n), np.ones(n), integer=np.ones(n, bool))
    res = solve_milp(prob, backend)
    if res.status not in (OPTIMAL, LIMIT) or res.x is None:
        return []
    chosen = [support[i][0] for i in range(n) if res.x[i] > 0.5]
    cut = Cut.make({c: 1.0 for c in chosen}, len(chosen) - 1, "CV", x, row=row.name)
    return [cut] if cut.violation > min_violation else []


def lcv_pairs(model: Model, x: np.ndarray, t: int) -> list[tuple[int, int, int]]:
    """(j, m, z column) at period t for jobs with some positive z value there.

    A job with zero activity at t lowers the cut violation by one when included,
    so it can never appear in a violated lifted cover and is left out.
    """
    out = []
    for job in model.instance.jobs:
        cols = [(m, model.index.z(job.id, m, t)) for m in range(len(job.modes))]
        cols = [(m, c) for m, c in cols if c is not None]
        if sum(x[c] for _, c in cols) > TOL:
            out.extend((job.id, m, c) for m, c in cols)
    return out


def separate_lifted_cover(model: Model, x: np.ndarray, r: int, t: int, backend: Optional[SolverHandle] = None,
                          omega: float = OMEGA, mu: float = MU, min_violation: float = LCV_MIN_VIOLATION,
                          capacity: Optional[float] = None) -> list[Cut]:
    """Lifted cover for renewable r at period t.

    Variables per (j, m): v (in the cut), w (cheapest selected mode of j); per job o;
    plus the excess e >= 1 and the violation vbar >= ``min_violation``.  Objective
    omega * vbar + mu * sum v.  The returned cut is sum_{v=1} z_jmt <= sum o_j - 1;
    ``meta['cover']`` holds the plain cover over the w-modes with the same rhs.
    """
    inst = model.instance
    cap = inst.renewables[r].capacity if capacity is None else capacity
    pairs = lcv_pairs(model, x, t)
    if not pairs:
        return []
    jobs = sorted({j for j, _, _ in pairs})
    q = {(j, m): float(inst.jobs[j].modes[m].renewable[r]) for j, m, _ in pairs}
    n_p, n_j = len(pairs), len(jobs)
    # columns: v[0:n_p], w[n_p:2n_p], o[2n_p:2n_p+n_j], e, vbar
    V, W, O = 0, n_p, 2 * n_p
    E, VB = 2 * n_p + n_j, 2 * n_p + n_j + 1
    n = VB + 1
    jpos = {j: k for k, j in enumerate(jobs)}
    rows = []
    for j in jobs:
        coefs = {O + jpos[j]: 1.0}
        for i, (jj, m, _) in enumerate(pairs):
            if jj == j:
                coefs[W + i] = -1.0
        rows.append((coefs, "E", 0.0))
    excess = {E: 1.0}
    for i, (j, m, _) in enumerate(pairs):
        if q[j, m]:
            excess[W + i] = -q[j, m]
    rows.append((excess, "E", -cap))
    for i, (j, m, _) in enumerate(pairs):
        coefs = {V + i: 1.0}
        for k, (jj, mm, _) in enumerate(pairs):
            if jj == j and q[j, mm] <= q[j, m]:
                coefs[W + k] = coefs.get(W + k, 0.0) - 1.0
        rows.append((coefs, "L", 0.0))
    viol = {VB: 1.0}
    for i, (_, _, c) in enumerate(pairs):
        if x[c]:
            viol[V + i] = -float(x[c])
    for k in range(n_j):
        viol[O + k] = 1.0
    rows.append((viol, "E", 1.0))
    obj = np.zeros(n)
    obj[V:V + n_p] = mu
    obj[VB] = omega
    lb = np.zeros(n)
    ub = np.ones(n)
    lb[E], ub[E] = 1.0, max(1.0, sum(q.values()))
    lb[VB], ub[VB] = min_violation, float(n_j) + 1.0
    integer = np.ones(n, bool)
    integer[VB] = False
    prob = build_problem(obj, rows, lb, ub, integer=integer, maximize=True)
    res = solve_milp(prob, backend)
    if res.status not in (OPTIMAL, LIMIT) or res.x is None:
        return []
    sol = res.x
    w_sel = {i for i in range(n_p) if sol[W + i] > 0.5}
    # the cheapest selected modes themselves are always admissible members
    v_sel = {i for i in range(n_p) if sol[V + i] > 0.5} | w_sel
    n_o = sum(1 for k in range(n_j) if sol[O + k] > 0.5)
    rhs = n_o - 1
    cover = tuple(sorted(pairs[i][2] for i in w_sel))
    cut = Cut.make({pairs[i][2]: 1.0 for i in v_sel}, rhs, "LCV", x, r=r, t=t, cover=cover)
    return [cut] if cut.violation >= min_violation - 1e-9 else []


def cover_counterpart(cut: Cut, x: Optional[np.ndarray] = None) -> Cut:
    """The plain cover (CV) an LCV cut was lifted from."""
    return Cut.make({c: 1.0 for c in cut.meta["cover"]}, cut.rhs, "CV", x)


def renewable_periods(model: Model, x: np.ndarray) -> list[tuple[int, int]]:
    """(r, t) pairs whose renewable row carries positive activity at ``x``."""
    seen = []
    for row in model.rows:
        if row.kind in (RENEW, RENEW_STRONG):
            rt = (row.tag[0], row.tag[1])
            if rt not in seen and row.activity(x) > TOL:
                seen.append(rt)
    return sorted(seen, key=lambda p: (p[1], p[0]))


def separate_lcv_all(model: Model, x: np.ndarray, backend: Optional[SolverHandle] = None,
                     omega: float = OMEGA, mu: float = MU, deadline: Optional[float] = None) -> list[Cut]:
    out = []
    for r, t in renewable_periods(model, x):
        if deadline is not None and time.monotonic() > deadline:
            break
        out.extend(separate_lifted_cover(model, x, r, t, backend, omega, mu))
    return out
