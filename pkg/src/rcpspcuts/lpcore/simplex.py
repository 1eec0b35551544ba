"""Bounded revised simplex (two phases, dense basis inverse with eta updates).

Pricing is Dantzig's rule with lowest-index tie breaking; after
``BLAND_AFTER`` degenerate pivots the method switches to Bland's rule for the
rest of the phase, which rules out cycling.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp

from .problem import ERROR, INFEASIBLE, LIMIT, OPTIMAL, UNBOUNDED, LinearProblem, LpSolution

BLAND_AFTER = 1000
REFACTOR_EVERY = 100
PIVOT_TOL = 1e-9
OPT_TOL = 1e-9
FEAS_TOL = 1e-7

BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3


class _Limit(Exception):
    pass


class _Numerical(Exception):
    pass


class _Tableau:
    def __init__(self, A: sp.csc_matrix, b, lb, ub, basis, status, x, deadline):
        self.A = A
        self.b = b
        self.lb = lb
        self.ub = ub
        self.basis = basis
        self.status = status
        self.x = x
        self.deadline = deadline
        self.iterations = 0
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis].toarray()
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            raise _Numerical("singular basis") from None
        nonbasic = self.status != BASIC
        rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.Binv @ rhs
        self.since_refactor = 0

    def run(self, cost: np.ndarray) -> str:
        A, lb, ub = self.A, self.lb, self.ub
        fixed = lb == ub
        degenerate = 0
        bland = False
        fresh = True
        while True:
            if self.deadline is not None and self.iterations % 20 == 0 and time.monotonic() > self.deadline:
                raise _Limit()
            if self.since_refactor >= REFACTOR_EVERY:
                self.refactor()
                fresh = True
            y = cost[self.basis] @ self.Binv
            d = cost - A.T @ y
            st = self.status
            cand = ((st == AT_LOWER) & (d < -OPT_TOL)) | ((st == AT_UPPER) & (d > OPT_TOL)) | \
                   ((st == FREE) & (np.abs(d) > OPT_TOL))
            cand &= ~fixed
            idx = np.flatnonzero(cand)
            if idx.size == 0:
                if not fresh:
                    self.refactor()
                    fresh = True
                    continue
                self.y, self.d = y, d
                return OPTIMAL
            q = int(idx[0]) if bland else int(idx[np.argmax(np.abs(d[idx]))])
            direction = 1.0 if (st[q] == AT_LOWER or (st[q] == FREE and d[q] < 0)) else -1.0
            col = A[:, q].toarray().ravel()
            g = direction * (self.Binv @ col)  # x_B moves by -theta * g

            xb = self.x[self.basis]
            lbb, ubb = lb[self.basis], ub[self.basis]
            ratios = np.full(g.shape, np.inf)
            dec = g > PIVOT_TOL
            inc = g < -PIVOT_TOL
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios[dec] = (xb[dec] - lbb[dec]) / g[dec]
                ratios[inc] = (ubb[inc] - xb[inc]) / -g[inc]
            ratios[~np.isfinite(ratios)] = np.inf
            np.maximum(ratios, 0.0, out=ratios)
            theta = float(ratios.min()) if ratios.size else np.inf
            span = ub[q] - lb[q]
            if not np.isfinite(theta) and not np.isfinite(span):
                return UNBOUNDED

            if span <= theta:
                # bound flip, basis unchanged
                step = span
                self.x[self.basis] = xb - step * g
                self.x[q] += direction * step
                self.status[q] = AT_UPPER if st[q] == AT_LOWER else AT_LOWER
                self.x[q] = ub[q] if self.status[q] == AT_UPPER else lb[q]
            else:
                ties = np.flatnonzero(ratios <= theta + 1e-12)
                if bland:
                    r = int(ties[np.argmin(np.asarray(self.basis)[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(g[ties]))])
                step = theta
                leaving = self.basis[r]
                self.x[self.basis] = xb - step * g
                self.x[q] += direction * step
                self.status[leaving] = AT_LOWER if g[r] > 0 else AT_UPPER
                self.x[leaving] = lb[leaving] if g[r] > 0 else ub[leaving]
                self.basis[r] = q
                self.status[q] = BASIC
                alpha = direction * g  # B^-1 a_q
                piv = alpha[r]
                row = self.Binv[r] / piv
                self.Binv -= np.outer(alpha, row)
                self.Binv[r] = row
                self.since_refactor += 1
            fresh = False
            self.iterations += 1
            if step < 1e-11:
                degenerate += 1
                if degenerate >= BLAND_AFTER:
                    bland = True


def solve_lp_builtin(prob: LinearProblem, time_limit: float | None = None,
                     deadline: float | None = None) -> LpSolution:
    if time_limit is not None:
        dl = time.monotonic() + time_limit
        deadline = dl if deadline is None else min(deadline, dl)
    m, n = prob.n_rows, prob.n_cols
    sign = -1.0 if prob.maximize else 1.0
    lb0, ub0 = prob.lb.astype(float), prob.ub.astype(float)
    if np.any(lb0 > ub0 + FEAS_TOL):
        return LpSolution(INFEASIBLE, message="empty column bounds")

    s_lb = np.where(prob.sense == "G", -np.inf, 0.0)
    s_ub = np.where(prob.sense == "L", np.inf, 0.0)

    status = np.empty(n, dtype=np.int8)
    x = np.zeros(n)
    fin_lb, fin_ub = np.isfinite(lb0), np.isfinite(ub0)
    status[fin_lb] = AT_LOWER
    x[fin_lb] = lb0[fin_lb]
    only_ub = ~fin_lb & fin_ub
    status[only_ub] = AT_UPPER
    x[only_ub] = ub0[only_ub]
    status[~fin_lb & ~fin_ub] = FREE

    resid = prob.b - prob.A @ x
    slack_val = np.clip(resid, s_lb, s_ub)
    excess = resid - slack_val
    art_rows = np.flatnonzero(np.abs(excess) > 0)
    k = art_rows.size

    A = sp.hstack([prob.A, sp.identity(m, format="csr"),
                   sp.csr_matrix((np.sign(excess[art_rows]), (art_rows, np.arange(k))), shape=(m, k))],
                  format="csc")
    lb = np.concatenate([lb0, s_lb, np.zeros(k)])
    ub = np.concatenate([ub0, s_ub, np.full(k, np.inf)])
    xs = np.concatenate([x, slack_val, np.abs(excess[art_rows])])
    st = np.concatenate([status, np.zeros(m, np.int8), np.zeros(k, np.int8)])
    basis = list(range(n, n + m))
    for pos, row in enumerate(art_rows):
        basis[row] = n + m + pos
        slack = n + row
        st[slack] = AT_LOWER if slack_val[row] == s_lb[row] else AT_UPPER
    for row in range(m):
        st[basis[row]] = BASIC

    tab = None
    try:
        tab = _Tableau(A, prob.b.astype(float), lb, ub, basis, st, xs, deadline)
        if k:
            c1 = np.zeros(n + m + k)
            c1[n + m:] = 1.0
            res = tab.run(c1)
            infeas = float(c1 @ tab.x)
            scale = max(1.0, float(np.max(np.abs(prob.b), initial=0.0)))
            if res != OPTIMAL or infeas > FEAS_TOL * scale:
                return LpSolution(INFEASIBLE, iterations=tab.iterations)
            ub[n + m:] = 0.0
            nb = (tab.status[n + m:] != BASIC)
            tab.x[n + m:][nb] = 0.0
        c2 = np.concatenate([sign * prob.c, np.zeros(m + k)])
        res = tab.run(c2)
    except _Limit:
        return LpSolution(LIMIT, iterations=tab.iterations if tab is not None else 0)
    except _Numerical as exc:
        return LpSolution(ERROR, message=str(exc))
    if res == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=tab.iterations)
    xs = tab.x[:n].copy()
    # snap tiny bound drift
    xs = np.clip(xs, lb0, ub0)
    if prob.max_violation(xs) > 1e-6 * max(1.0, float(np.max(np.abs(prob.b), initial=0.0))):
        return LpSolution(ERROR, message="primal infeasibility after refactorization", iterations=tab.iterations)
    return LpSolution(OPTIMAL, prob.objective(xs), xs, reduced_costs=sign * tab.d[:n], duals=sign * tab.y,
                      iterations=tab.iterations)
