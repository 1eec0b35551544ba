"""Chvátal-Gomory cuts over a time window, with rhs strengthening (SCG).

All assembled rows are expressed over start columns x: a renewable row over z is
rewritten with z_jmt = sum of x_jmt' for the starts t' that cover t.  Every row has
nonnegative data, so restricting rows (and cuts) to a column subset keeps them valid,
and multipliers are taken nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..conflict import ConflictGraph, ConflictOracle
from ..lpcore import LIMIT, OPTIMAL, SolverHandle, build_problem, solve_milp
from ..model import NONRENEW, RENEW, RENEW_STRONG, ConstraintRow, Model
from .pool import MIN_VIOLATION, Cut

ETA = 10
IOTA = 1
SLIDE = 0.1
DELTA = 0.01
PENALTY = 1e-4
U_MAX = 0.99
COEF_BOUND = 100
MAX_PAIRS = 2000
TOL = 1e-9


@dataclass
class CgRow:
    coefs: dict[int, float]
    rhs: float
    kind: str
    tag: tuple = ()

    def restrict(self, cols) -> "CgRow":
        return CgRow({c: v for c, v in self.coefs.items() if c in cols}, self.rhs, self.kind, self.tag)


@dataclass
class CgSystem:
    rows: list[CgRow] = field(default_factory=list)
    columns: list[int] = field(default_factory=list)  # V
    window: tuple[int, int] = (0, 0)


# ---------------------------------------------------------------------------
# window search


def fractionality_by_period(model: Model, x: np.ndarray) -> np.ndarray:
    out = np.zeros(model.windows.horizon + 1)
    for c in model.index.x_columns():
        v = float(x[c])
        out[model.index.key(c)[3]] += abs(round(v) - v)
    return out


def best_interval(frac: Sequence[float], eta: int = ETA, iota: int = IOTA, slide: float = SLIDE) -> tuple[int, int]:
    """Slide a width-``eta`` interval by ``iota``; a later interval replaces the incumbent
    only when its mass exceeds the incumbent's by the fraction ``slide``."""
    if eta <= 0 or iota <= 0:
        raise ValueError("eta and iota must be positive")
    frac = np.asarray(frac, dtype=float)
    n = len(frac)
    if n <= eta:
        return 0, max(n - 1, 0)
    prefix = np.concatenate([[0.0], np.cumsum(frac)])
    best_s, best_v = 0, prefix[eta]
    for s in range(iota, n - eta + 1, iota):
        v = prefix[s + eta] - prefix[s]
        if v > best_v * (1.0 + slide) + TOL:
            best_s, best_v = s, v
    return best_s, best_s + eta - 1


def find_cg_window(model: Model, x: np.ndarray, eta: int = ETA, iota: int = IOTA,
                   slide: float = SLIDE) -> tuple[int, int]:
    return best_interval(fractionality_by_period(model, x), eta, iota, slide)


# ---------------------------------------------------------------------------
# constraint assembly


def renewable_in_x(model: Model, row: ConstraintRow) -> dict[int, float]:
    """A renewable row rewritten over start columns."""
    out: dict[int, float] = {}
    inst, idx = model.instance, model.index
    for c, a in zip(row.cols, row.coefs):
        _, j, m, t = idx.key(c)
        d = inst.jobs[j].modes[m].duration
        for u in range(t - d + 1, t + 1):
            col = idx.x(j, m, u)
            if col is not None:
                out[col] = out.get(col, 0.0) + a
    return out


def _renewable_rows(model: Model, lo: int, hi: int) -> list[CgRow]:
    out = []
    for row in model.rows:
        if row.kind in (RENEW, RENEW_STRONG) and lo <= row.tag[1] <= hi:
            out.append(CgRow(renewable_in_x(model, row), row.rhs, row.kind, row.tag))
    return out


def _job_rows(model: Model, cols) -> list[CgRow]:
    by_job: dict[int, dict[int, float]] = {}
    for c in sorted(cols):
        by_job.setdefault(model.index.key(c)[1], {})[c] = 1.0
    return [CgRow(coefs, 1.0, "assign", (j,)) for j, coefs in sorted(by_job.items())]


def _nonrenewable_rows(model: Model, cols) -> list[CgRow]:
    out = []
    for row in model.rows_of(NONRENEW):
        coefs = {c: v for c, v in zip(row.cols, row.coefs) if c in cols}
        if coefs:
            out.append(CgRow(coefs, row.rhs, NONRENEW, row.tag))
    return out


def _pair_rows(pairs, limit: Optional[int]) -> list[CgRow]:
    rows = [CgRow({a: 1.0, b: 1.0}, 1.0, "conflict", (a, b)) for a, b in pairs]
    return rows if limit is None else rows[:limit]


def assemble_cg_rows(model: Model, x: np.ndarray, graph: ConflictGraph, window: tuple[int, int],
                     max_pairs: Optional[int] = MAX_PAIRS) -> CgSystem:
    """Renewable rows of the window, then per-job, non-renewable and conflict rows over
    the variables those renewable rows involve."""
    lo, hi = window
    rows = _renewable_rows(model, lo, hi)
    V = sorted(set().union(*(r.coefs for r in rows))) if rows else []
    Vset = set(V)
    rows += _job_rows(model, V)
    rows += _nonrenewable_rows(model, Vset)
    pos = {c: i for i, c in enumerate(graph.vertices)}
    inside = [c for c in V if c in pos]
    pairs = []
    for a_i, a in enumerate(inside):
        for b in inside[a_i + 1:]:
            if graph.has_edge(pos[a], pos[b]):
                pairs.append((a, b))
    pairs.sort(key=lambda p: (-(x[p[0]] + x[p[1]]), p))
    rows += _pair_rows(pairs, max_pairs)
    return CgSystem(rows, V, window)


# ---------------------------------------------------------------------------
# separation


def cg_certificate(rows: Sequence[CgRow], u: Sequence[float], cols: Sequence[int]) -> tuple[dict[int, int], int]:
    """floor(u^T A_j) per column and floor(u^T b)."""
    lhs = {c: 0.0 for c in cols}
    rhs = 0.0
    for row, ui in zip(rows, u):
        if ui <= 0:
            continue
        for c, v in row.coefs.items():
            if c in lhs:
                lhs[c] += ui * v
        rhs += ui * row.rhs
    return {c: math.floor(v + TOL) for c, v in lhs.items()}, math.floor(rhs + TOL)


def solve_cg_separation(rows: Sequence[CgRow], cols: Sequence[int], xstar: Sequence[float],
                        backend: Optional[SolverHandle] = None, delta: float = DELTA,
                        penalty: float = PENALTY, coef_bound: int = COEF_BOUND,
                        u_max: float = U_MAX) -> Optional[np.ndarray]:
    """Multipliers u of the maximally violated rank-one cut (None if the MILP fails)."""
    R, H = len(rows), len(cols)
    if not R or not H:
        return None
    cpos = {c: k for k, c in enumerate(cols)}
    # columns: u[0:R], a[R:R+H], a0, f[R+H+1 : R+2H+1], f0
    A0, F, F0 = R + H, R + H + 1, R + 2 * H + 1
    n = F0 + 1
    lp_rows = []
    for k in range(H):
        lp_rows.append(({R + k: -1.0, F + k: -1.0}, "E", 0.0))
    for i, row in enumerate(rows):
        for c, v in row.coefs.items():
            k = cpos.get(c)
            if k is not None:
                lp_rows[k][0][i] = lp_rows[k][0].get(i, 0.0) + v
    lp_rows.append(({**{i: row.rhs for i, row in enumerate(rows) if row.rhs}, A0: -1.0, F0: -1.0}, "E", 0.0))
    obj = np.zeros(n)
    obj[:R] = -penalty
    obj[R:R + H] = np.asarray(xstar, dtype=float)
    obj[A0] = -1.0
    lb = np.zeros(n)
    ub = np.zeros(n)
    ub[:R] = u_max
    ub[R:R + H] = coef_bound
    ub[A0] = math.ceil(sum(abs(r.rhs) for r in rows)) + 1
    ub[F:F + H] = 1.0 - delta
    ub[F0] = 1.0 - delta
    integer = np.zeros(n, bool)
    integer[R:R + H + 1] = True
    prob = build_problem(obj, lp_rows, lb, ub, integer=integer, maximize=True)
    res = solve_milp(prob, backend)
    if res.status not in (OPTIMAL, LIMIT) or res.x is None:
        return None
    return np.clip(res.x[:R], 0.0, u_max)


def separate_cg(model: Model, x: np.ndarray, graph: ConflictGraph, window: Optional[tuple[int, int]] = None,
                delta: float = DELTA, penalty: float = PENALTY, backend: Optional[SolverHandle] = None,
                eta: int = ETA, iota: int = IOTA, slide: float = SLIDE, coef_bound: int = COEF_BOUND,
                min_violation: float = MIN_VIOLATION, system: Optional[CgSystem] = None) -> list[Cut]:
    """One maximally violated CG cut over the positive columns of the window's system."""
    if window is None:
        window = find_cg_window(model, x, eta, iota, slide)
    system = system or assemble_cg_rows(model, x, graph, window)
    H = [c for c in system.columns if x[c] > TOL]
    rows = [r.restrict(set(H)) for r in system.rows]
    rows = [r for r in rows if r.coefs]
    u = solve_cg_separation(rows, H, [x[c] for c in H], backend, delta, penalty, coef_bound)
    if u is None:
        return []
    coefs, rhs = cg_certificate(rows, u, H)
    used = {i: float(v) for i, v in enumerate(u) if v > TOL}
    cut = Cut.make({c: float(v) for c, v in coefs.items() if v}, float(rhs), "CG", x,
                   window=window, multipliers=used, rows=tuple(rows))
    return [cut] if cut.cols and cut.violation > min_violation else []


# ---------------------------------------------------------------------------
# rhs strengthening


def strengthening_rows(model: Model, cols: Sequence[int], oracle: Optional[ConflictOracle] = None) -> list[CgRow]:
    """Renewable, per-job, non-renewable and pairwise conflict rows restricted to ``cols``."""
    H = sorted(cols)
    Hset = set(H)
    periods = set()
    for c in H:
        _, j, m, t = model.index.key(c)
        periods.update(range(t, t + model.instance.jobs[j].modes[m].duration))
    rows = []
    for row in model.rows:
        if row.kind in (RENEW, RENEW_STRONG) and row.tag[1] in periods:
            r = CgRow(renewable_in_x(model, row), row.rhs, row.kind, row.tag).restrict(Hset)
            if sum(r.coefs.values()) > r.rhs + TOL:
                rows.append(r)
    rows += [r for r in _job_rows(model, H) if len(r.coefs) > 1]
    rows += [r for r in _nonrenewable_rows(model, Hset) if sum(r.coefs.values()) > r.rhs + TOL]
    oracle = oracle or ConflictOracle(model)
    if len(H) > 1:
        mat = oracle.matrix(H, H)
        for a in range(len(H)):
            for b in range(a + 1, len(H)):
                # same-job pairs are already covered by the per-job rows
                if mat[a, b] > 1:
                    rows.append(CgRow({H[a]: 1.0, H[b]: 1.0}, 1.0, "conflict", (H[a], H[b])))
    return rows


def max_lhs(cut: Cut, rows: Sequence[CgRow], backend: Optional[SolverHandle] = None) -> Optional[float]:
    """max sum a_j x_j over binary x subject to ``rows`` (None unless solved to optimality)."""
    cols = list(cut.cols)
    pos = {c: k for k, c in enumerate(cols)}
    lp_rows = [({pos[c]: v for c, v in r.coefs.items()}, "L", r.rhs) for r in rows if r.coefs]
    n = len(cols)
    prob = build_problem(np.array(cut.coefs, dtype=float), lp_rows, np.zeros(n), np.ones(n),
                         integer=np.ones(n, bool), maximize=True)
    res = solve_milp(prob, backend)
    if res.status != OPTIMAL:
        return None
    return float(res.objective)


def strengthen_cg_rhs(cut: Cut, model: Model, graph: Optional[ConflictGraph] = None,
                      backend: Optional[SolverHandle] = None, x: Optional[np.ndarray] = None,
                      rows: Optional[Sequence[CgRow]] = None) -> Cut:
    """Replace the rhs by the best lhs value any point satisfying the assembled rows can reach."""
    if any(c < 0 for c in cut.coefs):
        return cut
    if rows is None:
        rows = strengthening_rows(model, cut.cols, graph.oracle if graph is not None else None)
    best = max_lhs(cut, rows, backend)
    if best is None:
        return cut
    new_rhs = min(cut.rhs, math.floor(best + 1e-6))
    meta = dict(cut.meta)
    meta["original_rhs"] = cut.rhs
    return Cut.make(cut.as_dict(), new_rhs, "SCG", x, **meta) if x is not None else \
        Cut(cut.cols, cut.coefs, float(new_rhs), "SCG", cut.violation + cut.rhs - new_rhs, meta)


def separate_scg(model: Model, x: np.ndarray, graph: ConflictGraph, backend: Optional[SolverHandle] = None,
                 min_violation: float = MIN_VIOLATION, **kw) -> list[Cut]:
    out = []
    for cut in separate_cg(model, x, graph, backend=backend, min_violation=min_violation, **kw):
        strong = strengthen_cg_rhs(cut, model, graph, backend, x)
        if strong.violation > min_violation:
            out.append(strong)
    return out
