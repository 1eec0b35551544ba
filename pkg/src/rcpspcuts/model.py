"""Time-indexed MILP: variable index, constraint rows, LP export and reporting.

Columns are x(j,m,t) (job j starts in mode m at t), z(j,m,t) (job j is being
processed in mode m during t) and the makespan column h.  x columns exist for
t in the start window of (j,m); z columns for the periods (j,m) can be active,
i.e. from the first start to the last start plus d_jm - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .instances import Instance
from .lpcore import OPTIMAL, LinearProblem, SolverHandle, format_lp, solve_lp
from .precedence import PrecedenceData, TimeWindows

ASSIGN = "assign"
NONRENEW = "nonrenew"
RENEW = "renew"
RENEW_STRONG = "renew_strengthened"
PRECEDENCE = "precedence"
LINK = "link"
MAKESPAN = "makespan"
CUT = "cut"


class EmptyWindowError(ValueError):
    pass


class UndefinedGapError(ValueError):
    pass


class VarIndex:
    """Bijection between (kind, j, m, t) keys and column ids; ``h`` is the last column."""

    def __init__(self, keys: Sequence[tuple]):
        self.keys: tuple[tuple, ...] = tuple(keys)
        self._ids = {k: i for i, k in enumerate(self.keys)}
        if len(self._ids) != len(self.keys):
            raise ValueError("duplicate variable keys")
        self.h = self._ids.get(("h",))

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key) -> bool:
        return key in self._ids

    def id(self, kind: str, j: int = None, m: int = None, t: int = None) -> int:
        return self._ids[(kind,) if kind == "h" else (kind, j, m, t)]

    def get(self, kind: str, j: int, m: int, t: int) -> Optional[int]:
        return self._ids.get((kind, j, m, t))

    def x(self, j: int, m: int, t: int) -> Optional[int]:
        return self._ids.get(("x", j, m, t))

    def z(self, j: int, m: int, t: int) -> Optional[int]:
        return self._ids.get(("z", j, m, t))

    def key(self, col: int) -> tuple:
        return self.keys[col]

    def name(self, col: int) -> str:
        k = self.keys[col]
        return "h" if k[0] == "h" else f"{k[0]}({k[1]},{k[2]},{k[3]})"

    def names(self) -> list[str]:
        return [self.name(i) for i in range(len(self.keys))]

    def x_columns(self) -> list[int]:
        return [i for i, k in enumerate(self.keys) if k[0] == "x"]


@dataclass(frozen=True)
class ConstraintRow:
    cols: tuple[int, ...]
    coefs: tuple[float, ...]
    sense: str  # "L", "E" or "G"
    rhs: float
    kind: str
    tag: tuple = ()

    def __post_init__(self):
        if len(set(self.cols)) != len(self.cols):
            raise ValueError(f"duplicate columns in row {self.kind}{self.tag}")
        if len(self.cols) != len(self.coefs) or not all(math.isfinite(c) for c in self.coefs):
            raise ValueError(f"bad coefficients in row {self.kind}{self.tag}")

    @classmethod
    def from_dict(cls, coefs: Mapping[int, float], sense: str, rhs: float, kind: str, tag: tuple = ()) -> "ConstraintRow":
        items = sorted((c, float(v)) for c, v in coefs.items() if v != 0)
        return cls(tuple(c for c, _ in items), tuple(v for _, v in items), sense, float(rhs), kind, tuple(tag))

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.cols, self.coefs))

    def activity(self, x: np.ndarray) -> float:
        return float(np.dot(x[list(self.cols)], self.coefs)) if self.cols else 0.0

    def violation(self, x: np.ndarray) -> float:
        a = self.activity(x)
        if self.sense == "L":
            return a - self.rhs
        if self.sense == "G":
            return self.rhs - a
        return abs(a - self.rhs)

    @property
    def name(self) -> str:
        return self.kind + ("(" + ",".join(str(v) for v in self.tag) + ")" if self.tag else "")


@dataclass(frozen=True)
class Model:
    instance: Instance
    prec: PrecedenceData
    windows: TimeWindows
    index: VarIndex
    obj: np.ndarray = field(repr=False)
    lb: np.ndarray = field(repr=False)
    ub: np.ndarray = field(repr=False)
    integer: np.ndarray = field(repr=False)
    rows: tuple[ConstraintRow, ...] = ()
    eps: float = 0.0
    revision: int = 0

    @property
    def n_cols(self) -> int:
        return len(self.index)

    def rows_of(self, kind: str) -> list[ConstraintRow]:
        return [r for r in self.rows if r.kind == kind]

    def count(self, kind: str) -> int:
        return sum(1 for r in self.rows if r.kind == kind)

    def with_rows(self, extra: Iterable[ConstraintRow]) -> "Model":
        extra = tuple(extra)
        if not extra:
            return self
        return replace(self, rows=self.rows + extra, revision=self.revision + 1)

    def with_row_list(self, rows: Iterable[ConstraintRow]) -> "Model":
        return replace(self, rows=tuple(rows), revision=self.revision + 1)

    def to_problem(self, integer: bool = True) -> LinearProblem:
        data, ri, ci = [], [], []
        for i, row in enumerate(self.rows):
            ri.extend([i] * len(row.cols))
            ci.extend(row.cols)
            data.extend(row.coefs)
        A = sp.csr_matrix((data, (ri, ci)), shape=(len(self.rows), self.n_cols))
        return LinearProblem(self.obj, A, np.array([r.sense for r in self.rows], dtype="<U1"),
                             np.array([r.rhs for r in self.rows], dtype=float), self.lb, self.ub,
                             self.integer if integer else np.zeros(self.n_cols, bool),
                             names=self.index.names(), row_names=[r.name for r in self.rows])

    def delay_part(self, x: np.ndarray) -> float:
        """Objective value without the ε·h tie-breaker (the total project delay part)."""
        h = self.index.h
        return float(self.obj @ x - (self.obj[h] * x[h] if h is not None else 0.0))

    def max_violation(self, x: np.ndarray) -> float:
        return self.to_problem().max_violation(x)


def default_eps(horizon: int) -> float:
    return 1e-4 / (horizon + 1)


def build_model(instance: Instance, windows: TimeWindows, prec: PrecedenceData, eps: Optional[float] = None) -> Model:
    if eps is None:
        eps = default_eps(windows.horizon)
    keys: list[tuple] = []
    for job in instance.jobs:
        if not any(lo <= hi for lo, hi in (windows.start[job.id, m] for m in range(len(job.modes)))):
            raise EmptyWindowError(f"job {job.id} has no admissible start period")
        for m in range(len(job.modes)):
            keys.extend(("x", job.id, m, t) for t in windows.window(job.id, m))
    for job in instance.jobs:
        for m, mode in enumerate(job.modes):
            keys.extend(("z", job.id, m, t) for t in windows.processing(job.id, m, mode.duration))
    keys.append(("h",))
    index = VarIndex(keys)
    n = len(index)

    obj = np.zeros(n)
    for p in instance.projects:
        due = p.release + prec.cpd[p.id]
        for m in range(len(instance.jobs[p.sink].modes)):
            for t in windows.window(p.sink, m):
                obj[index.x(p.sink, m, t)] = t - due
    obj[index.h] = eps
    lb = np.zeros(n)
    ub = np.ones(n)
    ub[index.h] = windows.horizon
    integer = np.ones(n, bool)

    rows: list[ConstraintRow] = []
    X = lambda j, m: [(t, index.x(j, m, t)) for t in windows.window(j, m)]  # noqa: E731

    for job in instance.jobs:
        coefs = {c: 1.0 for m in range(len(job.modes)) for _, c in X(job.id, m)}
        rows.append(ConstraintRow.from_dict(coefs, "E", 1, ASSIGN, (job.id,)))

    for k, pool in enumerate(instance.nonrenewables):
        coefs = {}
        for job in instance.jobs:
            for m, mode in enumerate(job.modes):
                if mode.nonrenewable[k]:
                    for _, c in X(job.id, m):
                        coefs[c] = mode.nonrenewable[k]
        if coefs:
            rows.append(ConstraintRow.from_dict(coefs, "L", pool.capacity, NONRENEW, (k,)))

    for r, pool in enumerate(instance.renewables):
        for t in range(windows.horizon + 1):
            coefs = {}
            for job in instance.jobs:
                for m, mode in enumerate(job.modes):
                    if mode.renewable[r]:
                        c = index.z(job.id, m, t)
                        if c is not None:
                            coefs[c] = mode.renewable[r]
            if coefs:
                rows.append(ConstraintRow.from_dict(coefs, "L", pool.capacity, RENEW, (r, t)))

    for job in instance.jobs:
        for s in job.successors:
            coefs: dict[int, float] = {}
            for m, mode in enumerate(job.modes):
                for t, c in X(job.id, m):
                    coefs[c] = t + mode.duration
            for m in range(len(instance.jobs[s].modes)):
                for t, c in X(s, m):
                    coefs[c] = coefs.get(c, 0.0) - t
            rows.append(ConstraintRow.from_dict(coefs, "L", 0, PRECEDENCE, (job.id, s)))

    for job in instance.jobs:
        for m, mode in enumerate(job.modes):
            lo, hi = windows.start[job.id, m]
            for t in windows.processing(job.id, m, mode.duration):
                coefs = {index.z(job.id, m, t): 1.0}
                for t2 in range(max(lo, t - mode.duration + 1), min(hi, t) + 1):
                    coefs[index.x(job.id, m, t2)] = -1.0
                rows.append(ConstraintRow.from_dict(coefs, "E", 0, LINK, (job.id, m, t)))

    for p in instance.projects:
        coefs = {c: t for m in range(len(instance.jobs[p.sink].modes)) for t, c in X(p.sink, m)}
        coefs[index.h] = -1.0
        rows.append(ConstraintRow.from_dict(coefs, "L", 0, MAKESPAN, (p.id,)))

    return Model(instance, prec, windows, index, obj, lb, ub, integer, tuple(rows), eps)


@dataclass
class FractionalSolution:
    status: str
    value: Optional[float]
    x: Optional[np.ndarray]
    reduced_costs: Optional[np.ndarray] = None
    revision: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL

    def is_integral(self, tol: float = 1e-6) -> bool:
        return self.x is not None and bool(np.all(np.abs(self.x - np.round(self.x)) <= tol))


def lp_bound(model: Model, backend: Optional[SolverHandle] = None) -> tuple[Optional[float], FractionalSolution]:
    """LP relaxation optimum of ``model`` (value ``None`` unless the LP was solved to optimality)."""
    res = solve_lp(model.to_problem(integer=False), backend)
    sol = FractionalSolution(res.status, res.objective if res.ok else None, res.x if res.ok else None,
                             res.reduced_costs if res.ok else None, model.revision)
    return sol.value, sol


def export_lp(model: Model, path=None, title: str = "") -> str:
    text = format_lp(model.to_problem(), title or model.instance.name)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# schedules and reports


def solution_from_schedule(model: Model, schedule: Mapping[int, tuple[int, int]]) -> np.ndarray:
    """Column vector for ``{job: (mode, start)}``; raises KeyError if a start is outside its window."""
    x = np.zeros(model.n_cols)
    for j, (m, t) in schedule.items():
        x[model.index.id("x", j, m, t)] = 1.0
        d = model.instance.jobs[j].modes[m].duration
        for u in range(t, t + d):
            x[model.index.id("z", j, m, u)] = 1.0
    x[model.index.h] = max(schedule[p.sink][1] for p in model.instance.projects)
    return x


def schedule_from_solution(model: Model, x: np.ndarray, tol: float = 0.5) -> dict[int, tuple[int, int]]:
    out = {}
    for c in model.index.x_columns():
        if x[c] > tol:
            _, j, m, t = model.index.key(c)
            out[j] = (m, t)
    return out


def integrality_gap(lb: float, ub: float) -> float:
    if ub <= 0:
        raise UndefinedGapError(f"gap undefined for upper bound {ub}")
    return (ub - lb) / ub


@dataclass
class ScheduleReport:
    finish: list[float]
    makespan: list[float]
    delay: list[float]
    tpd: float
    tms: float
    objective: float
    lower_bound: float
    gap: Optional[float]
    gap_defined: bool


def report(model: Model, solution: np.ndarray, ub: Optional[float] = None) -> ScheduleReport:
    x = np.asarray(solution, dtype=float)
    if x.shape != (model.n_cols,):
        raise ValueError(f"solution has {x.shape} entries, model has {model.n_cols} columns")
    inst = model.instance
    finish, ms, pd = [], [], []
    for p in inst.projects:
        f = sum(t * x[model.index.x(p.sink, m, t)] for m in range(len(inst.jobs[p.sink].modes))
                for t in model.windows.window(p.sink, m))
        finish.append(f)
        ms.append(f - p.release)
        pd.append(ms[-1] - model.prec.cpd[p.id])
    lb = model.delay_part(x)
    gap, defined = None, False
    if ub is not None:
        try:
            gap, defined = integrality_gap(lb, ub), True
        except UndefinedGapError:
            pass
    return ScheduleReport(finish, ms, pd, float(sum(pd)), float(sum(ms)), float(model.obj @ x), lb, gap, defined)
