"""Conflict graph over start variables x(j,m,t).

Two start variables conflict (cannot both be 1 in a feasible schedule whose
total project delay stays within alpha) when

1. they belong to the same job;
2. they start at the same period and their modes together exceed some
   renewable capacity;
3. one job is a transitive successor of the other and the successor would
   start before the shortest precedence chain allows;
4. they belong to different projects and the delays they force on their
   projects add up to more than alpha.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .model import Model

SAME_JOB = "same_job"
RESOURCE = "resource"
PRECEDENCE_WINDOW = "precedence_window"
CROSS_PROJECT = "cross_project_delay"
KINDS = (SAME_JOB, RESOURCE, PRECEDENCE_WINDOW, CROSS_PROJECT)


@dataclass(frozen=True)
class VariableOfInterest:
    col: int
    job: int
    mode: int
    t: int
    value: float
    reduced_cost: float


def default_rho(lb: Optional[float], ub: Optional[float]) -> float:
    if lb is None or ub is None:
        return 0.0
    return max(0.0, 0.5 * (ub - lb))


def select_interest(model: Model, x: np.ndarray, reduced_costs: Optional[np.ndarray] = None,
                    rho: float = 0.0, tol: float = 1e-9) -> list[VariableOfInterest]:
    """Start variables with positive value, plus zero-valued ones whose reduced cost is at most ``rho``."""
    out = []
    for c in model.index.x_columns():
        v = float(x[c])
        rc = float(reduced_costs[c]) if reduced_costs is not None else np.inf
        if v > tol or (reduced_costs is not None and rho > 0 and rc <= rho):
            _, j, m, t = model.index.key(c)
            out.append(VariableOfInterest(c, j, m, t, v, rc))
    return out


class ConflictOracle:
    """Evaluates the four conflict rules for arbitrary sets of start columns."""

    def __init__(self, model: Model, alpha: Optional[int] = None):
        inst, prec = model.instance, model.prec
        self.model = model
        self.alpha = model.windows.alpha if alpha is None else alpha
        n = inst.n_jobs
        self.caps = np.array([r.capacity for r in inst.renewables], dtype=float)
        # gap[j1, j2]: shortest fastest-mode chain strictly between j1 and j2, -1 when unrelated
        self.gap = np.full((n, n), -1, dtype=np.int64)
        for (j, s), d in prec.dist_fastest.items():
            self.gap[j, s] = d - prec.min_duration[j]
        self.project = np.array([job.project for job in inst.jobs])
        self.due = np.array([p.release + prec.cpd[p.id] for p in inst.projects])

    def attributes(self, cols: Sequence[int]):
        inst, prec = self.model.instance, self.model.prec
        keys = [self.model.index.key(c) for c in cols]
        job = np.array([k[1] for k in keys], dtype=np.int64)
        mode = np.array([k[2] for k in keys], dtype=np.int64)
        t = np.array([k[3] for k in keys], dtype=np.int64)
        dur = np.array([inst.jobs[j].modes[m].duration for j, m in zip(job, mode)], dtype=np.int64)
        q = np.array([inst.jobs[j].modes[m].renewable for j, m in zip(job, mode)], dtype=float).reshape(
            len(keys), len(self.caps))
        tail = np.array([prec.tail[j][m] for j, m in zip(job, mode)], dtype=np.int64)
        proj = self.project[job] if len(keys) else np.zeros(0, np.int64)
        delay = np.maximum(0, t + tail - self.due[proj]) if len(keys) else np.zeros(0, np.int64)
        return job, mode, t, dur, q, proj, delay

    def matrix(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Conflict kind codes (0 = none, k = rule k) between every row column and every col column."""
        a = self.attributes(rows)
        b = self.attributes(cols)
        ja, ma, ta, da, qa, pa, dla = a
        jb, mb, tb, db, qb, pb, dlb = b
        out = np.zeros((len(rows), len(cols)), dtype=np.int8)
        if not len(rows) or not len(cols):
            return out
        # rule 4 first so that more specific rules overwrite it
        r4 = (pa[:, None] != pb[None, :]) & (dla[:, None] + dlb[None, :] > self.alpha)
        out[r4] = 4
        g_ab = self.gap[ja[:, None], jb[None, :]]
        g_ba = self.gap[jb[None, :], ja[:, None]]
        end_a = (ta + da)[:, None]
        end_b = (tb + db)[None, :]
        r3 = ((g_ab >= 0) & ((end_a > tb[None, :]) | (tb[None, :] - end_a < g_ab))) | \
             ((g_ba >= 0) & ((end_b > ta[:, None]) | (ta[:, None] - end_b < g_ba)))
        out[r3] = 3
        if len(self.caps):
            over = np.zeros(out.shape, dtype=bool)
            for r, cap in enumerate(self.caps):
                over |= qa[:, r][:, None] + qb[:, r][None, :] > cap
            r2 = (ta[:, None] == tb[None, :]) & (da[:, None] > 0) & (db[None, :] > 0) & over
            out[r2] = 2
        r1 = ja[:, None] == jb[None, :]
        out[r1] = 1
        same = np.asarray(rows)[:, None] == np.asarray(cols)[None, :]
        out[same] = 0
        return out

    def conflicts(self, a: int, b: int) -> bool:
        return a != b and bool(self.matrix([a], [b])[0, 0])


@dataclass
class ConflictGraph:
    vertices: list[int]  # column ids, ascending
    values: np.ndarray  # x* per vertex
    adjacency: list[int]  # bitset per vertex (bit k = vertex k)
    kinds: dict[tuple[int, int], str] = field(default_factory=dict)  # (i, k) with i < k, vertex positions
    oracle: Optional[ConflictOracle] = None

    def __len__(self) -> int:
        return len(self.vertices)

    def has_edge(self, i: int, k: int) -> bool:
        return bool(self.adjacency[i] >> k & 1)

    def neighbors(self, i: int) -> list[int]:
        bits, out = self.adjacency[i], []
        while bits:
            low = bits & -bits
            out.append(low.bit_length() - 1)
            bits ^= low
        return out

    def degree(self, i: int) -> int:
        return bin(self.adjacency[i]).count("1")

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.kinds)

    def position(self, col: int) -> int:
        return self.vertices.index(col)

    def to_dot(self, model: Optional[Model] = None) -> str:
        lines = ["graph conflicts {"]
        for i, c in enumerate(self.vertices):
            label = model.index.name(c) if model is not None else str(c)
            lines.append(f'  v{i} [label="{label} {self.values[i]:.3g}"];')
        for (i, k), kind in sorted(self.kinds.items()):
            lines.append(f'  v{i} -- v{k} [label="{kind}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_conflict_graph(U: Iterable, model: Model, x: Optional[np.ndarray] = None,
                         alpha: Optional[int] = None, oracle: Optional[ConflictOracle] = None) -> ConflictGraph:
    """Graph on the start columns in ``U`` (column ids or VariableOfInterest records)."""
    cols = sorted({u.col if isinstance(u, VariableOfInterest) else int(u) for u in U})
    oracle = oracle or ConflictOracle(model, alpha)
    mat = oracle.matrix(cols, cols)
    n = len(cols)
    adjacency = [0] * n
    kinds = {}
    ii, kk = np.nonzero(mat)
    for i, k in zip(ii.tolist(), kk.tolist()):
        adjacency[i] |= 1 << k
        if i < k:
            kinds[i, k] = KINDS[mat[i, k] - 1]
    values = np.array([x[c] for c in cols]) if x is not None else np.zeros(n)
    return ConflictGraph(cols, values, adjacency, kinds, oracle)
