"""Coefficient strengthening of renewable resource rows.

For each period t the (job, mode) pairs that can be active at t are collected,
every subset of them that can run in parallel is enumerated, and the LP

    max  sum u_jm   s.t.  sum_{(j,m) in e} u_jm <= c  for every feasible subset e,
                           q_rjm <= u_jm <= c

gives per-pair coefficients u* that replace q_rjm in the row for (r, t).
"""

from __future__ import annotations

import logging
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .instances import Instance
from .lpcore import OPTIMAL, SolverHandle, build_problem, solve_lp
from .model import RENEW, RENEW_STRONG, ConstraintRow, Model
from .precedence import PrecedenceData, TimeWindows

log = logging.getLogger(__name__)

DEFAULT_IT = 200_000
SNAP_TOL = 1e-6


@dataclass(frozen=True)
class ActiveSet:
    t: int
    pairs: tuple[tuple[int, int], ...]  # sorted by (job, mode)

    def __len__(self) -> int:
        return len(self.pairs)

    def restrict(self, jobs) -> "ActiveSet":
        jobs = set(jobs)
        return ActiveSet(self.t, tuple(p for p in self.pairs if p[0] in jobs))


@dataclass
class FeasibleSubsets:
    subsets: list[frozenset[tuple[int, int]]]
    complete: bool
    iterations: int

    def __len__(self) -> int:
        return len(self.subsets)

    def maximal(self) -> list[frozenset[tuple[int, int]]]:
        """Members not contained in another member (the family is closed under taking subsets)."""
        family = set(self.subsets)
        pairs = set().union(*self.subsets) if self.subsets else set()
        return [s for s in self.subsets if not any(s | {p} in family for p in pairs - s)]


@dataclass
class StrengthenedRow:
    r: int
    t: int
    project: Optional[int]
    coefficients: dict[tuple[int, int], float]
    original: dict[tuple[int, int], float]

    @property
    def changes(self) -> list[tuple[tuple[int, int], float, float]]:
        return [(p, self.original.get(p, 0.0), v) for p, v in sorted(self.coefficients.items())
                if v > self.original.get(p, 0.0) + 1e-9]


@dataclass
class StrengthenedCoefficients:
    rows: list[StrengthenedRow] = field(default_factory=list)
    periods: dict[int, str] = field(default_factory=dict)  # t -> complete / incomplete / skipped
    elapsed: float = 0.0

    def provenance(self, r: int, t: int) -> str:
        return "strengthened" if any(x.r == r and x.t == t and x.changes for x in self.rows) else "original"


def active_pairs(instance: Instance, windows: TimeWindows, t: int) -> ActiveSet:
    """Pairs (j, m) that may be in process during period t."""
    pairs = []
    for job in instance.jobs:
        for m, mode in enumerate(job.modes):
            if t in windows.processing(job.id, m, mode.duration):
                pairs.append((job.id, m))
    return ActiveSet(t, tuple(pairs))


def _order(instance: Instance, pairs) -> list[tuple[int, int]]:
    def key(p):
        mode = instance.jobs[p[0]].modes[p[1]]
        return (-sum(mode.renewable), p[0], p[1])

    return sorted(pairs, key=key)


def enumerate_feasible_subsets(instance: Instance, prec: PrecedenceData, active: ActiveSet, t: int = None,
                               it: int = DEFAULT_IT, deadline: Optional[float] = None,
                               renewables: Optional[list[int]] = None, nonrenewable: bool = True,
                               precedence: bool = True) -> FeasibleSubsets:
    """All nonempty subsets of ``active`` that can be processed together.

    A subset qualifies when it holds at most one mode per job, no two jobs
    linked by precedence (if ``precedence``), fits every renewable capacity in
    ``renewables`` (all by default) and every non-renewable budget (if
    ``nonrenewable``).  Returns an empty, incomplete result when more than
    ``it`` subsets would be produced or the deadline passes.
    """
    if it <= 0:
        raise ValueError("iteration cap must be positive")
    pairs = _order(instance, active.pairs)
    n = len(pairs)
    ren = list(range(len(instance.renewables))) if renewables is None else list(renewables)
    caps = np.array([instance.renewables[r].capacity for r in ren], dtype=float)
    ncap = np.array([k.capacity for k in instance.nonrenewables], dtype=float) if nonrenewable else np.zeros(0)
    use_r = [np.array([instance.jobs[j].modes[m].renewable[r] for r in ren], dtype=float) for j, m in pairs]
    use_n = [np.array(instance.jobs[j].modes[m].nonrenewable, dtype=float) if nonrenewable else np.zeros(0)
             for j, m in pairs]
    clash = [0] * n
    for a in range(n):
        ja = pairs[a][0]
        for b in range(n):
            jb = pairs[b][0]
            if a != b and (ja == jb or (precedence and (prec.is_successor(ja, jb) or prec.is_successor(jb, ja)))):
                clash[a] |= 1 << b

    out: list[frozenset] = []
    count = 0
    aborted = False
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * n + 200))

    def rec(start: int, mask: int, members: list[int], ur: np.ndarray, un: np.ndarray):
        nonlocal count, aborted
        for i in range(start, n):
            if aborted:
                return
            if mask & clash[i]:
                continue
            nr = ur + use_r[i]
            if np.any(nr > caps):
                continue
            nn = un + use_n[i]
            if np.any(nn > ncap):
                continue
            count += 1
            if count > it or (deadline is not None and count % 512 == 0 and time.monotonic() > deadline):
                aborted = True
                return
            members.append(i)
            out.append(frozenset(pairs[k] for k in members))
            rec(i + 1, mask | (1 << i), members, nr, nn)
            members.pop()

    rec(0, 0, [], np.zeros(len(ren)), np.zeros(len(ncap)))
    if aborted:
        return FeasibleSubsets([], False, count)
    return FeasibleSubsets(out, True, count)


def solve_strengthening_lp(pairs, consumption: dict, capacity: float, subsets,
                           backend: Optional[SolverHandle] = None) -> Optional[dict[tuple[int, int], float]]:
    """Optimal u* for explicit data: ``consumption[(j, m)]`` is q_rjm, ``subsets`` the feasible subsets."""
    pairs = list(pairs)
    if not pairs:
        return {}
    c = float(capacity)
    pos = {p: i for i, p in enumerate(pairs)}
    q = np.array([consumption.get(p, 0.0) for p in pairs], dtype=float)
    if np.any(q > c):
        return None
    rows = [({pos[p]: 1.0 for p in e}, "L", c) for e in subsets]
    prob = build_problem(np.ones(len(pairs)), rows, q, np.full(len(pairs), c), maximize=True)
    res = solve_lp(prob, backend)
    if res.status != OPTIMAL:
        log.warning("strengthening LP ended with status %s", res.status)
        return None
    u = np.clip(res.x, q, c)
    snapped = np.round(u)
    u = np.where(np.abs(u - snapped) <= SNAP_TOL, snapped, u)
    return {p: float(u[i]) for i, p in enumerate(pairs)}


def strengthen_coefficients(instance: Instance, subsets: FeasibleSubsets, active: ActiveSet, r: int,
                            capacity: Optional[float] = None,
                            backend: Optional[SolverHandle] = None) -> Optional[dict[tuple[int, int], float]]:
    """Optimal u*_jm of the strengthening LP for resource r, or None if it could not be solved."""
    if not subsets.complete:
        raise ValueError("strengthening needs a complete subset enumeration")
    c = instance.renewables[r].capacity if capacity is None else capacity
    q = {(j, m): float(instance.jobs[j].modes[m].renewable[r]) for j, m in active.pairs}
    # non-maximal subsets only give implied rows (u >= 0), so only maximal ones are passed on
    return solve_strengthening_lp(active.pairs, q, c, subsets.maximal(), backend)


def _original_row(model: Model, r: int, t: int) -> Optional[ConstraintRow]:
    for row in model.rows:
        if row.kind == RENEW and row.tag == (r, t):
            return row
    return None


def _row_coefs(model: Model, r: int, t: int, jobs=None) -> dict[tuple[int, int], float]:
    out = {}
    for job in model.instance.jobs:
        if jobs is not None and job.id not in jobs:
            continue
        for m, mode in enumerate(job.modes):
            if mode.renewable[r] and model.index.z(job.id, m, t) is not None:
                out[job.id, m] = float(mode.renewable[r])
    return out


def compute_strengthening(model: Model, backend: Optional[SolverHandle] = None, it: int = DEFAULT_IT,
                          time_limit: Optional[float] = None) -> StrengthenedCoefficients:
    """Run the per-period enumerate-then-LP loop over all periods of the horizon."""
    inst = model.instance
    start = time.monotonic()
    deadline = None if time_limit is None else start + time_limit
    result = StrengthenedCoefficients()
    multi = inst.is_multi_project
    existing = {row.tag for row in model.rows if row.kind == RENEW}
    for t in range(model.windows.horizon + 1):
        if deadline is not None and time.monotonic() > deadline:
            result.periods[t] = "skipped"
            continue
        full = active_pairs(inst, model.windows, t)
        groups = [(p.id, full.restrict(p.jobs)) for p in inst.projects] if multi else [(None, full)]
        status = "complete"
        for project, act in groups:
            if not act.pairs:
                continue
            subsets = enumerate_feasible_subsets(inst, model.prec, act, t, it, deadline)
            if not subsets.complete:
                status = "incomplete"
                continue
            for r in range(len(inst.renewables)):
                if (r, t) not in existing:
                    continue
                jobs = None if project is None else set(inst.projects[project].jobs)
                original = _row_coefs(model, r, t, jobs)
                if not original:
                    continue
                u = strengthen_coefficients(inst, subsets, act, r, backend=backend)
                if u is None:
                    continue
                coefs = {p: v for p, v in u.items() if v > 0}
                result.rows.append(StrengthenedRow(r, t, project, coefs, original))
        result.periods[t] = status
        if deadline is not None and time.monotonic() > deadline:
            # later periods are skipped, matching a time limit checked after each period
            deadline = time.monotonic() - 1
    result.elapsed = time.monotonic() - start
    return result


def strengthened_row(model: Model, srow: StrengthenedRow) -> ConstraintRow:
    coefs = {model.index.z(j, m, srow.t): v for (j, m), v in srow.coefficients.items()}
    tag = (srow.r, srow.t) if srow.project is None else (srow.r, srow.t, srow.project)
    return ConstraintRow.from_dict(coefs, "L", model.instance.renewables[srow.r].capacity, RENEW_STRONG, tag)


def apply_strengthening(model: Model, coeffs: StrengthenedCoefficients, variant: Optional[str] = None) -> Model:
    """Single-project models get their renewable rows replaced where the new row is strictly
    stronger; multi-project models get per-project rows added next to the originals."""
    variant = variant or ("multi" if model.instance.is_multi_project else "single")
    useful = [s for s in coeffs.rows if s.changes]
    if not useful:
        return model
    if variant == "multi":
        return model.with_rows(strengthened_row(model, s) for s in useful)
    replace_by = {(s.r, s.t): strengthened_row(model, s) for s in useful}
    rows = [replace_by.get(row.tag, row) if row.kind == RENEW else row for row in model.rows]
    return model.with_row_list(rows)


def strengthen_model(model: Model, backend: Optional[SolverHandle] = None, it: int = DEFAULT_IT,
                     time_limit: Optional[float] = None) -> tuple[Model, StrengthenedCoefficients]:
    coeffs = compute_strengthening(model, backend, it, time_limit)
    return apply_strengthening(model, coeffs), coeffs
