"""Precedence graph analysis: CPM, fastest-mode distances and start windows."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .instances import Instance, InstanceError, topological_order

PATH_CAP = 10_000


class CycleError(InstanceError):
    pass


class InfeasibleBoundError(InstanceError):
    pass


@dataclass(frozen=True)
class PrecedenceData:
    order: tuple[int, ...]  # topological order
    predecessors: tuple[tuple[int, ...], ...]
    successors: tuple[tuple[int, ...], ...]
    transitive: tuple[frozenset[int], ...]  # S̄_j
    earliest: tuple[int, ...]  # ĕ_j, includes σ_p
    cpd: tuple[int, ...]  # λ_p per project
    tail: tuple[tuple[int, ...], ...]  # L_jm
    dist_by_mode: Mapping[tuple[int, int, int], int]  # d̆_jms
    dist_fastest: Mapping[tuple[int, int], int]  # d̆*_js
    min_duration: tuple[int, ...]

    def is_successor(self, j: int, s: int) -> bool:
        return s in self.transitive[j]


@dataclass(frozen=True)
class TimeWindows:
    horizon: int  # t̆
    alpha: int
    upper_bounds: tuple[int, ...]  # β_p
    start: Mapping[tuple[int, int], tuple[int, int]]  # T_jm as (first, last)
    first: tuple[int, ...]  # e_j
    last: tuple[int, ...]  # l_j

    def window(self, j: int, m: int) -> range:
        lo, hi = self.start[j, m]
        return range(lo, hi + 1)

    def processing(self, j: int, m: int, duration: int) -> range:
        """Periods in which (j, m) can be active: starts plus the d-1 following periods."""
        lo, hi = self.start[j, m]
        return range(lo, hi + duration) if duration > 0 and lo <= hi else range(0)


def run_cpm(instance: Instance) -> PrecedenceData:
    n = instance.n_jobs
    succ = tuple(tuple(sorted(j.successors)) for j in instance.jobs)
    pred_l: list[list[int]] = [[] for _ in range(n)]
    for j, ss in enumerate(succ):
        for s in ss:
            pred_l[s].append(j)
    pred = tuple(tuple(sorted(p)) for p in pred_l)
    order = topological_order(n, instance.arcs)
    if order is None:
        raise CycleError("precedence relation contains a cycle")
    dmin = tuple(job.min_duration for job in instance.jobs)

    earliest = [0] * n
    for j in order:
        base = instance.projects[instance.jobs[j].project].release
        earliest[j] = max([base] + [earliest[i] + dmin[i] for i in pred[j]])
    cpd = tuple(earliest[p.sink] - p.release for p in instance.projects)

    # longest fastest-mode chain from j to the sink, j's own duration included
    fast_tail = [0] * n
    for j in reversed(order):
        fast_tail[j] = dmin[j] + max((fast_tail[s] for s in succ[j]), default=0)
    tail = tuple(
        tuple(m.duration + max((fast_tail[s] for s in succ[j]), default=0) for m in job.modes)
        for j, job in enumerate(instance.jobs)
    )

    transitive: list[frozenset[int]] = [frozenset()] * n
    for j in reversed(order):
        acc = set(succ[j])
        for s in succ[j]:
            acc |= transitive[s]
        transitive[j] = frozenset(acc)

    # shortest chain from j to s counting fastest durations of the jobs strictly between them
    pos = {v: k for k, v in enumerate(order)}
    by_mode: dict[tuple[int, int, int], int] = {}
    fastest: dict[tuple[int, int], int] = {}
    for j in range(n):
        if not transitive[j]:
            continue
        gap: dict[int, int] = {}
        for s in sorted(transitive[j], key=pos.__getitem__):
            gap[s] = min(0 if k == j else gap[k] + dmin[k] for k in pred[s] if k == j or k in gap)
        for s, g in gap.items():
            for m, mode in enumerate(instance.jobs[j].modes):
                by_mode[j, m, s] = mode.duration + g
            fastest[j, s] = dmin[j] + g
    return PrecedenceData(tuple(order), pred, succ, tuple(transitive), tuple(earliest), cpd, tail,
                          by_mode, fastest, dmin)


def compute_windows(instance: Instance, prec: PrecedenceData, upper_bounds: Sequence[int] | None = None) -> TimeWindows:
    """Start windows for every (job, mode) given per-project upper bounds β_p.

    Without explicit bounds, each project's ``upper_bound`` field is used, and
    failing that the serial bound σ_p + Σ_j max_m d_jm.
    """
    if upper_bounds is None:
        upper_bounds = [
            p.upper_bound if p.upper_bound is not None
            else p.release + sum(instance.jobs[j].max_duration for j in p.jobs)
            for p in instance.projects
        ]
    upper_bounds = tuple(int(b) for b in upper_bounds)
    if len(upper_bounds) != len(instance.projects):
        raise ValueError("one upper bound per project expected")
    slack = []
    for p, beta in zip(instance.projects, upper_bounds):
        floor = p.release + prec.cpd[p.id]
        if beta < floor:
            raise InfeasibleBoundError(f"project {p.id}: upper bound {beta} < release + cpd = {floor}")
        slack.append(beta - floor)
    alpha = sum(slack)
    horizon = max(p.release + prec.cpd[p.id] + alpha for p in instance.projects)

    start = {}
    first, last = [], []
    for j, job in enumerate(instance.jobs):
        p = instance.projects[job.project]
        due = p.release + prec.cpd[p.id] + alpha
        lo_all, hi_all = None, None
        for m in range(len(job.modes)):
            lo, hi = prec.earliest[j], due - prec.tail[j][m]
            start[j, m] = (lo, hi)
            if lo <= hi:
                lo_all = lo if lo_all is None else min(lo_all, lo)
                hi_all = hi if hi_all is None else max(hi_all, hi)
        first.append(prec.earliest[j] if lo_all is None else lo_all)
        last.append(prec.earliest[j] - 1 if hi_all is None else hi_all)
    return TimeWindows(horizon, alpha, upper_bounds, start, tuple(first), tuple(last))


def annotate(instance: Instance, prec: PrecedenceData, windows: TimeWindows | None = None) -> Instance:
    """Copy of ``instance`` with λ_p (and β_p when windows are given) filled in."""
    projects = []
    for p in instance.projects:
        q = replace(p, cpd=prec.cpd[p.id])
        if windows is not None:
            q = replace(q, upper_bound=windows.upper_bounds[p.id])
        projects.append(q)
    return instance.with_projects(projects)


def path_enumerate(prec: PrecedenceData, j: int, target: int, cap: int = PATH_CAP) -> list[tuple[int, ...]]:
    """Paths from ``j`` to ``target`` along direct arcs, lexicographic by successor id, at most ``cap``."""
    if j == target:
        return [(j,)]
    if target not in prec.transitive[j]:
        return []
    out: list[tuple[int, ...]] = []
    path = [j]
    # iterative DFS keeps deep chains off the recursion limit
    stack = [iter(prec.successors[j])]
    while stack and len(out) < cap:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            path.pop()
            continue
        if nxt == target:
            out.append(tuple(path) + (target,))
        elif target in prec.transitive[nxt]:
            path.append(nxt)
            stack.append(iter(prec.successors[nxt]))
    return out


def preprocess(instance: Instance, upper_bounds: Sequence[int] | None = None) -> tuple[Instance, PrecedenceData, TimeWindows]:
    prec = run_cpm(instance)
    windows = compute_windows(instance, prec, upper_bounds)
    return annotate(instance, prec, windows), prec, windows
