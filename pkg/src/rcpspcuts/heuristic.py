"""Serial schedule generation for per-project upper bounds when none are supplied."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .instances import Instance, InstanceError
from .precedence import PrecedenceData, run_cpm


def choose_modes(instance: Instance) -> Optional[list[int]]:
    """Fastest mode per job that keeps every non-renewable budget satisfiable.

    Jobs are fixed in id order; a mode is accepted only if the remaining jobs can still
    be completed with their least-consuming modes.  None when no such choice is found.
    """
    n_k = len(instance.nonrenewables)
    if n_k == 0:
        return [min(range(len(j.modes)), key=lambda m: (j.modes[m].duration, m)) for j in instance.jobs]
    cap = np.array([k.capacity for k in instance.nonrenewables], dtype=float)
    least = np.array([[min(md.nonrenewable[k] for md in j.modes) for k in range(n_k)] for j in instance.jobs],
                     dtype=float)
    reserve = least[::-1].cumsum(axis=0)[::-1]
    used = np.zeros(n_k)
    modes = []
    for job in instance.jobs:
        after = reserve[job.id + 1] if job.id + 1 < len(instance.jobs) else np.zeros(n_k)
        order = sorted(range(len(job.modes)), key=lambda m: (job.modes[m].duration, sum(job.modes[m].nonrenewable), m))
        pick = None
        for m in order:
            if np.all(used + np.array(job.modes[m].nonrenewable) + after <= cap):
                pick = m
                break
        if pick is None:
            return _search_modes(instance, cap, reserve)
        used += job.modes[pick].nonrenewable
        modes.append(pick)
    return modes


def _search_modes(instance: Instance, cap: np.ndarray, reserve: np.ndarray, node_cap: int = 100_000):
    """Depth-first mode search with the same reserve pruning, fastest modes first."""
    n = instance.n_jobs
    modes: list[int] = []
    nodes = 0

    def rec(j: int, used: np.ndarray) -> bool:
        nonlocal nodes
        if j == n:
            return True
        nodes += 1
        if nodes > node_cap:
            return False
        job = instance.jobs[j]
        after = reserve[j + 1] if j + 1 < n else 0.0
        for m in sorted(range(len(job.modes)), key=lambda m: (job.modes[m].duration, m)):
            nu = used + np.array(job.modes[m].nonrenewable, dtype=float)
            if np.all(nu + after <= cap):
                modes.append(m)
                if rec(j + 1, nu):
                    return True
                modes.pop()
        return False

    return modes if rec(0, np.zeros(len(cap))) else None


def serial_schedule(instance: Instance, modes: list[int], priority: list[int],
                    prec: Optional[PrecedenceData] = None) -> dict[int, tuple[int, int]]:
    """Serial SGS: take eligible jobs by ``priority`` rank, start each at its earliest
    precedence- and resource-feasible period."""
    prec = prec or run_cpm(instance)
    rank = {j: k for k, j in enumerate(priority)}
    caps = [r.capacity for r in instance.renewables]
    horizon = sum(max(1, j.max_duration) for j in instance.jobs) + max(p.release for p in instance.projects) + 1
    usage = np.zeros((len(caps), horizon + 1))
    cap_arr = np.array(caps, dtype=float).reshape(-1, 1)
    start: dict[int, tuple[int, int]] = {}
    done: set[int] = set()
    while len(done) < instance.n_jobs:
        eligible = [j for j in range(instance.n_jobs) if j not in done and all(p in done for p in prec.predecessors[j])]
        j = min(eligible, key=lambda v: (rank[v], v))
        job = instance.jobs[j]
        mode = job.modes[modes[j]]
        t = max([instance.projects[job.project].release]
                + [start[p][1] + instance.jobs[p].modes[start[p][0]].duration for p in prec.predecessors[j]])
        need = np.array(mode.renewable, dtype=float).reshape(-1, 1)
        if np.any(need > cap_arr):
            raise InstanceError(f"job {j} mode {modes[j]} exceeds a renewable capacity")
        while mode.duration and len(caps) and np.any(usage[:, t:t + mode.duration] + need > cap_arr):
            t += 1
        if mode.duration:
            if t + mode.duration > usage.shape[1]:
                usage = np.pad(usage, ((0, 0), (0, t + mode.duration - usage.shape[1])))
            usage[:, t:t + mode.duration] += need
        start[j] = (modes[j], t)
        done.add(j)
    return start


def heuristic_upper_bounds(instance: Instance, prec: Optional[PrecedenceData] = None) -> list[int]:
    """Per-project finish times of the best of a few priority rules (by total delay)."""
    prec = prec or run_cpm(instance)
    modes = choose_modes(instance)
    if modes is None:
        raise InstanceError("no mode assignment satisfies the non-renewable budgets")
    tails = [max(prec.tail[j]) for j in range(instance.n_jobs)]
    rules = [
        list(prec.order),
        sorted(range(instance.n_jobs), key=lambda j: (-tails[j], j)),
        sorted(range(instance.n_jobs), key=lambda j: (prec.earliest[j], -tails[j], j)),
    ]
    best = None
    for rule in rules:
        sched = serial_schedule(instance, modes, rule, prec)
        finish = [sched[p.sink][1] for p in instance.projects]
        key = (sum(finish), finish)
        if best is None or key < best:
            best = key
    return best[1]
