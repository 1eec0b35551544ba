"""Random tiny instances and an exhaustive schedule enumerator used as test oracles."""

from __future__ import annotations

import random
from itertools import product

from rcpspcuts.instances import Instance, Job, Mode, Project, ResourcePool, check
from rcpspcuts.precedence import compute_windows, run_cpm

MAX_HORIZON = 12


def random_instance(seed: int, max_real: int = 4, max_modes: int = 2, projects: int | None = None) -> Instance:
    """Instance with at most ``max_real + 2`` jobs (one or two projects), no windows applied yet."""
    rng = random.Random(seed)
    n_proj = projects or (2 if rng.random() < 0.25 else 1)
    n_ren = rng.randint(1, 2)
    n_non = rng.randint(0, 1)
    ren_caps = [rng.randint(2, 5) for _ in range(n_ren)]
    non_caps = [rng.randint(4, 9) for _ in range(n_non)]
    zero = Mode(0, (0,) * n_ren, (0,) * n_non)
    jobs: list[Job] = []
    projs = []
    budget = max_real if n_proj == 1 else max(1, (max_real + 2 - 4) // 2 + 1)
    for p in range(n_proj):
        n_real = rng.randint(1, budget) if n_proj == 1 else 1
        base = len(jobs)
        ids = list(range(base, base + n_real + 2))
        src, sink = ids[0], ids[-1]
        real = ids[1:-1]
        succ = {j: set() for j in ids}
        for a_i, a in enumerate(real):
            for b in real[a_i + 1:]:
                if rng.random() < 0.35:
                    succ[a].add(b)
        has_pred = {b for a in real for b in succ[a]}
        for j in real:
            if j not in has_pred:
                succ[src].add(j)
            if not succ[j]:
                succ[j].add(sink)
        for j in ids:
            if j in (src, sink):
                modes = (zero,)
            else:
                modes = tuple(
                    Mode(rng.randint(1, 3),
                         tuple(rng.randint(0, c) for c in ren_caps),
                         tuple(rng.randint(0, max(1, c // 2)) for c in non_caps))
                    for _ in range(rng.randint(1, max_modes)))
            jobs.append(Job(j, p, modes, tuple(sorted(succ[j]))))
        projs.append(Project(p, rng.randint(0, 1) if p else 0, tuple(ids), src, sink))
    inst = Instance(f"rand{seed}", tuple(projs), tuple(jobs),
                    tuple(ResourcePool(f"R{k + 1}", c) for k, c in enumerate(ren_caps)),
                    tuple(ResourcePool(f"N{k + 1}", c) for k, c in enumerate(non_caps)))
    return check(inst)


def enumerate_schedules(instance: Instance, windows, tpd_budget: int | None = None):
    """Yield every feasible ``{job: (mode, start)}`` with starts inside the windows.

    Checks precedence, renewable capacity per period, non-renewable budgets and,
    when given, a cap on the total project delay.
    """
    prec = run_cpm(instance)
    order = list(prec.order)
    n_ren = len(instance.renewables)
    horizon = windows.horizon
    caps = [r.capacity for r in instance.renewables]
    usage = [[0] * (horizon + 1) for _ in range(n_ren)]
    non_left = [k.capacity for k in instance.nonrenewables]
    chosen: dict[int, tuple[int, int]] = {}

    def rec(pos):
        if pos == len(order):
            if tpd_budget is not None:
                tpd = sum(chosen[p.sink][1] - p.release - prec.cpd[p.id] for p in instance.projects)
                if tpd > tpd_budget:
                    return
            yield dict(chosen)
            return
        j = order[pos]
        job = instance.jobs[j]
        for m, mode in enumerate(job.modes):
            if any(q > left for q, left in zip(mode.nonrenewable, non_left)):
                continue
            lo, hi = windows.start[j, m]
            for t in range(lo, hi + 1):
                if any(chosen[i][1] + instance.jobs[i].modes[chosen[i][0]].duration > t for i in prec.predecessors[j]):
                    continue
                span = range(t, t + mode.duration)
                if any(usage[r][u] + mode.renewable[r] > caps[r] for r in range(n_ren) for u in span):
                    continue
                for r in range(n_ren):
                    for u in span:
                        usage[r][u] += mode.renewable[r]
                for k, q in enumerate(mode.nonrenewable):
                    non_left[k] -= q
                chosen[j] = (m, t)
                yield from rec(pos + 1)
                del chosen[j]
                for k, q in enumerate(mode.nonrenewable):
                    non_left[k] += q
                for r in range(n_ren):
                    for u in span:
                        usage[r][u] -= mode.renewable[r]

    yield from rec(0)


def tiny_case(seed: int, **kw):
    """(instance, prec, windows) with a feasible upper bound and horizon at most 12, or None."""
    rng = random.Random(seed * 7919 + 1)
    inst = random_instance(seed, **kw)
    prec = run_cpm(inst)
    loose = compute_windows(inst, prec)
    if loose.horizon > 40:
        return None
    best = None
    for sched in enumerate_schedules(inst, loose):
        finish = [sched[p.sink][1] for p in inst.projects]
        key = (sum(finish), finish)
        if best is None or key < best:
            best = key
    if best is None:
        return None
    bounds = [f + rng.randint(0, 2) for f in best[1]]
    while True:
        windows = compute_windows(inst, prec, bounds)
        if windows.horizon <= MAX_HORIZON:
            break
        # trim slack until the horizon fits
        k = max(range(len(bounds)), key=lambda i: bounds[i] - best[1][i])
        if bounds[k] == best[1][k]:
            return None
        bounds[k] -= 1
    return inst, prec, windows


def all_binary_points(n: int):
    return product((0, 1), repeat=n)


# ---------------------------------------------------------------------------
# solver suite and external resources


def mixed_suite(n: int = 40, seed: int = 0):
    """Deterministic list of (name, LinearProblem): alternating bounded LPs and small
    binary / knapsack-style MILPs, all feasible and bounded."""
    import numpy as np

    from rcpspcuts.lpcore import build_problem

    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        n_cols = int(rng.integers(3, 13))
        n_rows = int(rng.integers(2, 9))
        integer = k % 2 == 1
        x0 = rng.integers(0, 2, n_cols).astype(float) if integer else rng.uniform(0, 3, n_cols)
        rows = []
        for _ in range(n_rows):
            coefs = {j: float(v) for j, v in enumerate(rng.integers(-4, 7, n_cols)) if v and rng.random() < 0.7}
            act = sum(v * x0[j] for j, v in coefs.items())
            kind = rng.choice(["L", "G", "E"], p=[0.6, 0.3, 0.1])
            slack = float(rng.integers(0, 4))
            rhs = act + slack if kind == "L" else act - slack if kind == "G" else act
            rows.append((coefs, str(kind), float(rhs)))
        c = rng.integers(-9, 10, n_cols).astype(float)
        lb = np.zeros(n_cols)
        ub = np.ones(n_cols) if integer else np.full(n_cols, 5.0)
        prob = build_problem(c, rows, lb, ub, integer=np.full(n_cols, integer), maximize=bool(k % 4 == 3))
        out.append((f"{'milp' if integer else 'lp'}{k:02d}", prob))
    return out


def find_cbc():
    """Path of a CBC executable: $RCPSPCUTS_CBC, PATH, or the copy shipped inside PuLP."""
    import os
    import shutil
    from pathlib import Path

    env = os.environ.get("RCPSPCUTS_CBC")
    if env and Path(env).exists():
        return env
    found = shutil.which("cbc")
    if found:
        return found
    try:
        import importlib.util

        spec = importlib.util.find_spec("pulp")
    except (ImportError, ValueError):
        spec = None
    if spec and spec.origin:
        cand = Path(spec.origin).parent / "solverdir" / "cbc" / "linux" / "i64" / "cbc"
        if cand.exists():
            return str(cand)
    return None


def cbc_command():
    path = find_cbc()
    return None if path is None else f"{path} {{lp}} solve solu {{sol}}"


def data_dir():
    import os
    from pathlib import Path

    d = os.environ.get("RCPSP_DATA_DIR")
    return Path(d) if d and Path(d).is_dir() else None


def find_data_file(name: str):
    d = data_dir()
    if d is None:
        return None
    hits = sorted(d.rglob(name))
    return hits[0] if hits else None


# criterion number -> (passed, detail), filled by test_acceptance and printed by conftest
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
