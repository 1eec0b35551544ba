"""Lifted precedence cuts (LPR) and the fastest-mode variant (PR).

For job j, a transitive successor s and period t, with D = d̆*_js:

    sum_m sum_{t'=e_j}^{t+D-d̆_jms} x_jmt'  >=  sum_m sum_{t'=e_s}^{min(l_s, t+D)} x_smt'

Cuts are stored in <=-form (successor terms +1, predecessor terms -1, rhs 0).
"""

from __future__ import annotations

import time
from typing import Optional

import numpy as np

from ..model import Model
from ..precedence import PATH_CAP, path_enumerate
from .pool import MIN_VIOLATION, Cut, top_violated


def period_range(model: Model, j: int, s: int) -> range:
    w, D = model.windows, model.prec.dist_fastest[j, s]
    return range(max(w.first[j], w.first[s] - D), min(w.last[j], w.last[s] - D) + 1)


def _successor_side(model: Model, s: int, limit: int) -> dict[int, float]:
    coefs = {}
    for m in range(len(model.instance.jobs[s].modes)):
        for t in model.windows.window(s, m):
            if t <= limit:
                coefs[model.index.x(s, m, t)] = 1.0
    return coefs


def lpr_coefficients(model: Model, j: int, s: int, t: int) -> dict[int, float]:
    prec = model.prec
    D = prec.dist_fastest[j, s]
    coefs = _successor_side(model, s, min(model.windows.last[s], t + D))
    for m in range(len(model.instance.jobs[j].modes)):
        limit = t + D - prec.dist_by_mode[j, m, s]
        for u in model.windows.window(j, m):
            if u <= limit:
                coefs[model.index.x(j, m, u)] = -1.0
    return coefs


def pr_coefficients(model: Model, j: int, s: int, t: int) -> dict[int, float]:
    """Fastest-mode counterpart: every mode of j may start up to t + d̆*_js."""
    D = model.prec.dist_fastest[j, s]
    coefs = _successor_side(model, s, min(model.windows.last[s], t + D))
    for m in range(len(model.instance.jobs[j].modes)):
        for u in model.windows.window(j, m):
            if u <= t + D:
                coefs[model.index.x(j, m, u)] = -1.0
    return coefs


def lpr_cut(model: Model, j: int, s: int, t: int, x: Optional[np.ndarray] = None) -> Cut:
    return Cut.make(lpr_coefficients(model, j, s, t), 0.0, "LPR", x, j=j, s=s, t=t)


def pr_cut(model: Model, j: int, s: int, t: int, x: Optional[np.ndarray] = None) -> Cut:
    return Cut.make(pr_coefficients(model, j, s, t), 0.0, "PR", x, j=j, s=s, t=t)


def _violated_for_pair(model: Model, x: np.ndarray, j: int, s: int, min_violation: float) -> list[Cut]:
    out = []
    for t in period_range(model, j, s):
        cut = lpr_cut(model, j, s, t, x)
        if cut.violation > min_violation:
            out.append(cut)
    return out


def separate_lifted_precedence(model: Model, x: np.ndarray, zeta: Optional[int] = None,
                               min_violation: float = MIN_VIOLATION, path_cap: int = PATH_CAP,
                               deadline: Optional[float] = None) -> list[Cut]:
    """Walk the paths from every job to its project's sink; along each path test
    successors in order and stop at the first one that yields violated cuts.
    Returns at most ``zeta`` cuts, most violated first."""
    inst, prec = model.instance, model.prec
    found: dict[tuple[int, int, int], Cut] = {}
    tested: dict[tuple[int, int], bool] = {}
    for job in inst.jobs:
        if deadline is not None and time.monotonic() > deadline:
            break
        j = job.id
        sink = inst.projects[job.project].sink
        if j == sink:
            continue
        for path in path_enumerate(prec, j, sink, path_cap):
            for s in path[1:]:
                if (j, s) not in tested:
                    cuts = _violated_for_pair(model, x, j, s, min_violation)
                    for c in cuts:
                        found[j, s, c.meta["t"]] = c
                    tested[j, s] = bool(cuts)
                if tested[j, s]:
                    break
    return top_violated(found.values(), zeta)
