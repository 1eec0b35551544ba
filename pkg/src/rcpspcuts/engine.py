"""Cutting-plane loop: solve the LP, separate, insert into the pool, repeat."""

from __future__ import annotations

import logging
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .conflict import build_conflict_graph, default_rho, select_interest
from .cuts import (CutPool, merge_batches, separate_cliques, separate_lcv_all, separate_lifted_precedence,
                   separate_odd_holes, separate_scg, zeta_for)
from .cuts.cg import DELTA, ETA, IOTA, PENALTY, SLIDE
from .cuts.cover import MU, OMEGA
from .heuristic import heuristic_upper_bounds
from .instances import Instance, check
from .lpcore import INFEASIBLE, SolverHandle
from .model import Model, build_model, integrality_gap, lp_bound
from .precedence import preprocess, run_cpm
from .strengthen import DEFAULT_IT, StrengthenedCoefficients, strengthen_model

log = logging.getLogger(__name__)

ENGINE_FAMILIES = ("LCV", "LPR", "CL", "OH", "SCG")
MONOTONE_TOL = 1e-6


class MonotonicityError(AssertionError):
    pass


@dataclass
class EngineConfig:
    families: tuple[str, ...] = ENGINE_FAMILIES
    time_limit: float = 600.0
    max_iterations: int = 100
    strengthen: bool = True
    it: int = DEFAULT_IT
    strengthen_time_limit: Optional[float] = None
    omega: float = OMEGA
    mu: float = MU
    zeta: Optional[int] = None  # None: 20% of the current LP row count
    zeta_fraction: float = 0.2
    eta: int = ETA
    iota: int = IOTA
    slide: float = SLIDE
    delta: float = DELTA
    penalty: float = PENALTY
    cg_time_limit: float = 2.0  # per separation MILP; the incumbent is used when it runs out
    cg_node_limit: int = 300  # keeps builtin branch-and-bound runs independent of machine speed
    rho: Optional[float] = None  # reduced-cost threshold for the conflict graph; None: (ub - lb) / 2
    workers: int = 1

    def __post_init__(self):
        fams = tuple(f.upper() for f in self.families)
        bad = [f for f in fams if f not in ENGINE_FAMILIES]
        if bad:
            raise ValueError(f"unknown families {bad}; choose from {ENGINE_FAMILIES}")
        self.families = tuple(f for f in ENGINE_FAMILIES if f in fams)
        if not self.time_limit > 0:
            raise ValueError("time budget must be positive")
        if self.max_iterations < 0 or self.it <= 0 or self.workers < 1:
            raise ValueError("iteration caps and worker count must be positive")
        if not 0 < self.delta < 1 or self.eta < 1 or self.iota < 1 or self.slide < 0:
            raise ValueError("CG window parameters out of range")
        if not self.cg_time_limit > 0 or self.cg_node_limit < 1:
            raise ValueError("CG separation limits must be positive")
        if not 0 < self.zeta_fraction <= 1 or (self.zeta is not None and self.zeta < 1):
            raise ValueError("zeta must be positive")
        if self.omega <= self.mu or self.mu < 0:
            raise ValueError("omega must dominate mu")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "EngineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**dict(data))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class IterationRecord:
    iteration: int
    lp_value: float
    delay_value: float
    gap: Optional[float]
    cuts: dict[str, int]
    wall_time: float
    rows: int

    def as_row(self) -> dict:
        out = {"iteration": self.iteration, "lp_value": self.lp_value, "delay_value": self.delay_value,
               "gap": "" if self.gap is None else self.gap, "rows": self.rows, "wall_time": round(self.wall_time, 4)}
        for fam in ENGINE_FAMILIES:
            out[fam] = self.cuts.get(fam, 0)
        return out


@dataclass
class EngineResult:
    model: Model
    records: list[IterationRecord]
    status: str
    pool: CutPool
    base_model: Model
    ub_value: Optional[float]
    lr_value: Optional[float] = None
    slr_value: Optional[float] = None
    lr_delay: Optional[float] = None
    slr_delay: Optional[float] = None
    strengthening: Optional[StrengthenedCoefficients] = None
    cut_log: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    def __iter__(self):
        # allows ``model, records = run_cutting_plane(...)``
        return iter((self.model, self.records))

    @property
    def bound(self) -> Optional[float]:
        return self.records[-1].delay_value if self.records else None

    @property
    def gap(self) -> Optional[float]:
        return self.records[-1].gap if self.records else None

    @property
    def lr_gap(self) -> Optional[float]:
        return _gap(self.lr_delay, self.ub_value)

    @property
    def slr_gap(self) -> Optional[float]:
        return _gap(self.slr_delay, self.ub_value)


def _gap(lb: Optional[float], ub: Optional[float]) -> Optional[float]:
    if lb is None or ub is None or ub <= 0:
        return None
    return integrality_gap(lb, ub)


def resolve_bounds(instance: Instance, ub: Optional[Sequence[int]] = None) -> list[int]:
    """Per-project upper bounds: explicit, then the instance's own, then the SGS heuristic."""
    if ub is not None:
        return [int(b) for b in ub]
    if all(p.upper_bound is not None for p in instance.projects):
        return [int(p.upper_bound) for p in instance.projects]
    return heuristic_upper_bounds(instance, run_cpm(instance))


def _separators(config: EngineConfig) -> dict[str, Callable]:
    def lcv(ctx):
        return separate_lcv_all(ctx["model"], ctx["x"], ctx["backend"], config.omega, config.mu, ctx["deadline"])

    def lpr(ctx):
        return separate_lifted_precedence(ctx["model"], ctx["x"], ctx["zeta"], deadline=ctx["deadline"])

    def cl(ctx):
        return separate_cliques(ctx["graph"], ctx["x"], ctx["zeta"], deadline=ctx["deadline"])

    def oh(ctx):
        return separate_odd_holes(ctx["graph"], ctx["x"], ctx["zeta"], deadline=ctx["deadline"])

    def scg(ctx):
        left = max(ctx["deadline"] - time.monotonic(), 1e-3)
        backend = replace(ctx["backend"].limited(min(left, config.cg_time_limit)),
                          node_limit=min(ctx["backend"].node_limit, config.cg_node_limit))
        return separate_scg(ctx["model"], ctx["x"], ctx["graph"], backend=backend, eta=config.eta,
                            iota=config.iota, slide=config.slide, delta=config.delta, penalty=config.penalty)

    table = {"LCV": lcv, "LPR": lpr, "CL": cl, "OH": oh, "SCG": scg}
    return {f: table[f] for f in config.families}


def run_cutting_plane(instance: Instance, config: Optional[EngineConfig] = None, ub: Optional[Sequence[int]] = None,
                      backend: Optional[SolverHandle] = None, ub_value: Optional[float] = None) -> EngineResult:
    """Root cutting-plane loop.

    ``ub`` gives per-project upper bounds on the finish times (they define the time
    windows); ``ub_value`` is the objective upper bound for gaps and defaults to the
    total delay those bounds allow (alpha).
    """
    config = config or EngineConfig()
    backend = backend or SolverHandle()
    start = time.monotonic()
    deadline = start + config.time_limit
    check(instance)
    bounds = resolve_bounds(instance, ub)
    inst, prec, windows = preprocess(instance, bounds)
    base = build_model(inst, windows, prec)
    ub_value = float(windows.alpha) if ub_value is None else float(ub_value)

    lr_value, sol = lp_bound(base, backend)
    pool = CutPool()
    result = EngineResult(base, [], "", pool, base, ub_value, lr_value=lr_value)
    if sol.feasible:
        result.lr_delay = base.delay_part(sol.x)
    if not sol.feasible:
        result.status = INFEASIBLE if sol.status == INFEASIBLE else sol.status
        result.elapsed = time.monotonic() - start
        return result

    if config.strengthen:
        tl = config.strengthen_time_limit if config.strengthen_time_limit is not None else config.time_limit
        base, result.strengthening = strengthen_model(base, backend, config.it, tl)
        result.base_model = base
        result.slr_value, sol = lp_bound(base, backend)
        if not sol.feasible:
            result.status = sol.status
            result.elapsed = time.monotonic() - start
            return result
        result.slr_delay = base.delay_part(sol.x)
    else:
        result.slr_value, result.slr_delay = lr_value, result.lr_delay

    model = base
    separators = _separators(config)
    prev = None
    iteration = 0
    while True:
        value = sol.value
        delay = model.delay_part(sol.x)
        if prev is not None and value < prev - MONOTONE_TOL * max(1.0, abs(prev)):
            raise MonotonicityError(f"LP bound decreased from {prev} to {value} at iteration {iteration}")
        prev = value
        record = IterationRecord(iteration, value, delay, _gap(delay, ub_value), {}, time.monotonic() - start,
                                 len(model.rows))
        result.records.append(record)
        if windows.alpha == 0:
            result.status = "zero_slack"
            result.notes.append("alpha = 0: every window is tight and the LP bound cannot move")
            break
        if sol.is_integral():
            result.status = "integral"
            break
        if not separators:
            result.status = "no_families"
            break
        if iteration >= config.max_iterations:
            result.status = "iteration_limit"
            break
        now = time.monotonic()
        if now >= deadline:
            result.status = "time_limit"
            break

        x = sol.x
        zeta = config.zeta or zeta_for(len(model.rows), config.zeta_fraction)
        graph = None
        if any(f in separators for f in ("CL", "OH", "SCG")):
            rho = config.rho if config.rho is not None else default_rho(delay, ub_value)
            graph = build_conflict_graph(select_interest(model, x, sol.reduced_costs, rho), model, x)
        slice_end = now + (deadline - now) / len(separators)
        ctx = {"model": model, "x": x, "graph": graph, "zeta": zeta, "backend": backend.limited(slice_end - now),
               "deadline": slice_end}
        batches = _run_separators(separators, ctx, config.workers)

        accepted = {}
        for cut in merge_batches(batches):
            if pool.insert(cut):
                accepted[cut.family] = accepted.get(cut.family, 0) + 1
                result.cut_log.append(cut.log_entry(iteration + 1))
        record.cuts = accepted
        if not accepted:
            result.status = "no_cuts"
            break
        iteration += 1
        model = base.with_rows(pool.rows())
        _, sol = lp_bound(model, backend)
        if not sol.feasible:
            result.status = sol.status
            break

    result.model = model
    result.elapsed = time.monotonic() - start
    return result


def _run_separators(separators: Mapping[str, Callable], ctx: dict, workers: int) -> dict[str, list]:
    if workers <= 1 or len(separators) <= 1:
        return {fam: fn(ctx) for fam, fn in separators.items()}
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = {fam: ex.submit(fn, ctx) for fam, fn in separators.items()}
        return {fam: fut.result() for fam, fut in futures.items()}


# ---------------------------------------------------------------------------
# ablation


def ablation_configs(template: EngineConfig, families: Sequence[str] = ENGINE_FAMILIES) -> dict[str, EngineConfig]:
    """SLR, +F for each family, All and -F for each family."""
    base = template.as_dict()
    out = {"SLR": EngineConfig(**{**base, "families": ()})}
    for f in families:
        out[f"+{f}"] = EngineConfig(**{**base, "families": (f,)})
    out["All"] = EngineConfig(**{**base, "families": tuple(families)})
    for f in families:
        out[f"-{f}"] = EngineConfig(**{**base, "families": tuple(g for g in families if g != f)})
    return out


# job counts of the PSPLIB sets; names are <size><parameter index>_<instance>
GROUP_SIZES = ("120", "90", "60", "30", "20", "18", "16", "14", "12", "10")


def instance_group(name: str) -> str:
    """Set prefix of an instance name, e.g. j102_4 -> j10, j3010_1 -> j30."""
    head = name.split("_")[0]
    digits = "".join(ch for ch in head if ch.isdigit())
    letters = "".join(ch for ch in head if ch.isalpha())
    for size in GROUP_SIZES:
        rest = digits[len(size):]
        if digits.startswith(size) and rest and rest[0] != "0":
            return letters + size
    if len(digits) > 2:
        digits = digits[:-1]
    return (letters + digits) or name


def ablation_run(instances: Iterable[tuple[str, Instance]], template: Optional[EngineConfig] = None,
                 backend: Optional[SolverHandle] = None, configs: Optional[Mapping[str, EngineConfig]] = None,
                 upper_bounds: Optional[Mapping[str, Sequence[int]]] = None) -> list[dict]:
    """Per-group mean gap and time for each configuration; failures are recorded and skipped."""
    template = template or EngineConfig()
    configs = configs or ablation_configs(template)
    per: dict[tuple[str, str], list[tuple[float, float]]] = {}
    failures: dict[tuple[str, str], int] = {}
    for name, inst in instances:
        group = instance_group(name)
        for label, cfg in configs.items():
            try:
                res = run_cutting_plane(inst, cfg, (upper_bounds or {}).get(name), backend)
                if res.gap is None:
                    raise ValueError(f"no gap ({res.status})")
                per.setdefault((group, label), []).append((res.gap, res.elapsed))
            except Exception as exc:  # noqa: BLE001 - one bad instance must not stop the table
                log.warning("%s / %s failed: %s", name, label, exc)
                failures[group, label] = failures.get((group, label), 0) + 1
    rows = []
    for (group, label) in sorted(set(per) | set(failures)):
        vals = per.get((group, label), [])
        gaps = [g for g, _ in vals]
        times = [t for _, t in vals]
        rows.append({
            "group": group, "config": label, "n": len(vals), "failed": failures.get((group, label), 0),
            "gap": statistics.fmean(gaps) if gaps else math.nan,
            "gap_std": statistics.pstdev(gaps) if len(gaps) > 1 else 0.0,
            "time": statistics.fmean(times) if times else math.nan,
        })
    return rows


def final_check(result: EngineResult, backend: Optional[SolverHandle] = None) -> float:
    """Re-solve the final model and return the absolute difference to the last recorded bound."""
    value, _ = lp_bound(result.model, backend)
    if value is None or not result.records:
        return math.inf
    return abs(value - result.records[-1].lp_value)


__all__ = ["EngineConfig", "IterationRecord", "EngineResult", "run_cutting_plane", "ablation_run",
           "ablation_configs", "resolve_bounds", "final_check", "ENGINE_FAMILIES", "MonotonicityError"]
