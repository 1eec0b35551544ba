"""Acceptance criteria 1-10.  Each test records one PASS/FAIL line, printed at the end of the run.

Criteria 1, 2, 4, 7 and 8 read benchmark files from ``$RCPSP_DATA_DIR``
(``j102_4.mm`` and a directory of J30 instances).  When the files are missing
those tests fail with an explicit message; they are never skipped.
"""

from __future__ import annotations

import os
import statistics
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from helpers import ACCEPTANCE, cbc_command, data_dir, enumerate_schedules, find_data_file, mixed_suite, tiny_case
from rcpspcuts.conflict import build_conflict_graph, select_interest
from rcpspcuts.cuts import (Cut, CutPool, cover_counterpart, lpr_cut, pr_cut, separate_cg, separate_cliques,
                            separate_cover, separate_lcv_all, separate_lifted_precedence, separate_odd_holes,
                            separate_scg, strengthen_cg_rhs)
from rcpspcuts.cuts.precedence import period_range
from rcpspcuts.engine import EngineConfig, run_cutting_plane
from rcpspcuts.instances import parse_instance
from rcpspcuts.lpcore import OPTIMAL, SolverHandle, solve_lp, solve_milp
from rcpspcuts.model import RENEW, RENEW_STRONG, build_model, export_lp, lp_bound, schedule_from_solution, \
    solution_from_schedule
from rcpspcuts.precedence import compute_windows, run_cpm
from rcpspcuts.strengthen import (active_pairs, compute_strengthening, enumerate_feasible_subsets,
                                  solve_strengthening_lp, strengthen_model)

# reference data of the j102_4 example at t = 4: active pairs G_4, r0 consumption, and E_4
# (each token concatenates (job, mode) digit pairs)
G4 = [(1, 0), (1, 1), (1, 2), (2, 1), (2, 2), (3, 0), (5, 0), (5, 1), (5, 2), (6, 1), (6, 2), (9, 1), (9, 2)]
Q4 = [0, 0, 0, 0, 0, 3, 0, 0, 2, 0, 6, 0, 9]
E4 = ("10 223010 2210 3010 11 223011 2211 3011 12 213012 2112 223012 2212 3012 21 305221 3021 5221 22 305022 "
      "305122 305222 3022 5022 5122 5222 30 509130 5030 519130 5130 529130 5230 6130 629130 6230 9130 50 9150 "
      "9250 51 9151 9251 52 9152 61 9261 62 9162 91 92")

# the CG cut of the j102_4 example, as ((job, mode, start), coefficient)
EXAMPLE_CG = [((1, 0, 8), 3), ((5, 0, 5), 1), ((5, 0, 6), 2), ((6, 1, 4), 4), ((6, 1, 8), 2), ((8, 1, 7), 2),
              ((9, 1, 7), 2)]

FIVE = ("LCV", "LPR", "CL", "OH", "SCG")


@contextmanager
def criterion(number: int):
    state = {"detail": ""}
    try:
        yield state
    except BaseException as exc:
        first = (str(exc).strip().splitlines() or [""])[0]
        ACCEPTANCE[number] = (False, f"{type(exc).__name__}: {first}"[:200])
        raise
    ACCEPTANCE[number] = (True, state["detail"])


def decode_subsets(text: str) -> list[frozenset]:
    return [frozenset((int(tok[i]), int(tok[i + 1])) for i in range(0, len(tok), 2)) for tok in text.split()]


def require(path, what: str):
    if path is None:
        where = os.environ.get("RCPSP_DATA_DIR", "<unset>")
        pytest.fail(f"{what} not found under RCPSP_DATA_DIR={where}; this criterion needs the benchmark file")
    return path


def fast_backend() -> SolverHandle:
    return SolverHandle("highs")


@pytest.fixture(scope="module")
def j102_4():
    """(instance, prec, windows) with the windows set by the optimal makespan, matching the j102_4 reference data."""
    path = find_data_file("j102_4.mm")
    if path is None:
        return None
    inst = parse_instance(path)
    prec = run_cpm(inst)
    override = os.environ.get("RCPSP_J102_4_UB")
    if override:
        bound = int(override)
    else:
        from rcpspcuts.heuristic import heuristic_upper_bounds

        windows = compute_windows(inst, prec, heuristic_upper_bounds(inst, prec))
        model = build_model(inst, windows, prec)
        sol = solve_milp(model.to_problem(), fast_backend())
        assert sol.status == OPTIMAL, sol.status
        bound = schedule_from_solution(model, sol.x)[inst.projects[0].sink][1]
    return inst, prec, compute_windows(inst, prec, [bound])


# ---------------------------------------------------------------------------


def test_criterion_1_cpm_example():
    with criterion(1) as c:
        path = require(find_data_file("j102_4.mm"), "j102_4.mm")
        t0 = time.perf_counter()
        inst = parse_instance(path)
        prec = run_cpm(inst)
        elapsed = time.perf_counter() - t0
        assert prec.cpd[0] == 15, prec.cpd
        assert prec.earliest[5] == 2, prec.earliest
        assert elapsed < 1.0, elapsed
        c["detail"] = f"CPD=15, e_5=2 in {elapsed:.3f}s"


def test_criterion_2_feasible_subset_counts(j102_4):
    with criterion(2) as c:
        require(j102_4, "j102_4.mm")
        inst, prec, windows = j102_4
        t0 = time.perf_counter()
        act = active_pairs(inst, windows, 4)
        assert sorted(act.pairs) == G4, act.pairs
        full = enumerate_feasible_subsets(inst, prec, act, 4)
        loose = enumerate_feasible_subsets(inst, prec, act, 4, renewables=[0], nonrenewable=False, precedence=False)
        elapsed = time.perf_counter() - t0
        assert full.complete and len(full) == 51, len(full)
        assert loose.complete and len(loose) == 182, len(loose)
        assert set(full.subsets) == set(decode_subsets(E4))
        assert elapsed < 10.0
        c["detail"] = f"|E_4|=51, 182 relaxed, {elapsed:.2f}s"


def test_criterion_3_strengthened_coefficient():
    with criterion(3) as c:
        subsets = decode_subsets(E4)
        assert len(subsets) == 51
        q = dict(zip(G4, Q4))
        u = solve_strengthening_lp(G4, q, 9, subsets)
        assert u is not None
        assert u[5, 2] == 6.0, u
        # the rhs stays at the capacity and u is valid on every listed subset
        assert all(sum(u[p] for p in e) <= 9 + 1e-9 for e in subsets)
        assert all(u[p] >= q[p] for p in G4)
        # 6 holds on the whole optimal face, not just at the returned vertex
        from rcpspcuts.lpcore import build_problem

        pos = {p: i for i, p in enumerate(G4)}
        opt = sum(u.values())
        rows = [({pos[p]: 1.0 for p in e}, "L", 9.0) for e in subsets]
        rows.append(({i: 1.0 for i in range(len(G4))}, "G", opt - 1e-7))
        lo = np.array([q[p] for p in G4], dtype=float)
        for sense in (False, True):
            obj = np.zeros(len(G4))
            obj[pos[5, 2]] = 1.0
            res = solve_lp(build_problem(obj, rows, lo, np.full(len(G4), 9.0), maximize=sense))
            assert res.status == OPTIMAL and abs(res.objective - 6.0) < 1e-6
        c["detail"] = "u(5,2)=6 with rhs 9 on the reference E_4"


def test_criterion_4_scg_rhs(j102_4):
    with criterion(4) as c:
        require(j102_4, "j102_4.mm")
        inst, prec, windows = j102_4
        model = build_model(inst, windows, prec)
        coefs = {}
        for (j, m, t), a in EXAMPLE_CG:
            col = model.index.x(j, m, t)
            assert col is not None, f"x({j},{m},{t}) is outside the time windows"
            coefs[col] = float(a)
        cut = Cut.make(coefs, 5.0, "CG")
        strong = strengthen_cg_rhs(cut, model)
        assert strong.rhs == 4.0, strong.rhs
        assert strong.meta.get("original_rhs") == 5.0
        c["detail"] = "rhs 5 -> 4"


def _separate_all(model, x, sol, backend):
    graph = build_conflict_graph(select_interest(model, x, sol.reduced_costs, rho=1.0), model, x)
    cuts = list(separate_lcv_all(model, x, backend))
    for row in model.rows:
        if row.kind in (RENEW, RENEW_STRONG):
            cuts += separate_cover(x, row, backend)
    cuts += separate_lifted_precedence(model, x)
    cuts += separate_cliques(graph, x)
    cuts += separate_odd_holes(graph, x)
    cuts += separate_scg(model, x, graph, backend=backend)
    cuts += separate_cg(model, x, graph, backend=backend)
    return cuts


def test_criterion_5_cut_validity():
    with criterion(5) as c:
        backend = SolverHandle("highs", time_limit=5)
        t0 = time.perf_counter()
        checked, generated, strong_rows, violations = 0, {}, 0, []
        seed = 0
        while checked < 60 and seed < 400:
            case = tiny_case(seed)
            seed += 1
            if case is None:
                continue
            inst, prec, windows = case
            assert inst.n_jobs <= 6 and windows.horizon <= 12
            assert all(len(j.modes) <= 2 for j in inst.jobs)
            model, _ = strengthen_model(build_model(inst, windows, prec), backend)
            points = [solution_from_schedule(model, s) for s in enumerate_schedules(inst, windows, windows.alpha)]
            if not points:
                continue
            checked += 1
            for row in model.rows_of(RENEW_STRONG):
                strong_rows += 1
                violations += [("row", seed, row.tag) for p in points if row.violation(p) > 1e-6][:1]
            for _ in range(3):
                _, sol = lp_bound(model, backend)
                if sol.is_integral():
                    break
                cuts = _separate_all(model, sol.x, sol, backend)
                for cut in cuts:
                    generated[cut.family] = generated.get(cut.family, 0) + 1
                    if any(cut.violated_by(p) > 1e-6 for p in points):
                        violations.append((cut.family, seed, cut.meta))
                if not cuts:
                    break
                model = model.with_rows(cut.to_row() for cut in cuts)
        elapsed = time.perf_counter() - t0
        assert checked >= 50, checked
        assert not violations, violations[:5]
        missing = [f for f in FIVE if not generated.get(f)]
        assert not missing, f"families never exercised: {missing}"
        assert elapsed < 600, elapsed
        summary = ",".join(f"{f}={generated.get(f, 0)}" for f in FIVE + ("CV", "CG"))
        c["detail"] = f"{checked} instances, {strong_rows} strengthened rows, cuts {summary}, 0 violations, {elapsed:.0f}s"


def test_criterion_6_dominance():
    with criterion(6) as c:
        t0 = time.perf_counter()
        strong, lpr, lcv, strict_lpr = 0, 0, 0, 0
        backend = SolverHandle("highs")
        for seed in range(40):
            case = tiny_case(seed, max_modes=2)
            if case is None:
                continue
            inst, prec, windows = case
            model = build_model(inst, windows, prec)
            for srow in compute_strengthening(model, backend).rows:
                if not srow.changes:
                    continue
                strong += 1
                keys = set(srow.coefficients) | set(srow.original)
                new = Cut.make({i: srow.coefficients.get(k, 0.0) for i, k in enumerate(keys)}, 1.0, "CV")
                old = Cut.make({i: srow.original.get(k, 0.0) for i, k in enumerate(keys)}, 1.0, "CV")
                assert new.dominates(old, strict=True), (seed, srow)
            for j in range(inst.n_jobs):
                for s in prec.transitive[j]:
                    for t in period_range(model, j, s):
                        a, b = lpr_cut(model, j, s, t), pr_cut(model, j, s, t)
                        assert a.dominates(b), (seed, j, s, t)
                        lpr += 1
                        strict_lpr += a.dominates(b, strict=True)
            _, sol = lp_bound(model, backend)
            for cut in separate_lcv_all(model, sol.x, backend):
                cover = cover_counterpart(cut)
                unit = {col for col, a in zip(cut.cols, cut.coefs) if a == 1.0}
                assert cut.rhs <= cover.rhs and set(cover.cols) <= unit, (seed, cut, cover)
                lcv += 1
        elapsed = time.perf_counter() - t0
        assert strong > 0 and lpr > 0 and lcv > 0, (strong, lpr, lcv)
        assert elapsed < 60, elapsed
        c["detail"] = f"{strong} strengthened rows, {lpr} LPR/PR pairs ({strict_lpr} strict), {lcv} LCV/CV pairs"


# ---------------------------------------------------------------------------
# J30 sample: criteria 7 and 8 share one set of engine runs


def j30_sample(limit: int = 10) -> list[Path]:
    d = data_dir()
    if d is None:
        return []
    files = sorted(p for p in d.rglob("j30*") if p.is_file() and p.suffix in (".sm", ".mm"))
    return [p for p in files if "opt" not in p.stem][:limit]


@pytest.fixture(scope="module")
def j30_runs():
    files = j30_sample()
    if len(files) < 10:
        return None
    kind = os.environ.get("RCPSP_ACCEPTANCE_BACKEND", "builtin")
    external = cbc_command() if kind == "external" else None
    backend = SolverHandle(kind, external) if external else SolverHandle(kind)
    per_instance = 150.0 if kind == "builtin" else 25.0
    config = EngineConfig(time_limit=per_instance)
    t0 = time.perf_counter()
    runs = [run_cutting_plane(parse_instance(p), config, backend=backend) for p in files]
    return runs, time.perf_counter() - t0, kind


def test_criterion_7_monotone_and_slr(j30_runs):
    with criterion(7) as c:
        if j30_runs is None:
            require(None, "a 10-instance J30 sample (j30*.sm / j30*.mm)")
        runs, elapsed, kind = j30_runs
        for res in runs:
            values = [r.lp_value for r in res.records]
            assert all(b >= a - 1e-6 * max(1.0, abs(a)) for a, b in zip(values, values[1:])), values
            assert res.slr_delay >= res.lr_delay - 1e-6, (res.lr_delay, res.slr_delay)
        lr = statistics.mean(r.lr_gap for r in runs)
        slr = statistics.mean(r.slr_gap for r in runs)
        assert slr <= lr, (lr, slr)
        assert elapsed < (1800 if kind == "builtin" else 300), elapsed
        c["detail"] = f"LR gap {lr:.3f} -> SLR gap {slr:.3f}, {elapsed:.0f}s ({kind})"


def test_criterion_8_cut_effect(j30_runs):
    with criterion(8) as c:
        if j30_runs is None:
            require(None, "a 10-instance J30 sample (j30*.sm / j30*.mm)")
        runs, _, _ = j30_runs
        slr = statistics.mean(r.slr_gap for r in runs)
        final = statistics.mean(r.gap for r in runs)
        assert final <= slr - 0.05, (slr, final)
        c["detail"] = f"SLR gap {slr:.3f} -> all families {final:.3f}"


def test_criterion_9_pool_and_determinism():
    with criterion(9) as c:
        x = np.zeros(6)
        pool = CutPool()
        a = Cut.make({0: 1, 1: 1, 2: 1}, 2, "CV", x)
        assert pool.insert(a) and not pool.insert(Cut.make({2: 1, 1: 1, 0: 1}, 2, "CV", x))
        assert len(pool) == 1 and pool.duplicates["CV"] == 1
        stronger = Cut.make({0: 1, 1: 1, 2: 1, 3: 1}, 2, "CV", x)
        assert pool.insert(stronger)
        assert len(pool) == 1 and pool.evicted["CV"] == 1 and stronger in pool and a not in pool
        assert not pool.insert(a) and pool.dominated["CV"] == 1

        case = tiny_case(14)
        assert case is not None
        inst = case[0]
        bounds = list(case[2].upper_bounds)
        # a generous CG time limit lets the node limit, not the clock, end each CG solve
        config = EngineConfig(time_limit=300, max_iterations=6, cg_time_limit=60)
        runs = [run_cutting_plane(inst, config, ub=bounds) for _ in range(2)]
        texts = [export_lp(r.model) for r in runs]
        assert len(runs[0].pool) > 0, runs[0].status
        assert texts[0].encode() == texts[1].encode()
        c["detail"] = f"dedup, eviction, identical LP export ({len(runs[0].pool)} cuts, {len(texts[0])} bytes)"


def test_criterion_10_backend_agreement():
    with criterion(10) as c:
        command = cbc_command()
        assert command is not None, "no CBC executable found (set RCPSPCUTS_CBC or put cbc on PATH)"
        external = SolverHandle("external", command)
        worst = 0.0
        suite = mixed_suite(40)
        for name, prob in suite:
            ours = solve_milp(prob)
            ref = solve_milp(prob, external)
            assert ours.status == ref.status == OPTIMAL, (name, ours.status, ref.status)
            rel = abs(ours.objective - ref.objective) / max(1.0, abs(ref.objective))
            worst = max(worst, rel)
            assert rel <= 1e-5, (name, ours.objective, ref.objective)
        c["detail"] = f"{len(suite)} problems, worst relative difference {worst:.1e}"
