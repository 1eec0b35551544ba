import itertools
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import enumerate_schedules, tiny_case
from rcpspcuts.instances import parse_instance
from rcpspcuts.lpcore import SolverHandle
from rcpspcuts.model import RENEW, RENEW_STRONG, build_model, lp_bound, solution_from_schedule
from rcpspcuts.precedence import preprocess
from rcpspcuts.strengthen import (active_pairs, apply_strengthening, compute_strengthening,
                                  enumerate_feasible_subsets, solve_strengthening_lp, strengthen_model)

DATA = Path(__file__).parent / "data"
CASES = [c for c in (tiny_case(s) for s in range(60)) if c is not None]


def brute_subsets(inst, prec, pairs):
    """Every nonempty subset of ``pairs`` that can run together, by direct enumeration."""
    out = set()
    caps = [r.capacity for r in inst.renewables]
    ncaps = [k.capacity for k in inst.nonrenewables]
    for k in range(1, len(pairs) + 1):
        for combo in itertools.combinations(pairs, k):
            jobs = [j for j, _ in combo]
            if len(set(jobs)) < len(jobs):
                continue
            if any(prec.is_successor(a, b) for a in jobs for b in jobs):
                continue
            modes = [inst.jobs[j].modes[m] for j, m in combo]
            if any(sum(md.renewable[r] for md in modes) > c for r, c in enumerate(caps)):
                continue
            if any(sum(md.nonrenewable[r] for md in modes) > c for r, c in enumerate(ncaps)):
                continue
            out.add(frozenset(combo))
    return out


@pytest.mark.parametrize("case", CASES[:25], ids=lambda c: c[0].name)
def test_subsets_match_brute_force(case):
    inst, prec, windows = case
    for t in range(windows.horizon + 1):
        act = active_pairs(inst, windows, t)
        res = enumerate_feasible_subsets(inst, prec, act, t)
        assert res.complete
        assert set(res.subsets) == brute_subsets(inst, prec, act.pairs)
        assert len(res.subsets) == len(set(res.subsets))


def test_iteration_cap_aborts():
    inst, prec, windows = CASES[0]
    t = max(range(windows.horizon + 1), key=lambda t: len(active_pairs(inst, windows, t)))
    act = active_pairs(inst, windows, t)
    res = enumerate_feasible_subsets(inst, prec, act, t, it=1)
    if len(enumerate_feasible_subsets(inst, prec, act, t).subsets) > 1:
        assert not res.complete and res.subsets == []
    with pytest.raises(ValueError):
        enumerate_feasible_subsets(inst, prec, act, t, it=0)


def test_strengthening_lp_small():
    # two items that never run together: each can be lifted to the capacity
    u = solve_strengthening_lp([(1, 0), (2, 0)], {(1, 0): 2, (2, 0): 1}, 5, [frozenset({(1, 0)}), frozenset({(2, 0)})])
    assert u == {(1, 0): 5.0, (2, 0): 5.0}
    # together they must share the capacity and keep at least their consumption
    u = solve_strengthening_lp([(1, 0), (2, 0)], {(1, 0): 2, (2, 0): 1}, 5, [frozenset({(1, 0), (2, 0)})])
    assert u[1, 0] + u[2, 0] == pytest.approx(5) and u[1, 0] >= 2 and u[2, 0] >= 1
    assert solve_strengthening_lp([(1, 0)], {(1, 0): 7}, 5, [frozenset({(1, 0)})]) is None


@pytest.mark.parametrize("case", CASES, ids=lambda c: c[0].name)
def test_strengthened_rows_are_valid_and_dominate(case):
    inst, prec, windows = case
    model = build_model(inst, windows, prec)
    coeffs = compute_strengthening(model)
    strong = apply_strengthening(model, coeffs)
    points = [solution_from_schedule(strong, s) for s in enumerate_schedules(inst, windows)]
    for srow in coeffs.rows:
        for p, q in srow.original.items():
            assert srow.coefficients.get(p, 0.0) >= q - 1e-9
    for row in strong.rows_of(RENEW_STRONG):
        for x in points:
            assert row.activity(x) <= row.rhs + 1e-9
    # the LP bound can only go up
    a, _ = lp_bound(model)
    b, _ = lp_bound(strong)
    if a is not None:
        assert b >= a - 1e-7


def test_single_project_rows_are_replaced():
    inst, prec, windows = preprocess(parse_instance(DATA / "small6.mm"))
    model = build_model(inst, windows, prec)
    strong, coeffs = strengthen_model(model, SolverHandle("highs"))
    changed = {(s.r, s.t) for s in coeffs.rows if s.changes}
    assert changed
    assert {r.tag for r in strong.rows_of(RENEW_STRONG)} == changed
    assert not changed & {r.tag for r in strong.rows_of(RENEW)}
    assert len(strong.rows) == len(model.rows)
    assert all(status == "complete" for status in coeffs.periods.values())


def test_multi_project_rows_are_added():
    inst, prec, windows = preprocess(parse_instance(DATA / "mista" / "sample.txt"))
    model = build_model(inst, windows, prec)
    strong, coeffs = strengthen_model(model)
    added = strong.rows_of(RENEW_STRONG)
    assert strong.count(RENEW) == model.count(RENEW)
    assert len(strong.rows) == len(model.rows) + len(added)
    assert all(len(r.tag) == 3 for r in added)


def test_time_limit_skips_periods():
    inst, prec, windows = preprocess(parse_instance(DATA / "small6.mm"))
    coeffs = compute_strengthening(build_model(inst, windows, prec), time_limit=1e-9)
    assert "skipped" in coeffs.periods.values()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=2, max_size=6), st.integers(5, 9), st.data())
def test_lp_solution_is_feasible_and_respects_lower_bounds(q, cap, data):
    pairs = [(i, 0) for i in range(len(q))]
    cons = dict(zip(pairs, q))
    subsets = [frozenset(s) for k in range(1, len(pairs) + 1) for s in itertools.combinations(pairs, k)
               if sum(cons[p] for p in s) <= cap and data.draw(st.booleans())]
    subsets = subsets or [frozenset({pairs[0]})]
    u = solve_strengthening_lp(pairs, cons, cap, subsets)
    assert u is not None
    for p in pairs:
        assert cons[p] - 1e-9 <= u[p] <= cap + 1e-9
    for s in subsets:
        assert sum(u[p] for p in s) <= cap + 1e-6
