import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import cbc_command, mixed_suite
from rcpspcuts.lpcore import (INFEASIBLE, LIMIT, OPTIMAL, UNBOUNDED, SolverHandle, build_problem, format_lp,
                              parse_lp, solve_lp, solve_milp)
from rcpspcuts.lpcore.lpformat import LpFormatError

HIGHS = SolverHandle("highs")


@st.composite
def bounded_lp(draw):
    """Random LP that is feasible (rows built around a known point) and bounded (finite boxes)."""
    n = draw(st.integers(1, 7))
    m = draw(st.integers(0, 6))
    x0 = np.array(draw(st.lists(st.integers(0, 4), min_size=n, max_size=n)), dtype=float)
    rows = []
    for _ in range(m):
        coefs = {j: float(draw(st.integers(-5, 5))) for j in range(n) if draw(st.booleans())}
        act = sum(v * x0[j] for j, v in coefs.items())
        sense = draw(st.sampled_from("LGE"))
        slack = draw(st.integers(0, 3))
        rows.append((coefs, sense, act + slack if sense == "L" else act - slack if sense == "G" else act))
    c = draw(st.lists(st.integers(-6, 6), min_size=n, max_size=n))
    return build_problem(c, rows, 0, 5, maximize=draw(st.booleans()))


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(bounded_lp())
def test_builtin_lp_matches_highs(prob):
    ours = solve_lp(prob)
    ref = solve_lp(prob, HIGHS)
    assert ours.status == ref.status == OPTIMAL
    assert ours.objective == pytest.approx(ref.objective, rel=1e-7, abs=1e-7)
    assert prob.max_violation(ours.x) <= 1e-6
    assert prob.objective(ours.x) == pytest.approx(ours.objective, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=2, max_size=8), st.lists(st.integers(1, 9), min_size=8, max_size=8),
       st.integers(3, 20))
def test_builtin_knapsack_matches_enumeration(weights, values, cap):
    n = len(weights)
    values = values[:n]
    prob = build_problem(values, [(dict(enumerate(map(float, weights))), "L", cap)], 0, 1, integer=True,
                         maximize=True)
    best = max(sum(v for v, b in zip(values, bits) if b)
               for bits in itertools.product((0, 1), repeat=n) if sum(w for w, b in zip(weights, bits) if b) <= cap)
    res = solve_milp(prob)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(best)
    assert np.allclose(res.x, np.round(res.x))


def test_infeasible_and_unbounded():
    infeasible = build_problem([1, 1], [({0: 1, 1: 1}, "G", 5)], 0, 2)
    assert solve_lp(infeasible).status == INFEASIBLE
    assert solve_lp(infeasible, HIGHS).status == INFEASIBLE
    unbounded = build_problem([-1, 0], [({0: 1, 1: -1}, "L", 1)], 0, np.inf)
    assert solve_lp(unbounded).status == UNBOUNDED
    assert solve_milp(build_problem([1], [({0: 2}, "E", 1)], 0, 3, integer=True)).status == INFEASIBLE


def test_duals_of_small_lp():
    # min -3x - 2y  s.t. x + y <= 4, x + 3y <= 7, x <= 3: optimum (3, 1), second row slack
    prob = build_problem([-3, -2], [({0: 1, 1: 1}, "L", 4), ({0: 1, 1: 3}, "L", 7), ({0: 1}, "L", 3)], 0, np.inf)
    res = solve_lp(prob)
    assert res.objective == pytest.approx(-11)
    assert res.x == pytest.approx([3, 1])
    assert res.duals[0] == pytest.approx(-2)
    assert res.duals[1] == pytest.approx(0)
    assert res.duals[2] == pytest.approx(-1)


def test_reduced_costs_match_highs_on_nondegenerate_lp():
    prob = build_problem([2, 3, 1], [({0: 1, 1: 1, 2: 1}, "G", 2), ({0: 1, 2: -1}, "L", 0.5)], 0, 10)
    ours, ref = solve_lp(prob), solve_lp(prob, HIGHS)
    assert ours.x == pytest.approx(ref.x)
    assert ours.reduced_costs == pytest.approx(ref.reduced_costs, abs=1e-7)


def test_node_limit_reports_limit():
    # many symmetric optima keep the tree open
    n = 14
    prob = build_problem([1] * n, [({j: 2.0 for j in range(n)}, "E", n + 1)], 0, 1, integer=True)
    res = solve_milp(prob, SolverHandle(node_limit=5))
    assert res.status in (LIMIT, INFEASIBLE)


def test_lp_format_round_trip():
    for _, prob in mixed_suite(12, seed=3):
        text = format_lp(prob, title="t")
        back = parse_lp(text)
        assert back.n_cols == prob.n_cols
        a, b = solve_milp(prob), solve_milp(back)
        assert a.status == b.status == OPTIMAL
        assert a.objective == pytest.approx(b.objective, abs=1e-9)
        # columns are renumbered by first appearance, after which the text is a fixed point
        again = format_lp(back, title="t")
        assert format_lp(parse_lp(again), title="t") == again


def test_lp_format_parses_common_syntax():
    text = """\\ comment
Maximize
 obj: 3 x + 2 y - z
Subject To
 c1: x + y + z <= 4
 c2: x - y >= -2
 c3: 2 x + 1.5 z = 3
Bounds
 0 <= x <= 10
 y <= 3
 z free
General
 y
End
"""
    prob = parse_lp(text)
    assert prob.maximize and prob.n_rows == 3 and prob.n_cols == 3
    assert prob.integer.tolist() == [False, True, False]
    assert np.isneginf(prob.lb[2])
    res = solve_milp(prob, HIGHS)
    assert res.status == OPTIMAL
    assert solve_milp(prob).objective == pytest.approx(res.objective)


def test_lp_format_rejects_garbage():
    with pytest.raises(LpFormatError):
        parse_lp("Minimize\n obj: x +\nSubject To\n c1: x >= 1\nEnd\n")
    with pytest.raises(LpFormatError):
        parse_lp("Minimize\n obj: x\nSubject To\n c1: x >=\nEnd\n")
    with pytest.raises(LpFormatError):
        parse_lp("x + y\nMinimize\n obj: x\nEnd\n")


def test_handle_validation():
    with pytest.raises(ValueError):
        SolverHandle("cplex")
    with pytest.raises(ValueError):
        SolverHandle("external", "cbc {lp}")
    with pytest.raises(ValueError):
        SolverHandle(time_limit=0)
    h = SolverHandle(time_limit=10).limited(3)
    assert h.time_limit == 3 and SolverHandle(time_limit=2).limited(5).time_limit == 2


@pytest.mark.skipif(cbc_command() is None, reason="no CBC executable available")
def test_external_bridge_on_lp_and_milp():
    handle = SolverHandle("external", cbc_command())
    for _, prob in mixed_suite(6, seed=11):
        ours, ref = solve_milp(prob), solve_milp(prob, handle)
        assert ref.status == OPTIMAL
        assert ours.objective == pytest.approx(ref.objective, rel=1e-6, abs=1e-6)
