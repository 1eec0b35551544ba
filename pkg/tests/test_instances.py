from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_instance
from rcpspcuts.instances import (FORMATS, InstanceParseError, InstanceValidationError, Job, Mode, check,
                                 detect_format, dump_json, load_json, parse_instance, parse_psplib_text, validate,
                                 write_psplib)

DATA = Path(__file__).parent / "data"


def test_single_mode_chain():
    inst = parse_instance(DATA / "chain4.sm")
    assert inst.n_jobs == 4 and not inst.is_multi_mode and not inst.is_multi_project
    assert [j.successors for j in inst.jobs] == [(1,), (2,), (3,), ()]
    assert [j.modes[0].duration for j in inst.jobs] == [0, 2, 3, 0]
    assert inst.renewables[0].capacity == 4
    p = inst.projects[0]
    assert (p.source, p.sink, p.release) == (0, 3, 0)


def test_multi_mode_file():
    inst = parse_instance(DATA / "small6.mm")
    assert inst.is_multi_mode
    assert detect_format(DATA / "small6.mm") == "psplib_mm"
    for job in inst.jobs:
        for m in job.modes:
            assert len(m.renewable) == len(inst.renewables)
            assert len(m.nonrenewable) == len(inst.nonrenewables)


def test_mista_two_projects():
    inst = parse_instance(DATA / "mista" / "sample.txt")
    assert inst.is_multi_project and len(inst.projects) == 2
    assert [p.release for p in inst.projects] == [0, 1]
    # job ids are global and each project keeps its own dummy source and sink
    seen = set()
    for p in inst.projects:
        assert p.source in p.jobs and p.sink in p.jobs
        assert not seen & set(p.jobs)
        seen |= set(p.jobs)
        for j in p.jobs:
            assert all(inst.jobs[s].project == p.id for s in inst.jobs[j].successors)
    assert seen == set(range(inst.n_jobs))


def test_instance_without_real_jobs():
    inst = parse_instance(DATA / "empty.sm")
    assert inst.n_jobs == 2
    assert all(j.modes[0].duration == 0 for j in inst.jobs)


def test_truncated_file_reports_location(tmp_path):
    lines = (DATA / "small6.mm").read_text().splitlines()
    cut = next(k for k, line in enumerate(lines) if line.startswith("REQUESTS/DURATIONS")) + 4
    bad = tmp_path / "cut.mm"
    bad.write_text("\n".join(lines[:cut]) + "\n")
    with pytest.raises(InstanceParseError) as err:
        parse_instance(bad)
    assert "cut.mm" in str(err.value)
    bad.write_text((DATA / "chain4.sm").read_text().replace("  3      1     3       2", "  3      1     x       2"))
    with pytest.raises(InstanceParseError) as err:
        parse_instance(bad)
    assert err.value.lineno is not None


def test_unknown_extension_and_format(tmp_path):
    bad = tmp_path / "x.dat"
    bad.write_text("1 2 3")
    with pytest.raises(InstanceParseError):
        parse_instance(bad)
    with pytest.raises(InstanceParseError):
        parse_instance(DATA / "chain4.sm", format="nope")
    assert set(FORMATS) >= {"psplib_sm", "psplib_mm", "mista"}


def test_cycle_is_rejected():
    inst = parse_instance(DATA / "chain4.sm")
    jobs = list(inst.jobs)
    jobs[2] = replace(jobs[2], successors=(1, 3))
    with pytest.raises(InstanceValidationError) as err:
        check(replace(inst, jobs=tuple(jobs)))
    assert any(d.code == "cycle" for d in err.value.diagnostics)


def test_validation_collects_every_problem():
    inst = parse_instance(DATA / "chain4.sm")
    jobs = list(inst.jobs)
    jobs[1] = replace(jobs[1], modes=(Mode(-1, (5,), ()),), successors=(1, 9))
    codes = {d.code for d in validate(replace(inst, jobs=tuple(jobs)))}
    assert {"negative-value", "self-loop", "unknown-job"} <= codes


def test_non_dummy_sink_rejected():
    inst = parse_instance(DATA / "chain4.sm")
    jobs = list(inst.jobs)
    jobs[3] = Job(3, 0, (Mode(1, (1,), ()),), ())
    assert any(d.code == "artificial-job" for d in validate(replace(inst, jobs=tuple(jobs))))


NO_DUMMIES = """\
************************************************************************
projects                      :  1
jobs (incl. supersource/sink ):  2
horizon                       :  5
RESOURCES
  - renewable                 :  1   R
  - nonrenewable              :  0   N
  - doubly constrained        :  0   D
************************************************************************
PROJECT INFORMATION:
pronr.  #jobs rel.date duedate tardcost  MPM-Time
    1      2      0        5        1        5
************************************************************************
PRECEDENCE RELATIONS:
jobnr.    #modes  #successors   successors
   1        1          1           2
   2        1          0
************************************************************************
REQUESTS/DURATIONS:
jobnr. mode duration  R 1
------------------------------------------------------------------------
  1      1     2       3
  2      1     3       2
************************************************************************
RESOURCEAVAILABILITIES:
  R 1
    4
************************************************************************
"""


def test_missing_dummies_are_added():
    inst = check(parse_psplib_text(NO_DUMMIES, "nodummy"))
    p = inst.projects[0]
    assert inst.n_jobs == 4
    for j in (p.source, p.sink):
        assert inst.jobs[j].modes[0].duration == 0 and not any(inst.jobs[j].modes[0].renewable)
    real = [j for j in p.jobs if j not in (p.source, p.sink)]
    assert sorted(inst.jobs[j].modes[0].duration for j in real) == [2, 3]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_json_round_trip(seed):
    inst = random_instance(seed, max_real=5, max_modes=3)
    assert load_json(dump_json(inst)) == inst


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_psplib_writer_round_trip(seed):
    inst = random_instance(seed, max_real=5, max_modes=3, projects=1)
    back = parse_psplib_text(write_psplib(inst), inst.name)
    assert [j.modes for j in back.jobs] == [j.modes for j in inst.jobs]
    assert back.arcs == inst.arcs
    assert [r.capacity for r in back.renewables] == [r.capacity for r in inst.renewables]
    assert [r.capacity for r in back.nonrenewables] == [r.capacity for r in inst.nonrenewables]
