"""Benchmark instance readers (PSPLIB .sm/.mm, MMLIB .mm, MISTA multi-project)
and the canonical :class:`Instance` record every other module consumes.

Job, mode and resource indices are zero-based.  PSPLIB job ``k`` becomes job
``k - 1``; in a multi-project instance each project's jobs are appended to one
global index in project order.
"""

from __future__ import annotations

import json
import logging
import re
from collections import defaultdict, deque
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

FORMATS = ("psplib_sm", "psplib_mm", "mmlib", "mista")


class InstanceError(ValueError):
    pass


class InstanceParseError(InstanceError):
    def __init__(self, message: str, path: str | Path | None = None, lineno: int | None = None):
        self.path = str(path) if path is not None else None
        self.lineno = lineno
        where = ""
        if self.path:
            where = self.path + (f":{lineno}" if lineno else "") + ": "
        elif lineno:
            where = f"line {lineno}: "
        super().__init__(where + message)


class InstanceValidationError(InstanceError):
    def __init__(self, diagnostics: Sequence["Diagnostic"]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Mode:
    duration: int
    renewable: tuple[int, ...]
    nonrenewable: tuple[int, ...]


@dataclass(frozen=True)
class Job:
    id: int
    project: int
    modes: tuple[Mode, ...]
    successors: tuple[int, ...]

    @property
    def min_duration(self) -> int:
        return min(m.duration for m in self.modes)

    @property
    def max_duration(self) -> int:
        return max(m.duration for m in self.modes)


@dataclass(frozen=True)
class ResourcePool:
    name: str
    capacity: int
    project: int | None = None  # None: shared by all projects


@dataclass(frozen=True)
class Project:
    id: int
    release: int
    jobs: tuple[int, ...]
    source: int
    sink: int
    cpd: int | None = None
    upper_bound: int | None = None


@dataclass(frozen=True)
class Instance:
    name: str
    projects: tuple[Project, ...]
    jobs: tuple[Job, ...]
    renewables: tuple[ResourcePool, ...]
    nonrenewables: tuple[ResourcePool, ...]

    @property
    def n_jobs(self) -> int:
        return len(self.jobs)

    @property
    def arcs(self) -> frozenset[tuple[int, int]]:
        return frozenset((j.id, s) for j in self.jobs for s in j.successors)

    @property
    def is_multi_project(self) -> bool:
        return len(self.projects) > 1

    @property
    def is_multi_mode(self) -> bool:
        return any(len(j.modes) > 1 for j in self.jobs)

    def project_of(self, job: int) -> Project:
        return self.projects[self.jobs[job].project]

    def with_projects(self, projects: Iterable[Project]) -> "Instance":
        return replace(self, projects=tuple(projects))

    def with_upper_bounds(self, bounds: dict[int, int] | Sequence[int]) -> "Instance":
        if not isinstance(bounds, dict):
            bounds = dict(enumerate(bounds))
        return self.with_projects(replace(p, upper_bound=int(bounds[p.id])) for p in self.projects)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    entity: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.entity}: {self.message}"


# ---------------------------------------------------------------------------
# validation


def topological_order(n: int, arcs: Iterable[tuple[int, int]]) -> list[int] | None:
    """Kahn's algorithm with smallest-id-first tie breaking; ``None`` on a cycle."""
    succ = defaultdict(list)
    indeg = [0] * n
    for a, b in arcs:
        succ[a].append(b)
        indeg[b] += 1
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    queue = deque(ready)
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in sorted(succ[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return order if len(order) == n else None


def _is_dummy(job: Job, n_ren: int, n_non: int) -> bool:
    if len(job.modes) != 1:
        return False
    m = job.modes[0]
    return m.duration == 0 and not any(m.renewable) and not any(m.nonrenewable)


def validate(instance: Instance) -> list[Diagnostic]:
    """Check every structural invariant of ``instance``; returns diagnostics, never raises."""
    out: list[Diagnostic] = []
    n = instance.n_jobs
    n_ren, n_non = len(instance.renewables), len(instance.nonrenewables)

    for idx, job in enumerate(instance.jobs):
        tag = f"job {idx}"
        if job.id != idx:
            out.append(Diagnostic("job-id", tag, f"id field is {job.id}"))
        if not 0 <= job.project < len(instance.projects):
            out.append(Diagnostic("unknown-project", tag, f"project {job.project} does not exist"))
        if not job.modes:
            out.append(Diagnostic("no-modes", tag, "job has no execution mode"))
        for m_idx, mode in enumerate(job.modes):
            mtag = f"{tag} mode {m_idx}"
            if len(mode.renewable) != n_ren or len(mode.nonrenewable) != n_non:
                out.append(Diagnostic(
                    "arity-mismatch", mtag,
                    f"consumption vectors have {len(mode.renewable)}/{len(mode.nonrenewable)} entries,"
                    f" expected {n_ren}/{n_non}"))
            if mode.duration < 0 or any(q < 0 for q in mode.renewable + mode.nonrenewable):
                out.append(Diagnostic("negative-value", mtag, "duration and consumptions must be >= 0"))
        for s in job.successors:
            if s == idx:
                out.append(Diagnostic("self-loop", tag, f"arc ({idx},{idx})"))
            elif not 0 <= s < n:
                out.append(Diagnostic("unknown-job", tag, f"arc ({idx},{s}) points outside 0..{n - 1}"))
            elif instance.jobs[s].project != job.project:
                out.append(Diagnostic("cross-project-arc", tag, f"arc ({idx},{s}) joins two projects"))

    for pool in instance.renewables + instance.nonrenewables:
        if pool.capacity < 0:
            out.append(Diagnostic("negative-value", f"resource {pool.name}", "capacity must be >= 0"))

    owner: dict[int, int] = {}
    for p in instance.projects:
        ptag = f"project {p.id}"
        if p.release < 0:
            out.append(Diagnostic("negative-release", ptag, f"release date {p.release}"))
        for j in p.jobs:
            if j in owner:
                out.append(Diagnostic("partition", f"job {j}", f"listed by projects {owner[j]} and {p.id}"))
            owner[j] = p.id
            if 0 <= j < n and instance.jobs[j].project != p.id:
                out.append(Diagnostic("partition", f"job {j}", f"job says project {instance.jobs[j].project}"))
        for role, j in (("source", p.source), ("sink", p.sink)):
            if j not in p.jobs:
                out.append(Diagnostic("artificial-job", ptag, f"{role} {j} is not a project job"))
            elif 0 <= j < n and not _is_dummy(instance.jobs[j], n_ren, n_non):
                out.append(Diagnostic("artificial-job", ptag,
                                      f"{role} {j} must have one zero-duration, zero-consumption mode"))
        if 0 <= p.sink < n and instance.jobs[p.sink].successors:
            out.append(Diagnostic("artificial-job", ptag, f"sink {p.sink} has successors"))
        if p.upper_bound is not None and p.cpd is not None and p.upper_bound < p.release + p.cpd:
            out.append(Diagnostic("infeasible-bound", ptag,
                                  f"upper bound {p.upper_bound} < release + cpd = {p.release + p.cpd}"))
    missing = [j for j in range(n) if j not in owner]
    if missing:
        out.append(Diagnostic("partition", "jobs", f"jobs {missing} belong to no project"))

    arcs = [(a, b) for a, b in instance.arcs if 0 <= b < n and a != b]
    if topological_order(n, arcs) is None:
        out.append(Diagnostic("cycle", "precedence", "precedence relation contains a cycle"))
    return out


def check(instance: Instance) -> Instance:
    diags = validate(instance)
    if diags:
        raise InstanceValidationError(diags)
    return instance


# ---------------------------------------------------------------------------
# assembly helpers


@dataclass
class _RawProject:
    release: int
    # per job: (modes, successors) using project-local zero-based ids
    jobs: list[tuple[list[Mode], list[int]]]


def _ensure_artificial(raw: _RawProject, n_ren: int, n_non: int) -> _RawProject:
    """Add a dummy source/sink when the project lacks a unique one."""
    jobs = raw.jobs
    dummy = Mode(0, (0,) * n_ren, (0,) * n_non)

    def is_dummy(modes: list[Mode]) -> bool:
        return len(modes) == 1 and modes[0] == dummy

    preds = defaultdict(set)
    for j, (_, succ) in enumerate(jobs):
        for s in succ:
            preds[s].add(j)
    starts = [j for j in range(len(jobs)) if not preds[j]]
    if not (len(starts) == 1 and is_dummy(jobs[starts[0]][0])):
        log.warning("project without artificial source: adding one")
        jobs = [([dummy], [s + 1 for s in starts])] + [(m, [s + 1 for s in succ]) for m, succ in jobs]
    ends = [j for j, (_, succ) in enumerate(jobs) if not succ]
    if not (len(ends) == 1 and is_dummy(jobs[ends[0]][0])):
        log.warning("project without artificial sink: adding one")
        sink = len(jobs)
        jobs = [(m, succ + ([sink] if j in ends else [])) for j, (m, succ) in enumerate(jobs)]
        jobs.append(([dummy], []))
    return _RawProject(raw.release, jobs)


def _assemble(name: str, raws: list[_RawProject], renewables, nonrenewables) -> Instance:
    n_ren, n_non = len(renewables), len(nonrenewables)
    projects, jobs = [], []
    for p, raw in enumerate(raws):
        raw = _ensure_artificial(raw, n_ren, n_non)
        base = len(jobs)
        ids = tuple(range(base, base + len(raw.jobs)))
        for k, (modes, succ) in enumerate(raw.jobs):
            jobs.append(Job(base + k, p, tuple(modes), tuple(sorted(base + s for s in succ))))
        preds = {s for _, succ in raw.jobs for s in succ}
        source = base + min(k for k in range(len(raw.jobs)) if k not in preds)
        sink = base + max(k for k, (_, succ) in enumerate(raw.jobs) if not succ)
        projects.append(Project(p, raw.release, ids, source, sink))
    return Instance(name, tuple(projects), tuple(jobs), tuple(renewables), tuple(nonrenewables))


# ---------------------------------------------------------------------------
# PSPLIB / MMLIB text format

_STAR = re.compile(r"^\*{5,}")
_DASH = re.compile(r"^-{5,}")
_RES_LABEL = re.compile(r"\b([RND])\s*(\d+)")


def _ints(line: str, path, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise InstanceParseError(f"expected integers, got {line.strip()!r}", path, lineno) from None


@dataclass
class _PsplibData:
    n_projects: int
    n_jobs: int
    release: int
    n_ren: int
    n_non: int
    modes: dict[int, list[Mode]]
    n_modes: dict[int, int]
    successors: dict[int, list[int]]
    renewable_caps: list[int]
    nonrenewable_caps: list[int]


def _read_psplib(text: str, path=None) -> _PsplibData:
    lines = text.splitlines()
    n_projects = n_jobs = None
    release = 0
    n_ren = n_non = n_doubly = None
    successors: dict[int, list[int]] = {}
    n_modes: dict[int, int] = {}
    modes: dict[int, list[Mode]] = defaultdict(list)
    caps: list[int] | None = None
    labels: list[str] | None = None

    i = 0
    while i < len(lines):
        raw = lines[i]
        line = raw.strip()
        lineno = i + 1
        low = line.lower()
        if not line or _STAR.match(line) or _DASH.match(line):
            i += 1
            continue
        if low.startswith("projects") and ":" in line:
            n_projects = _ints(line.split(":", 1)[1], path, lineno)[0]
        elif low.startswith("jobs") and ":" in line:
            n_jobs = _ints(line.rsplit(":", 1)[1], path, lineno)[0]
        elif low.startswith("- renewable") or low.startswith("-renewable"):
            n_ren = int(re.search(r":\s*(\d+)", line).group(1))
        elif low.startswith("- nonrenewable") or low.startswith("-nonrenewable"):
            n_non = int(re.search(r":\s*(\d+)", line).group(1))
        elif low.startswith("- doubly") or low.startswith("-doubly"):
            n_doubly = int(re.search(r":\s*(\d+)", line).group(1))
        elif low.startswith(("file with basedata", "initial value", "horizon", "resources")):
            pass
        elif low.startswith("project information"):
            i += 2  # header row
            while i < len(lines) and lines[i].strip() and not _STAR.match(lines[i].strip()):
                vals = _ints(lines[i], path, i + 1)
                if len(vals) < 3:
                    raise InstanceParseError("short PROJECT INFORMATION row", path, i + 1)
                release = vals[2]
                i += 1
            continue
        elif low.startswith("precedence relations"):
            i += 2
            while i < len(lines) and lines[i].strip() and not _STAR.match(lines[i].strip()):
                vals = _ints(lines[i], path, i + 1)
                if len(vals) < 3 or len(vals) != 3 + vals[2]:
                    raise InstanceParseError("malformed precedence row", path, i + 1)
                job = vals[0]
                n_modes[job] = vals[1]
                successors[job] = vals[3:]
                i += 1
            continue
        elif low.startswith("requests/durations"):
            header = lines[i + 1] if i + 1 < len(lines) else ""
            labels = [k for k, _ in _RES_LABEL.findall(header)]
            i += 2
            width = len(labels)
            job = None
            while i < len(lines) and not _STAR.match(lines[i].strip()):
                row = lines[i].strip()
                if not row or _DASH.match(row):
                    i += 1
                    continue
                vals = _ints(row, path, i + 1)
                if len(vals) == 3 + width:
                    job, vals = vals[0], vals[1:]
                elif len(vals) == 2 + width and job is not None:
                    pass
                else:
                    raise InstanceParseError(
                        f"REQUESTS/DURATIONS row has {len(vals)} fields, expected {2 + width} or {3 + width}",
                        path, i + 1)
                mode_no, dur, req = vals[0], vals[1], vals[2:]
                if mode_no != len(modes[job]) + 1:
                    raise InstanceParseError(f"job {job}: mode {mode_no} out of order", path, i + 1)
                ren = tuple(q for q, k in zip(req, labels) if k == "R")
                non = tuple(q for q, k in zip(req, labels) if k == "N")
                modes[job].append(Mode(dur, ren, non))
                i += 1
            continue
        elif low.startswith("resourceavailabilities"):
            header = lines[i + 1] if i + 1 < len(lines) else ""
            cap_labels = [k for k, _ in _RES_LABEL.findall(header)]
            if i + 2 >= len(lines):
                raise InstanceParseError("missing resource availability row", path, i + 2)
            caps = _ints(lines[i + 2], path, i + 3)
            if len(caps) != len(cap_labels):
                raise InstanceParseError("availability row does not match its header", path, i + 3)
            labels_caps = list(zip(cap_labels, caps))
            i += 3
            continue
        else:
            log.warning("%s:%d: ignoring unrecognised line %r", path or "<text>", lineno, line[:40])
        i += 1

    if n_jobs is None or caps is None or labels is None or not successors:
        raise InstanceParseError("incomplete file: missing header, precedence, requests or availabilities", path)
    if n_doubly:
        log.warning("%s: %d doubly constrained resources ignored", path or "<text>", n_doubly)
    n_ren = labels.count("R") if n_ren is None else n_ren
    n_non = labels.count("N") if n_non is None else n_non
    if labels.count("R") != n_ren or labels.count("N") != n_non:
        raise InstanceParseError(
            f"header declares {n_ren} renewable / {n_non} nonrenewable resources, "
            f"requests table has {labels.count('R')} / {labels.count('N')}", path)
    if sorted(successors) != list(range(1, n_jobs + 1)):
        raise InstanceParseError(f"precedence table lists {len(successors)} jobs, header says {n_jobs}", path)
    for job in range(1, n_jobs + 1):
        if len(modes.get(job, ())) != n_modes[job]:
            raise InstanceParseError(
                f"job {job}: {len(modes.get(job, ()))} mode rows, precedence table says {n_modes[job]}", path)
    ren_caps = [c for k, c in labels_caps if k == "R"]
    non_caps = [c for k, c in labels_caps if k == "N"]
    return _PsplibData(n_projects or 1, n_jobs, release, n_ren, n_non, dict(modes), n_modes, successors,
                       ren_caps, non_caps)


def _psplib_raw(data: _PsplibData) -> _RawProject:
    jobs = []
    for job in range(1, data.n_jobs + 1):
        jobs.append((list(data.modes[job]), [s - 1 for s in data.successors[job]]))
    return _RawProject(data.release, jobs)


def parse_psplib_text(text: str, name: str = "instance", path=None) -> Instance:
    data = _read_psplib(text, path)
    if data.n_projects != 1:
        log.warning("%s: 'projects: %d' read as one merged project", path or name, data.n_projects)
    for job, succ in data.successors.items():
        for s in succ:
            if not 1 <= s <= data.n_jobs:
                raise InstanceParseError(f"job {job} has unknown successor {s}", path)
    renew = [ResourcePool(f"R{k + 1}", c) for k, c in enumerate(data.renewable_caps)]
    nonrenew = [ResourcePool(f"N{k + 1}", c) for k, c in enumerate(data.nonrenewable_caps)]
    return _assemble(name, [_psplib_raw(data)], renew, nonrenew)


# ---------------------------------------------------------------------------
# MISTA multi-project problem file
#
#   <P>
#   <release> <cpd> <project file>      (P lines, file relative to the problem file)
#   <G>
#   <capacity_1> ... <capacity_G>
#
# The last G renewable columns of every project file are the shared (global)
# resources; their per-project availability entries are ignored.


def parse_mista(path: str | Path) -> Instance:
    path = Path(path)
    try:
        lines = [(k + 1, ln.split("#", 1)[0].split("//", 1)[0].strip())
                 for k, ln in enumerate(path.read_text().splitlines())]
    except OSError as exc:
        raise InstanceParseError(str(exc), path) from None
    lines = [(k, ln) for k, ln in lines if ln]
    pos = 0

    def take() -> tuple[int, str]:
        nonlocal pos
        if pos >= len(lines):
            raise InstanceParseError("unexpected end of problem file", path)
        pos += 1
        return lines[pos - 1]

    lineno, line = take()
    n_proj = _ints(line, path, lineno)[0]
    entries = []
    for _ in range(n_proj):
        lineno, line = take()
        parts = line.split()
        if len(parts) < 3:
            raise InstanceParseError("project line needs: release cpd file", path, lineno)
        try:
            entries.append((int(parts[0]), int(parts[1]), parts[2], lineno))
        except ValueError:
            raise InstanceParseError("release and cpd must be integers", path, lineno) from None
    lineno, line = take()
    n_global = _ints(line, path, lineno)[0]
    global_caps: list[int] = []
    while len(global_caps) < n_global:
        lineno, line = take()
        global_caps.extend(_ints(line, path, lineno))
    if len(global_caps) != n_global:
        raise InstanceParseError(f"expected {n_global} global capacities", path, lineno)
    if pos < len(lines):
        log.warning("%s: ignoring %d trailing lines", path, len(lines) - pos)

    datas = []
    for release, _cpd, rel, lineno in entries:
        sub = path.parent / rel
        try:
            text = sub.read_text()
        except OSError as exc:
            raise InstanceParseError(f"cannot read project file: {exc}", path, lineno) from None
        data = _read_psplib(text, sub)
        if data.n_ren < n_global:
            raise InstanceParseError(f"{rel}: fewer renewable columns than global resources", path, lineno)
        datas.append((release, data))

    renew = [ResourcePool(f"G{g + 1}", c) for g, c in enumerate(global_caps)]
    nonrenew = []
    ren_slot: list[list[int]] = []
    non_slot: list[list[int]] = []
    for p, (_, data) in enumerate(datas):
        n_local = data.n_ren - n_global
        slots = []
        for k in range(n_local):
            slots.append(len(renew))
            renew.append(ResourcePool(f"P{p + 1}.R{k + 1}", data.renewable_caps[k], p))
        slots.extend(range(n_global))
        ren_slot.append(slots)
        nslots = []
        for k in range(data.n_non):
            nslots.append(len(nonrenew))
            nonrenew.append(ResourcePool(f"P{p + 1}.N{k + 1}", data.nonrenewable_caps[k], p))
        non_slot.append(nslots)

    raws = []
    for p, (release, data) in enumerate(datas):
        raw = _psplib_raw(data)
        jobs = []
        for modes, succ in raw.jobs:
            remapped = []
            for m in modes:
                ren = [0] * len(renew)
                for q, slot in zip(m.renewable, ren_slot[p]):
                    ren[slot] = q
                non = [0] * len(nonrenew)
                for q, slot in zip(m.nonrenewable, non_slot[p]):
                    non[slot] = q
                remapped.append(Mode(m.duration, tuple(ren), tuple(non)))
            jobs.append((remapped, succ))
        raws.append(_RawProject(release, jobs))
    return _assemble(path.stem, raws, renew, nonrenew)


# ---------------------------------------------------------------------------
# entry points


def detect_format(path: str | Path) -> str:
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".sm":
        return "psplib_sm"
    if ext == ".mm":
        head = path.read_text(errors="replace")[:2000].lower()
        return "mmlib" if "mmlib" in head else "psplib_mm"
    if ext == ".txt":
        return "mista"
    raise InstanceParseError(f"cannot infer format from extension {ext!r}", path)


def parse_instance(path: str | Path, format: str | None = None) -> Instance:
    """Read ``path`` in the given benchmark format and return a validated Instance.

    Raises InstanceParseError (with line number where known) on malformed
    input and InstanceValidationError when the instance breaks an invariant,
    e.g. a cyclic precedence relation.
    """
    path = Path(path)
    format = format or detect_format(path)
    if format not in FORMATS:
        raise InstanceParseError(f"unknown format {format!r}", path)
    if format == "mista":
        inst = parse_mista(path)
    else:
        try:
            text = path.read_text()
        except OSError as exc:
            raise InstanceParseError(str(exc), path) from None
        inst = parse_psplib_text(text, path.stem, path)
        if format == "psplib_sm" and inst.is_multi_mode:
            raise InstanceParseError("single-mode format but jobs declare several modes", path)
    return check(inst)


def serial_upper_bounds(instance: Instance) -> dict[int, int]:
    """sigma_p plus the summed longest mode duration of the project's jobs."""
    return {p.id: p.release + sum(instance.jobs[j].max_duration for j in p.jobs) for p in instance.projects}


# ---------------------------------------------------------------------------
# canonical dumps


def to_dict(instance: Instance) -> dict:
    return {
        "name": instance.name,
        "projects": [
            {"id": p.id, "release": p.release, "jobs": list(p.jobs), "source": p.source, "sink": p.sink,
             "cpd": p.cpd, "upper_bound": p.upper_bound}
            for p in instance.projects
        ],
        "renewables": [{"name": r.name, "capacity": r.capacity, "project": r.project} for r in instance.renewables],
        "nonrenewables": [{"name": r.name, "capacity": r.capacity, "project": r.project}
                          for r in instance.nonrenewables],
        "jobs": [
            {"id": j.id, "project": j.project, "successors": list(j.successors),
             "modes": [{"duration": m.duration, "renewable": list(m.renewable),
                        "nonrenewable": list(m.nonrenewable)} for m in j.modes]}
            for j in instance.jobs
        ],
    }


def from_dict(data: dict) -> Instance:
    return Instance(
        data["name"],
        tuple(Project(p["id"], p["release"], tuple(p["jobs"]), p["source"], p["sink"], p.get("cpd"),
                      p.get("upper_bound")) for p in data["projects"]),
        tuple(Job(j["id"], j["project"],
                  tuple(Mode(m["duration"], tuple(m["renewable"]), tuple(m["nonrenewable"])) for m in j["modes"]),
                  tuple(j["successors"])) for j in data["jobs"]),
        tuple(ResourcePool(r["name"], r["capacity"], r.get("project")) for r in data["renewables"]),
        tuple(ResourcePool(r["name"], r["capacity"], r.get("project")) for r in data["nonrenewables"]),
    )


def dump_json(instance: Instance) -> str:
    return json.dumps(to_dict(instance), indent=1)


def load_json(text: str) -> Instance:
    return from_dict(json.loads(text))


def write_psplib(instance: Instance) -> str:
    """Render a single-project instance in the PSPLIB .mm/.sm text layout."""
    if instance.is_multi_project:
        raise InstanceError("PSPLIB text layout holds exactly one project")
    p = instance.projects[0]
    n_ren, n_non = len(instance.renewables), len(instance.nonrenewables)
    star = "*" * 72
    horizon = sum(j.max_duration for j in instance.jobs)
    out = [star, f"file with basedata            : {instance.name}.bas", f"initial value random generator: 0", star,
           "projects                      :  1", f"jobs (incl. supersource/sink ):  {instance.n_jobs}",
           f"horizon                       :  {horizon}", "RESOURCES",
           f"  - renewable                 :  {n_ren}   R", f"  - nonrenewable              :  {n_non}   N",
           "  - doubly constrained        :  0   D", star, "PROJECT INFORMATION:",
           "pronr.  #jobs rel.date duedate tardcost  MPM-Time",
           f"    1     {instance.n_jobs - 2}      {p.release}       0        0       0", star,
           "PRECEDENCE RELATIONS:", "jobnr.    #modes  #successors   successors"]
    for j in instance.jobs:
        succ = "".join(f"{s + 1:4d}" for s in j.successors)
        out.append(f"{j.id + 1:4d}{len(j.modes):9d}{len(j.successors):11d}      {succ}".rstrip())
    labels = [f"R {k + 1}" for k in range(n_ren)] + [f"N {k + 1}" for k in range(n_non)]
    out += [star, "REQUESTS/DURATIONS:", "jobnr. mode duration  " + "  ".join(labels), "-" * 72]
    for j in instance.jobs:
        for k, m in enumerate(j.modes):
            head = f"{j.id + 1:3d}" if k == 0 else "   "
            req = "".join(f"{q:5d}" for q in m.renewable + m.nonrenewable)
            out.append(f"{head}{k + 1:7d}{m.duration:6d}{req}")
    caps = [r.capacity for r in instance.renewables] + [r.capacity for r in instance.nonrenewables]
    out += [star, "RESOURCEAVAILABILITIES:", "  " + "  ".join(labels), "".join(f"{c:5d}" for c in caps), star]
    return "\n".join(out) + "\n"
