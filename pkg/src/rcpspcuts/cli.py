"""Command-line interface: preprocess, cutplane, ablate, report, export."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import statistics
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .config import ENV_PREFIX, ConfigError, dump_config, load_config
from .engine import ENGINE_FAMILIES, EngineConfig, ablation_configs, ablation_run, instance_group, resolve_bounds, run_cutting_plane
from .instances import Instance, InstanceError, parse_instance
from .lpcore import INFEASIBLE, SolverError, SolverHandle
from .model import EmptyWindowError, build_model, export_lp, lp_bound
from .precedence import CycleError, InfeasibleBoundError, preprocess
from .strengthen import strengthen_model

log = logging.getLogger("rcpspcuts")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4

RESULT_FIELDS = ["instance", "group", "status", "lr", "slr", "bound", "ub", "lr_gap", "slr_gap", "gap", "time", "iterations", "cuts"]


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    instances: list[Path]
    config: EngineConfig
    out: Path
    run: dict = field(default_factory=dict)
    note: str = "runs are deterministic; no random seed is involved"

    def check(self) -> None:
        missing = [str(p) for p in self.instances if not p.exists()]
        if missing:
            raise CliError(f"missing instance files: {', '.join(missing)}", EXIT_PARSE)

    def write(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        text = "# " + self.note + "\n" + "".join(f"# instance {p}\n" for p in self.instances)
        (self.out / "manifest.cfg").write_text(text + dump_config(self.config, self.run))


# ---------------------------------------------------------------------------
# helpers


def _backend(run: dict, time_limit: Optional[float] = None) -> SolverHandle:
    kind = run.get("backend") or "builtin"
    command = run.get("external_solver") or None
    if command and kind == "builtin":
        kind = "external"
    try:
        return SolverHandle(kind, command, time_limit)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_SOLVER) from exc


def _load(path: Path, fmt: Optional[str]) -> Instance:
    try:
        return parse_instance(path, fmt or None)
    except FileNotFoundError as exc:
        raise CliError(f"{path}: no such file", EXIT_PARSE) from exc
    except CycleError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from exc
    except InstanceError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from exc


def _parse_ub(text: Optional[str]) -> Optional[list[int]]:
    if not text:
        return None
    try:
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise CliError(f"bad --ub value {text!r}", EXIT_PARSE) from exc


def _overrides(args) -> dict:
    mapping = {
        "families": args.families, "time_limit": args.time_limit, "it": args.it_limit, "eta": args.eta,
        "iota": args.iota, "slide": args.slide, "omega": args.omega, "mu": args.mu,
        "max_iterations": args.max_iterations, "external_solver": args.external_solver,
        "backend": args.backend, "format": args.format,
    }
    if getattr(args, "no_strengthen", False):
        mapping["strengthen"] = "false"
    return {k: (str(v) if v is not None else None) for k, v in mapping.items()}


def _settings(args) -> tuple[EngineConfig, dict]:
    try:
        return load_config(args.config, _overrides(args))
    except (ConfigError, OSError) as exc:
        raise CliError(f"configuration: {exc}", EXIT_PARSE) from exc


def _write_csv(path: Path, rows: list[dict], fields: Optional[list[str]] = None) -> None:
    fields = fields or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def _print_table(rows: list[dict], fields: list[str], out=None) -> None:
    if not rows:
        return
    out = out or sys.stdout
    widths = {f: max(len(f), *(len(_fmt(r.get(f))) for r in rows)) for f in fields}
    print("  ".join(f.ljust(widths[f]) for f in fields), file=out)
    for r in rows:
        print("  ".join(_fmt(r.get(f)).ljust(widths[f]) for f in fields), file=out)


# ---------------------------------------------------------------------------
# commands


def cmd_preprocess(args) -> int:
    config, run = _settings(args)
    path = Path(args.instance)
    inst = _load(path, run.get("format"))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    backend = _backend(run)
    bounds = resolve_bounds(inst, _parse_ub(args.ub))
    inst, prec, windows = preprocess(inst, bounds)
    model = build_model(inst, windows, prec)
    stem = inst.name

    rows = []
    for job in inst.jobs:
        for m, mode in enumerate(job.modes):
            lo, hi = windows.start[job.id, m]
            rows.append({"job": job.id, "mode": m, "project": job.project, "duration": mode.duration,
                         "earliest": lo, "latest": hi, "slack": hi - lo})
    _write_csv(out / f"{stem}.windows.csv", rows)

    lines = [f"instance {stem}", f"horizon {windows.horizon}", f"alpha {windows.alpha}"]
    for p in inst.projects:
        lines.append(f"project {p.id}: release {p.release} cpd {prec.cpd[p.id]} upper_bound {windows.upper_bounds[p.id]}")
    if windows.alpha == 0:
        lines.append("note: alpha = 0, all windows have zero slack; the LP bound cannot be improved by cuts")
    if config.strengthen:
        strong, coeffs = strengthen_model(model, backend, config.it, config.strengthen_time_limit or config.time_limit)
        n_changed = sum(1 for s in coeffs.rows if s.changes)
        status = {}
        for v in coeffs.periods.values():
            status[v] = status.get(v, 0) + 1
        lines.append(f"periods {' '.join(f'{k}={v}' for k, v in sorted(status.items()))}")
        lines.append(f"strengthened rows {n_changed}")
        for s in coeffs.rows:
            for (j, m), old, new in s.changes:
                proj = "" if s.project is None else f" p{s.project}"
                lines.append(f"r{s.r} t={s.t}{proj} z({j},{m},{s.t}): {old:g} -> {new:g}")
        model = strong
    value, sol = lp_bound(model, backend)
    if sol.status == INFEASIBLE:
        raise CliError("LP relaxation is infeasible", EXIT_INFEASIBLE)
    if value is None:
        raise CliError(f"LP solve failed: {sol.status}", EXIT_SOLVER)
    lines.append(f"lp_bound {value:.6f}")
    (out / f"{stem}.strengthening.txt").write_text("\n".join(lines) + "\n")
    export_lp(model, out / f"{stem}.slr.lp")
    print("\n".join(lines))
    return EXIT_OK


def _result_row(name: str, res) -> dict:
    return {"instance": name, "group": instance_group(name), "status": res.status, "lr": res.lr_value,
            "slr": res.slr_value, "bound": res.bound, "ub": res.ub_value,
            "lr_gap": "" if res.lr_gap is None else res.lr_gap, "slr_gap": "" if res.slr_gap is None else res.slr_gap,
            "gap": "" if res.gap is None else res.gap, "time": round(res.elapsed, 4),
            "iterations": max(len(res.records) - 1, 0), "cuts": len(res.pool)}


def cmd_cutplane(args) -> int:
    config, run = _settings(args)
    manifest = RunManifest([Path(p) for p in args.instances], config, Path(args.out or "."), run)
    manifest.check()
    manifest.write()
    backend = _backend(run)
    ub = _parse_ub(args.ub)
    results = []
    for path in manifest.instances:
        inst = _load(path, run.get("format"))
        res = run_cutting_plane(inst, config, ub, backend)
        if res.status == INFEASIBLE:
            raise CliError(f"{path}: LP relaxation is infeasible", EXIT_INFEASIBLE)
        if not res.records:
            raise CliError(f"{path}: LP solve failed ({res.status})", EXIT_SOLVER)
        stem = manifest.out / inst.name
        _write_csv(Path(f"{stem}.iterations.csv"), [r.as_row() for r in res.records])
        export_lp(res.model, Path(f"{stem}.final.lp"))
        Path(f"{stem}.cuts.json").write_text(json.dumps(res.cut_log, indent=1))
        row = _result_row(inst.name, res)
        _write_csv(Path(f"{stem}.result.csv"), [row], RESULT_FIELDS)
        results.append(row)
        print(f"{inst.name}: status={res.status} lr={res.lr_value:.4f} slr={res.slr_value:.4f} "
              f"bound={res.bound:.4f} gap={_fmt(res.gap)} cuts={len(res.pool)} time={res.elapsed:.2f}s")
    summary = summarize(results)
    _write_csv(manifest.out / "summary.csv", summary, SUMMARY_FIELDS)
    _print_table(summary, SUMMARY_FIELDS)
    return EXIT_OK


def cmd_ablate(args) -> int:
    config, run = _settings(args)
    paths = [Path(p) for p in args.instances]
    RunManifest(paths, config, Path(args.out or "."), run).check()
    backend = _backend(run)
    instances = [(inst.name, inst) for inst in (_load(p, run.get("format")) for p in paths)]
    families = config.families or ENGINE_FAMILIES
    rows = ablation_run(instances, config, backend, ablation_configs(config, families))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    fields = ["group", "config", "n", "failed", "gap", "gap_std", "time"]
    _write_csv(out / "ablation.csv", rows, fields)
    _print_table(rows, fields)
    return EXIT_OK


SUMMARY_FIELDS = ["group", "n", "gap", "gap_std", "time", "time_std"]


def summarize(rows: list[dict]) -> list[dict]:
    """Group means and standard deviations of gap and time; rows without a gap are left out."""
    groups: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        if r.get("gap") in ("", None):
            continue
        groups.setdefault(r["group"], []).append((float(r["gap"]), float(r["time"])))
    out = []
    for g in sorted(groups):
        gaps = [v for v, _ in groups[g]]
        times = [t for _, t in groups[g]]
        out.append({"group": g, "n": len(gaps), "gap": statistics.fmean(gaps),
                    "gap_std": statistics.pstdev(gaps) if len(gaps) > 1 else 0.0,
                    "time": statistics.fmean(times), "time_std": statistics.pstdev(times) if len(times) > 1 else 0.0})
    return out


def read_results(directory: Path) -> list[dict]:
    rows = []
    files = sorted(directory.glob("*.result.csv"))
    if not files:
        log.warning("no result files in %s", directory)
    for f in files:
        try:
            with open(f, newline="") as fh:
                rows.extend(csv.DictReader(fh))
        except OSError as exc:
            log.warning("skipping %s: %s", f, exc)
    return rows


def cmd_report(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        log.warning("%s is not a directory", directory)
        rows = []
    else:
        rows = read_results(directory)
    summary = summarize(rows)
    if args.out:
        _write_csv(Path(args.out), summary, SUMMARY_FIELDS)
    _print_table(summary, SUMMARY_FIELDS)
    return EXIT_OK


def cmd_export(args) -> int:
    config, run = _settings(args)
    inst = _load(Path(args.instance), run.get("format"))
    backend = _backend(run)
    inst, prec, windows = preprocess(inst, resolve_bounds(inst, _parse_ub(args.ub)))
    model = build_model(inst, windows, prec)
    if config.strengthen:
        model, _ = strengthen_model(model, backend, config.it, config.strengthen_time_limit or config.time_limit)
    text = export_lp(model, title=inst.name)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--format", choices=["psplib_sm", "psplib_mm", "mmlib", "mista"], help="instance format")
    p.add_argument("--families", help="comma list of LCV,LPR,CL,OH,SCG, or 'all' / 'none'")
    p.add_argument("--time-limit", type=float, help="time budget in seconds")
    p.add_argument("--it-limit", type=int, help="feasible-subset enumeration cap per period")
    p.add_argument("--max-iterations", type=int, help="cutting-plane rounds")
    p.add_argument("--eta", type=int, help="CG window width")
    p.add_argument("--iota", type=int, help="CG window step")
    p.add_argument("--slide", type=float, help="CG window slide threshold")
    p.add_argument("--omega", type=float, help="LCV violation weight")
    p.add_argument("--mu", type=float, help="LCV lifting weight")
    p.add_argument("--backend", choices=["builtin", "highs", "external"])
    p.add_argument("--external-solver", help='command template with {lp} and {sol}, e.g. "cbc {lp} solve solu {sol}"')
    p.add_argument("--no-strengthen", action="store_true", help="skip coefficient strengthening")
    p.add_argument("--ub", help="comma list of per-project upper bounds on the finish time")
    p.add_argument("--out", help="output directory (file for export/report)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcpspcuts", description="Cutting planes for time-indexed project scheduling models.",
        epilog=f"Every config key can also be set through an environment variable {ENV_PREFIX}<KEY>.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="windows, coefficient strengthening report and the SLR LP file")
    p.add_argument("instance")
    _common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("cutplane", help="run the cutting-plane loop")
    p.add_argument("instances", nargs="+")
    _common(p)
    p.set_defaults(func=cmd_cutplane)

    p = sub.add_parser("ablate", help="SLR, +family, All and -family comparison")
    p.add_argument("instances", nargs="*")
    _common(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="aggregate *.result.csv files")
    p.add_argument("directory")
    p.add_argument("--out", help="write the table as CSV")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export", help="write the (strengthened) LP model")
    p.add_argument("instance")
    _common(p)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InfeasibleBoundError, EmptyWindowError) as exc:
        print(f"error: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SolverError as exc:
        print(f"error: solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
