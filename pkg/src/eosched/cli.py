"""Command-line pipeline: customer-db, scenario, solve, visualize, evaluate, all.

Stages hand off through files. A scenario *bundle* is a directory holding
the performance table (JSON and a columnar .npz cache), the assembled
problem instance and a small ``bundle.json`` with its id and settings.

Exit codes: 0 success, 2 usage, 3 input validation, 4 refused combination,
5 I/O failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .astro import SatelliteSpec, TLEError, load_tles
from .demand import generate_customer_db, read_db, write_db
from .problem import assemble, instance_from_dict, instance_to_json
from .scenario import (
    CloudSource,
    Horizon,
    PerformanceTable,
    enumerate_attempts,
    read_table,
    write_columnar_cache,
    write_table,
)
from .scoring import METHODS as SCORING_METHODS
from .scoring import PreferenceModel, ScoringError, attach_scores, load_preferences, score

log = logging.getLogger("eosched")

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_REFUSED, EXIT_IO = 0, 2, 3, 4, 5
SOLVERS = ("greedy", "elpa", "exact")
BUNDLE_SCHEMA = "eosched.bundle"


class InvalidInput(Exception):
    pass


class Refused(Exception):
    pass


@dataclass
class RunConfig:
    seed: int = 1
    n_requests: int = 300
    norad_ids: list[int] = field(default_factory=lambda: [38755, 40053])
    tle_file: str | None = None
    start: str = "2024-10-17T09:40:00"
    hours: float = 8.0
    granularity: float = 10.0
    rotation_speed: float = 1.5
    swath: float = 60.0
    max_off_nadir: float = 30.0
    memory_capacity: float = 163840.0
    resolution: float = 2.25
    cloud_mode: str = "synthetic"
    cloud_endpoint: str | None = None
    scoring: str = "electre3"
    preferences: dict | None = None
    solver: str = "elpa"
    time_limit: float = 60.0
    simplify: bool = False
    keep_all_steps: bool = False
    reproducible: bool = False

    def validate(self, check_simplify: bool = True) -> None:
        if self.n_requests < 0:
            raise InvalidInput("n_requests must be >= 0")
        if not self.norad_ids:
            raise InvalidInput("at least one NORAD id is required")
        if self.scoring not in SCORING_METHODS:
            raise InvalidInput(f"unknown scoring method {self.scoring!r}")
        if self.solver not in SOLVERS:
            raise InvalidInput(f"unknown solver {self.solver!r}")
        if check_simplify and self.simplify and self.solver != "elpa":
            raise Refused("simplified maneuver rows over-constrain the program; only the elpa solver accepts them")
        self.horizon()

    def horizon(self) -> Horizon:
        try:
            start = datetime.fromisoformat(self.start.replace("Z", "+00:00"))
        except ValueError as e:
            raise InvalidInput(f"bad start time {self.start!r}") from e
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)
        try:
            return Horizon(start, self.hours, self.granularity)
        except ValueError as e:
            raise InvalidInput(str(e)) from e

    def satellite_specs(self) -> list[SatelliteSpec]:
        return [
            SatelliteSpec(
                norad_id=int(n),
                rotation_speed=self.rotation_speed,
                swath=self.swath,
                max_off_nadir=self.max_off_nadir,
                memory_capacity=self.memory_capacity,
                resolution=self.resolution,
            )
            for n in self.norad_ids
        ]

    def prefs(self) -> PreferenceModel:
        try:
            return PreferenceModel.from_dict(self.preferences) if self.preferences else PreferenceModel()
        except (ScoringError, TypeError) as e:
            raise InvalidInput(f"bad preference model: {e}") from e


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < explicit flags."""
    values: dict = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as e:
            raise InvalidInput(f"config file is not valid JSON: {e}") from e
        unknown = set(raw) - _CONFIG_FIELDS
        if unknown:
            raise InvalidInput(f"unknown config keys {sorted(unknown)}")
        values.update(raw)
    for name in _CONFIG_FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if getattr(args, "prefs", None):
        values["preferences"] = load_preferences(args.prefs).to_dict()
    try:
        return RunConfig(**values)
    except TypeError as e:
        raise InvalidInput(str(e)) from e


# ------------------------------------------------------------------ helpers


def _replace_dir(tmp: Path, out: Path) -> None:
    if out.exists():
        old = out.with_name(out.name + ".old")
        if old.exists():
            shutil.rmtree(old)
        out.rename(old)
        tmp.rename(out)
        shutil.rmtree(old)
    else:
        tmp.rename(out)


def _write_json(path: Path, obj) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")
    tmp.replace(path)


def load_bundle(path: str | Path):
    """Return ``(meta, table, instance)`` for a scenario bundle directory."""
    path = Path(path)
    meta_file = path / "bundle.json"
    if not meta_file.is_file():
        raise FileNotFoundError(f"{path} is not a scenario bundle (no bundle.json)")
    meta = json.loads(meta_file.read_text())
    if meta.get("schema") != BUNDLE_SCHEMA:
        raise InvalidInput(f"{meta_file} is not a bundle descriptor")
    table = read_table(path / "table.json")
    if table.fingerprint() != meta["bundle_id"]:
        raise InvalidInput("bundle table does not match its recorded id")
    try:
        inst = instance_from_dict(json.loads((path / "instance.json").read_text()), table)
    except ValueError as e:
        raise InvalidInput(str(e)) from e
    return meta, table, inst


def _load_solution(path, bundle_id: str):
    from .solve import read_solution

    sched, sid = read_solution(path)
    if sid != bundle_id:
        raise InvalidInput(f"solution belongs to bundle {sid!r}, not {bundle_id!r}")
    return sched


# ----------------------------------------------------------------- commands


def cmd_customer_db(cfg: RunConfig, out: Path, map_path: Path | None = None) -> Path:
    db = generate_customer_db(cfg.n_requests, cfg.seed)
    write_db(db, out)
    if map_path is not None:
        from .report import export_collection, request_features

        export_collection(request_features(db), map_path, reproducible=cfg.reproducible)
    log.info("wrote %d requests to %s", len(db), out)
    return out


def cmd_scenario(cfg: RunConfig, db_path: Path, out: Path) -> Path:
    cfg.validate()
    db = read_db(db_path)
    specs = cfg.satellite_specs()
    horizon = cfg.horizon()
    if not db:
        log.warning("customer database %s is empty; writing an empty bundle", db_path)
        table = PerformanceTable([], horizon, specs)
    else:
        try:
            tles = load_tles(cfg.norad_ids, cfg.tle_file)
        except KeyError as e:
            raise InvalidInput(f"no TLE for NORAD id {e.args[0]}") from e
        clouds = CloudSource(cfg.cloud_mode, cfg.seed, cfg.cloud_endpoint)
        table = enumerate_attempts(db, list(zip(tles, specs)), horizon, clouds, keep_all_steps=cfg.keep_all_steps)
    inst = assemble(table, simplify=cfg.simplify)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=out.name + ".", dir=out.parent))
    tmp.chmod(0o755)
    try:
        write_table(table, tmp / "table.json")
        write_columnar_cache(table, tmp / "table.npz")
        (tmp / "instance.json").write_text(instance_to_json(inst))
        meta = {
            "schema": BUNDLE_SCHEMA,
            "version": __version__,
            "bundle_id": table.fingerprint(),
            "simplify": cfg.simplify,
            "keep_all_steps": cfg.keep_all_steps,
            "requests": len({a.request_id for a in table.attempts}),
            "attempts": len(table.attempts),
            "columns": inst.n,
            "constraints": inst.n_constraints,
        }
        _write_json(tmp / "bundle.json", meta)
        _replace_dir(tmp, out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    log.info("bundle %s: %d attempts, %d constraints", meta["bundle_id"], meta["attempts"], meta["constraints"])
    return out


def cmd_solve(cfg: RunConfig, bundle: Path, out: Path, lp_path: Path | None = None):
    from .solve import export_lp, solve, write_solution

    cfg.validate(check_simplify=False)  # the bundle decides
    meta, table, inst = load_bundle(bundle)
    if inst.simplify and cfg.solver != "elpa":
        raise Refused(f"bundle {bundle} uses simplified maneuver rows; solver {cfg.solver!r} needs a pairwise bundle (rebuild without --simplify)")
    inst = attach_scores(inst, score(table, cfg.scoring, cfg.prefs()))
    if lp_path is not None:
        export_lp(inst, lp_path)
    sched = solve(inst, cfg.solver, seed=cfg.seed, time_limit=cfg.time_limit)
    write_solution(sched, out, bundle_id=meta["bundle_id"], reproducible=cfg.reproducible)
    log.info("%s: %d acquisitions, objective %.4f, %.3f s", cfg.solver, len(sched.selected), sched.objective, sched.runtime)
    return sched


def cmd_visualize(cfg: RunConfig, bundle: Path, solution: Path, out: Path):
    from .figures import plot_map
    from .report import export_map

    meta, table, inst = load_bundle(bundle)
    sched = _load_solution(solution, meta["bundle_id"])
    html, geo = export_map(table, sched, out, instance=inst, reproducible=cfg.reproducible)
    png = plot_map(table, sched, html.with_suffix(".png"), instance=inst)
    return html, geo, png


def cmd_evaluate(cfg: RunConfig, bundle: Path, solution: Path, out: Path):
    from .figures import plot_criteria
    from .report import evaluate, export_report, report_markdown

    meta, table, inst = load_bundle(bundle)
    sched = _load_solution(solution, meta["bundle_id"])
    report = evaluate(table, inst, sched)
    out = out.with_suffix("") if out.suffix in (".json", ".md") else out
    json_path, md_path = out.with_name(out.name + ".json"), out.with_name(out.name + ".md")
    export_report(report, json_path, "json")
    export_report(report, md_path, "markdown")
    plot_criteria(table, sched, out.with_name(out.name + "_criteria.png"), instance=inst)
    print(report_markdown(report), end="")
    return report


def cmd_all(cfg: RunConfig, out: Path):
    cfg.validate()
    out.mkdir(parents=True, exist_ok=True)
    cmd_customer_db(cfg, out / "db.jsonl", out / "all_requests.html")
    cmd_scenario(cfg, out / "db.jsonl", out / "bundle")
    cmd_solve(cfg, out / "bundle", out / "solution.json", out / "instance.lp")
    cmd_visualize(cfg, out / "bundle", out / "solution.json", out / "map.html")
    cmd_evaluate(cfg, out / "bundle", out / "solution.json", out / "report")
    _write_json(out / "run_config.json", dataclasses.asdict(cfg))
    return out


# ------------------------------------------------------------------- parser


def _add_config_flags(p: argparse.ArgumentParser, groups: tuple[str, ...]) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--reproducible", action="store_const", const=True, help="omit wall-clock values from outputs")
    if "db" in groups:
        p.add_argument("--n", dest="n_requests", type=int, help="number of requests")
    if "scenario" in groups:
        p.add_argument("--norad", dest="norad_ids", type=int, nargs="+", metavar="ID")
        p.add_argument("--tle-file", dest="tle_file", help="TLE file to use instead of the bundled elements")
        p.add_argument("--start", help="horizon start, ISO 8601 (UTC if no offset)")
        p.add_argument("--hours", type=float)
        p.add_argument("--granularity", type=float, help="time step in seconds")
        p.add_argument("--rotation-speed", dest="rotation_speed", type=float, help="deg/s")
        p.add_argument("--swath", type=float, help="km")
        p.add_argument("--max-off-nadir", dest="max_off_nadir", type=float)
        p.add_argument("--memory", dest="memory_capacity", type=float, help="MB per satellite")
        p.add_argument("--resolution", type=float, help="m per pixel")
        p.add_argument("--cloud-mode", dest="cloud_mode", choices=("synthetic", "http_point_forecast"))
        p.add_argument("--cloud-endpoint", dest="cloud_endpoint")
        p.add_argument("--simplify", action="store_const", const=True)
        p.add_argument("--keep-all-steps", dest="keep_all_steps", action="store_const", const=True,
                       help="keep every time step of a visibility window instead of its best step")
    if "solve" in groups:
        p.add_argument("--method", dest="solver", choices=SOLVERS)
        p.add_argument("--scoring", choices=SCORING_METHODS)
        p.add_argument("--prefs", help="JSON preference model (weights, q, p, v, directions)")
        p.add_argument("--time-limit", dest="time_limit", type=float, help="seconds, exact solver only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eosched", allow_abbrev=False, description="Earth observation satellite acquisition scheduling.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("customer-db", allow_abbrev=False, help="generate a synthetic request database")
    _add_config_flags(p, ("db",))
    p.add_argument("--out", type=Path, default=Path("db.jsonl"))
    p.add_argument("--map", type=Path, help="also write an all-requests HTML map here")

    p = sub.add_parser("scenario", allow_abbrev=False, help="enumerate attempts and assemble the program")
    _add_config_flags(p, ("scenario",))
    p.add_argument("--db", type=Path, required=True)
    p.add_argument("--out", type=Path, default=Path("bundle"))

    p = sub.add_parser("solve", allow_abbrev=False, help="score attempts and solve a bundle")
    _add_config_flags(p, ("solve",))
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--out", type=Path, default=Path("solution.json"))
    p.add_argument("--lp", type=Path, help="also export the scored program in LP format")

    for name, text in (("visualize", "write the HTML/GeoJSON map and PNG"), ("evaluate", "write the metrics report")):
        p = sub.add_parser(name, allow_abbrev=False, help=text)
        _add_config_flags(p, ())
        p.add_argument("--bundle", type=Path, required=True)
        p.add_argument("--solution", type=Path, required=True)
        p.add_argument("--out", type=Path, default=Path("map.html" if name == "visualize" else "report"))

    p = sub.add_parser("all", allow_abbrev=False, help="run every stage into one directory")
    _add_config_flags(p, ("db", "scenario", "solve"))
    p.add_argument("--out", type=Path, default=Path("eosched_run"))
    return parser


def run(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    if args.command == "customer-db":
        cmd_customer_db(cfg, args.out, args.map)
    elif args.command == "scenario":
        cmd_scenario(cfg, args.db, args.out)
    elif args.command == "solve":
        cmd_solve(cfg, args.bundle, args.out, args.lp)
    elif args.command == "visualize":
        cmd_visualize(cfg, args.bundle, args.solution, args.out)
    elif args.command == "evaluate":
        cmd_evaluate(cfg, args.bundle, args.solution, args.out)
    elif args.command == "all":
        cmd_all(cfg, args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except Refused as e:
        print(f"eosched: refused: {e}", file=sys.stderr)
        return EXIT_REFUSED
    except (InvalidInput, TLEError, ScoringError, ValueError) as e:
        print(f"eosched: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"eosched: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
