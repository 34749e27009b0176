"""Scenario and solution metrics, plus map and report exports."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from .problem import ProblemInstance, constraint_counts
from .scenario import PerformanceTable
from .solve import Schedule

ANGLE_LOW, ANGLE_HIGH = 10.0, 30.0  # degrees
CLOUD_LOW, CLOUD_HIGH = 10.0, 30.0  # percent


@dataclass(frozen=True)
class EvaluationReport:
    """Merged scenario/solution metrics. Cloud values are in percent, angles in degrees.

    Averages over an empty population are ``None``.
    """

    # scenario side
    requests: int
    attempts: int
    constraints_pairwise: int
    constraints_simplified: int
    scenario_avg_angle: float | None
    scenario_avg_area: float | None
    scenario_avg_price: float | None
    scenario_avg_sun_elev: float | None
    scenario_avg_cloud: float | None
    scenario_avg_priority: float | None
    # solution side
    acquisitions: int
    total_profit: float
    avg_cloud: float | None
    cloud_below_10: int
    cloud_above_30: int
    avg_angle: float | None
    angle_below_10: int
    angle_above_30: int
    avg_priority: float | None
    priority_1: int
    priority_2: int
    priority_3: int
    priority_4: int
    avg_sun_elev: float | None
    total_area: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        names = {f.name for f in fields(cls)}
        missing = names - set(d)
        if missing:
            raise ValueError(f"report is missing {sorted(missing)}")
        return cls(**{k: d[k] for k in names})


SCENARIO_ROWS = (
    ("Requests (#)", "requests"),
    ("Attempts (#)", "attempts"),
    ("Constraints, simplified (pairwise) (#)", "constraints"),
    ("Avg. off-nadir angle (deg)", "scenario_avg_angle"),
    ("Avg. area (km2)", "scenario_avg_area"),
    ("Avg. price", "scenario_avg_price"),
    ("Avg. sun elevation (deg)", "scenario_avg_sun_elev"),
    ("Avg. cloud cover (%)", "scenario_avg_cloud"),
    ("Avg. priority", "scenario_avg_priority"),
)

SOLUTION_ROWS = (
    ("Acquisitions (#)", "acquisitions"),
    ("Total profit", "total_profit"),
    ("Avg. cloud cover (%)", "avg_cloud"),
    ("Cloud cover < 10% (#)", "cloud_below_10"),
    ("Cloud cover > 30% (#)", "cloud_above_30"),
    ("Avg. off-nadir angle (deg)", "avg_angle"),
    ("Angle < 10 deg (#)", "angle_below_10"),
    ("Angle > 30 deg (#)", "angle_above_30"),
    ("Avg. priority", "avg_priority"),
    ("Priority 1 (#)", "priority_1"),
    ("Priority 2 (#)", "priority_2"),
    ("Priority 3 (#)", "priority_3"),
    ("Priority 4 (#)", "priority_4"),
    ("Avg. sun elevation (deg)", "avg_sun_elev"),
    ("Total area (km2)", "total_area"),
)


def _mean(xs) -> float | None:
    xs = list(xs)
    return math.fsum(xs) / len(xs) if xs else None


def evaluate(table: PerformanceTable, instance: ProblemInstance, schedule: Schedule) -> EvaluationReport:
    reqs = table.request_map()
    every = table.attempts
    counts = constraint_counts(table) if every else {"pairwise": 0, "simplified": 0}

    chosen = [table.attempts[instance.original(i)] for i in schedule.selected]
    cloud = [100.0 * a.cloud_cover for a in chosen]
    angle = [a.off_nadir for a in chosen]
    acquired = sorted({a.request_id for a in chosen})
    by_priority = [0, 0, 0, 0]
    for rid in acquired:
        by_priority[reqs[rid].priority - 1] += 1
    strips = {(a.request_id, a.strip_index) for a in chosen}
    area = math.fsum(reqs[rid].area / reqs[rid].n_strips for rid, _ in sorted(strips))

    return EvaluationReport(
        requests=len({a.request_id for a in every}),
        attempts=len(every),
        constraints_pairwise=counts["pairwise"],
        constraints_simplified=counts["simplified"],
        scenario_avg_angle=_mean(a.off_nadir for a in every),
        scenario_avg_area=_mean(reqs[a.request_id].area for a in every),
        scenario_avg_price=_mean(reqs[a.request_id].price for a in every),
        scenario_avg_sun_elev=_mean(a.sun_elev for a in every),
        scenario_avg_cloud=_mean(100.0 * a.cloud_cover for a in every),
        scenario_avg_priority=_mean(reqs[a.request_id].priority for a in every),
        acquisitions=len(chosen),
        total_profit=math.fsum(reqs[rid].price for rid in acquired),
        avg_cloud=_mean(cloud),
        cloud_below_10=sum(c < CLOUD_LOW for c in cloud),
        cloud_above_30=sum(c > CLOUD_HIGH for c in cloud),
        avg_angle=_mean(angle),
        angle_below_10=sum(x < ANGLE_LOW for x in angle),
        angle_above_30=sum(x > ANGLE_HIGH for x in angle),
        avg_priority=_mean(reqs[a.request_id].priority for a in chosen),
        priority_1=by_priority[0],
        priority_2=by_priority[1],
        priority_3=by_priority[2],
        priority_4=by_priority[3],
        avg_sun_elev=_mean(a.sun_elev for a in chosen),
        total_area=area,
    )


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def report_markdown(report: EvaluationReport) -> str:
    d = report.to_dict()
    d["constraints"] = f"{report.constraints_simplified} ({report.constraints_pairwise})"
    lines = [
        "| Scenario metric | Value | Solution metric | Value |",
        "|---|---:|---|---:|",
    ]
    for k in range(max(len(SCENARIO_ROWS), len(SOLUTION_ROWS))):
        left = SCENARIO_ROWS[k] if k < len(SCENARIO_ROWS) else None
        right = SOLUTION_ROWS[k] if k < len(SOLUTION_ROWS) else None
        cells = []
        for side in (left, right):
            cells += [side[0], _fmt(d[side[1]])] if side else ["", ""]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def export_report(report: EvaluationReport, path: str | os.PathLike, format: str = "json") -> None:
    path = Path(path)
    if format == "json":
        _atomic_write(path, json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n")
    elif format in ("markdown", "markdown-table"):
        _atomic_write(path, report_markdown(report))
    else:
        raise ValueError(f"unknown report format {format!r}")


def read_report(path: str | os.PathLike) -> EvaluationReport:
    return EvaluationReport.from_dict(json.loads(Path(path).read_text()))


# --------------------------------------------------------------------- map


def _split_antimeridian(track: list[tuple[float, float]]) -> list[list[list[float]]]:
    """Break a (lat, lon) polyline into GeoJSON [lon, lat] parts at dateline jumps."""
    parts: list[list[list[float]]] = []
    cur: list[list[float]] = []
    prev = None
    for lat, lon in track:
        if prev is not None and abs(lon - prev) > 180.0:
            if len(cur) > 1:
                parts.append(cur)
            cur = []
        cur.append([round(lon, 6), round(lat, 6)])
        prev = lon
    if len(cur) > 1:
        parts.append(cur)
    return parts


def _feature(geom: dict, kind: str, request_id=None, attempt_id=None, selected=False, **extra) -> dict:
    props = {"kind": kind, "request_id": request_id, "attempt_id": attempt_id, "selected": selected}
    props.update(extra)
    return {"type": "Feature", "geometry": geom, "properties": props}


def _point(lat: float, lon: float) -> dict:
    return {"type": "Point", "coordinates": [round(lon, 6), round(lat, 6)]}


def map_features(table: PerformanceTable, schedule: Schedule | None = None, instance: ProblemInstance | None = None) -> dict:
    """GeoJSON FeatureCollection with track, request, attempt and acquisition features."""
    reqs = table.request_map()
    feats = []
    for sat, track in sorted(table.tracks.items()):
        parts = _split_antimeridian(track)
        geom = {"type": "MultiLineString", "coordinates": parts}
        feats.append(_feature(geom, "track", satellite=sat))
    for r in table.requests:
        feats.append(
            _feature(
                _point(r.location.latitude, r.location.longitude),
                "request",
                request_id=r.request_id,
                priority=r.priority,
                area=r.area,
                price=r.price,
                stereo=r.stereo,
            )
        )
    selected = set(schedule.selected) if schedule else set()
    originals = {instance.original(i) if instance else i: i for i in selected}
    for a in table.attempts:
        loc = reqs[a.request_id].location
        feats.append(
            _feature(
                _point(loc.latitude, loc.longitude),
                "attempt",
                request_id=a.request_id,
                attempt_id=a.attempt_id,
                selected=a.attempt_id in originals,
                satellite=a.satellite,
                time=a.t_clock.strftime("%Y-%m-%dT%H:%M:%SZ"),
                off_nadir=round(a.off_nadir, 3),
                cloud_pct=round(100.0 * a.cloud_cover, 2),
                role=a.stereo_role,
            )
        )
    for col in sorted(selected):
        a = table.attempts[instance.original(col) if instance else col]
        loc = reqs[a.request_id].location
        feats.append(
            _feature(
                _point(loc.latitude, loc.longitude),
                "acquisition",
                request_id=a.request_id,
                attempt_id=a.attempt_id,
                selected=True,
                column=col,
                satellite=a.satellite,
                time=a.t_clock.strftime("%Y-%m-%dT%H:%M:%SZ"),
            )
        )
    return {"type": "FeatureCollection", "features": feats}


def request_features(requests) -> dict:
    feats = [
        _feature(_point(r.location.latitude, r.location.longitude), "request", request_id=r.request_id, priority=r.priority, area=r.area)
        for r in requests
    ]
    return {"type": "FeatureCollection", "features": feats}


def _background() -> list[list[float]]:
    from .demand import load_population_grid

    cells = [c for c in load_population_grid() if c.weight > 0]
    top = max((c.weight for c in cells), default=1.0)
    return [[c.center.latitude, c.center.longitude, c.half_size, round(c.weight / top, 4)] for c in cells]


def render_html(collection: dict, title: str = "eosched", reproducible: bool = False) -> str:
    script = resources.files("eosched.data").joinpath("mapview.js").read_text(encoding="utf-8")
    stamp = "" if reproducible else datetime.now(timezone.utc).strftime("generated %Y-%m-%d %H:%M:%SZ")
    data = json.dumps(collection, sort_keys=True, separators=(",", ":"))
    bg = json.dumps(_background(), separators=(",", ":"))
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>{title}</title>\n<style>\n"
        "html,body{margin:0;height:100%;font:13px sans-serif}"
        "#map{position:absolute;inset:0}"
        "#panel{position:absolute;top:8px;right:8px;background:#fffe;padding:6px 10px;border-radius:4px}"
        "#tip{position:absolute;pointer-events:none;background:#222d;color:#fff;padding:4px 6px;border-radius:3px;display:none;white-space:pre}"
        "\n</style></head><body>\n<canvas id=\"map\"></canvas><div id=\"panel\"></div><div id=\"tip\"></div>\n"
        f"<script>const EOS_DATA={data};const EOS_BACKGROUND={bg};const EOS_STAMP={json.dumps(stamp)};</script>\n"
        f"<script>\n{script}\n</script>\n</body></html>\n"
    )


def export_map(
    table: PerformanceTable,
    schedule: Schedule | None,
    path: str | os.PathLike,
    instance: ProblemInstance | None = None,
    reproducible: bool = False,
) -> tuple[Path, Path]:
    """Write ``path`` (HTML) and a GeoJSON sidecar next to it; returns both paths."""
    return export_collection(map_features(table, schedule, instance), path, reproducible=reproducible)


def export_collection(collection: dict, path: str | os.PathLike, reproducible: bool = False) -> tuple[Path, Path]:
    html = Path(path)
    if html.suffix != ".html":
        html = html.with_suffix(".html")
    geo = html.with_suffix(".geojson")
    _atomic_write(geo, json.dumps(collection, sort_keys=True, indent=1) + "\n")
    _atomic_write(html, render_html(collection, html.stem, reproducible))
    return html, geo
