"""Static PNG figures rendered next to the report files."""
from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .problem import ProblemInstance  # noqa: E402
from .scenario import PerformanceTable  # noqa: E402
from .solve import Schedule  # noqa: E402

_META = {"Software": None}  # keep PNG bytes independent of the matplotlib version


def _selected_attempts(table: PerformanceTable, schedule: Schedule, instance: ProblemInstance | None):
    cols = schedule.selected if schedule else ()
    return [table.attempts[instance.original(c) if instance else c] for c in cols]


def plot_map(table: PerformanceTable, schedule: Schedule | None, path: str | os.PathLike, instance: ProblemInstance | None = None) -> Path:
    reqs = table.request_map()
    fig, ax = plt.subplots(figsize=(11, 5.5))
    for sat, track in sorted(table.tracks.items()):
        lat = [p[0] for p in track]
        lon = [p[1] for p in track]
        # break the line at dateline crossings
        for k in range(1, len(lon)):
            if abs(lon[k] - lon[k - 1]) > 180:
                lon[k - 1] = float("nan")
        ax.plot(lon, lat, lw=0.8, label=f"track {sat}")
    ax.scatter(
        [r.location.longitude for r in table.requests],
        [r.location.latitude for r in table.requests],
        s=6, c="#3465a4", label="requests",
    )
    seen = {a.request_id for a in table.attempts}
    ax.scatter(
        [reqs[r].location.longitude for r in seen],
        [reqs[r].location.latitude for r in seen],
        s=22, c="#edd400", edgecolors="k", linewidths=0.3, label="attempts",
    )
    chosen = _selected_attempts(table, schedule, instance)
    if chosen:
        ax.scatter(
            [reqs[a.request_id].location.longitude for a in chosen],
            [reqs[a.request_id].location.latitude for a in chosen],
            s=40, c="#4e9a06", edgecolors="k", linewidths=0.4, label="acquisitions",
        )
    ax.set_xlim(-180, 180)
    ax.set_ylim(-90, 90)
    ax.set_aspect("equal")
    ax.set_xlabel("longitude (deg)")
    ax.set_ylabel("latitude (deg)")
    ax.grid(alpha=0.3)
    ax.legend(loc="lower left", fontsize=8)
    path = Path(path)
    fig.savefig(path, dpi=110, bbox_inches="tight", metadata=_META)
    plt.close(fig)
    return path


def plot_criteria(table: PerformanceTable, schedule: Schedule | None, path: str | os.PathLike, instance: ProblemInstance | None = None) -> Path:
    """Histograms of off-nadir, sun elevation and cloud cover: all attempts vs. selected."""
    chosen = _selected_attempts(table, schedule, instance)
    panels = (
        ("off-nadir angle (deg)", lambda a: a.off_nadir),
        ("sun elevation (deg)", lambda a: a.sun_elev),
        ("cloud cover (%)", lambda a: 100.0 * a.cloud_cover),
    )
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    for ax, (label, get) in zip(axes, panels):
        all_vals = [get(a) for a in table.attempts]
        if all_vals:
            lo, hi = min(all_vals), max(all_vals)
            bins = 15 if hi > lo else 1
            ax.hist(all_vals, bins=bins, range=(lo, hi if hi > lo else lo + 1), alpha=0.5, label="attempts")
            if chosen:
                ax.hist([get(a) for a in chosen], bins=bins, range=(lo, hi if hi > lo else lo + 1), alpha=0.7, label="selected")
        ax.set_xlabel(label)
        if all_vals:
            ax.legend(fontsize=8)
    axes[0].set_ylabel("count")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path
