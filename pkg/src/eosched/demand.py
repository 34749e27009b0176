"""Synthetic customer request database."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .astro import GeodeticPoint

PRIORITY_PROBS = (0.2, 0.3, 0.3, 0.2)
AREA_RANGE_KM2 = (25.0, 2500.0)
PRICE_BASE = 400.0
PRICE_PER_KM2 = 1.2
PRIORITY_BONUS = {1: 600.0, 2: 300.0, 3: 0.0, 4: 0.0}
MAX_AGE_DAYS = 10
STEREO_PROB = 0.1


@dataclass(frozen=True)
class Request:
    request_id: int
    location: GeodeticPoint
    area: float
    priority: int
    price: float
    age: int
    stereo: bool
    uncertainty: float
    n_strips: int = 1

    def __post_init__(self):
        if self.area <= 0:
            raise ValueError("area must be positive")
        if self.priority not in (1, 2, 3, 4):
            raise ValueError(f"priority must be 1..4, got {self.priority}")
        if self.price <= 0:
            raise ValueError("price must be positive")
        if self.age < 0:
            raise ValueError("age must be non-negative")
        if not 0.0 <= self.uncertainty <= 1.0:
            raise ValueError("uncertainty must lie in [0, 1]")
        if self.n_strips < 1:
            raise ValueError("n_strips must be >= 1")
        if self.location.altitude != 0.0:
            raise ValueError("request locations sit on the ellipsoid (altitude 0)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Request":
        loc = d["location"]
        return cls(
            request_id=int(d["request_id"]),
            location=GeodeticPoint(float(loc["latitude"]), float(loc["longitude"]), float(loc.get("altitude", 0.0))),
            area=float(d["area"]),
            priority=int(d["priority"]),
            price=float(d["price"]),
            age=int(d["age"]),
            stereo=bool(d["stereo"]),
            uncertainty=float(d["uncertainty"]),
            n_strips=int(d.get("n_strips", 1)),
        )


@dataclass(frozen=True)
class PopulationCell:
    center: GeodeticPoint
    weight: float
    half_size: float = 2.5  # deg

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("cell weight must be non-negative")


def load_population_grid(path: str | os.PathLike | None = None) -> list[PopulationCell]:
    """Read the gridded population weights; defaults to the bundled 5 degree grid."""
    if path is None:
        text = resources.files("eosched.data").joinpath("population_grid.csv").read_text()
    else:
        text = Path(path).read_text()
    cells = []
    for row in csv.DictReader(text.splitlines()):
        cells.append(
            PopulationCell(
                center=GeodeticPoint(float(row["lat"]), float(row["lon"])),
                weight=float(row["weight"]),
                half_size=float(row.get("half_size_deg", 2.5)),
            )
        )
    return cells


def _cell_probabilities(grid: list[PopulationCell]) -> np.ndarray:
    w = np.array([c.weight for c in grid], dtype=float)
    if w.sum() <= 0:
        raise ValueError("population grid has zero total weight")
    return w / w.sum()


def generate_customer_db(n_requests: int, seed: int, grid: list[PopulationCell] | None = None) -> list[Request]:
    """Draw ``n_requests`` requests with locations weighted by population.

    A cell is chosen with probability proportional to its weight and the
    location is jittered uniformly over the cell's lat/lon extent. Ids run
    0..n-1 in draw order.
    """
    if n_requests <= 0:
        raise ValueError("n_requests must be >= 1")
    if grid is None:
        grid = load_population_grid()
    if not grid:
        raise ValueError("population grid is empty")
    rng = np.random.default_rng(seed)
    probs = _cell_probabilities(grid)
    cells = rng.choice(len(grid), size=n_requests, p=probs)
    u_lat = rng.uniform(-1.0, 1.0, n_requests)
    u_lon = rng.uniform(-1.0, 1.0, n_requests)
    priority = rng.choice(4, size=n_requests, p=PRIORITY_PROBS) + 1
    lo, hi = AREA_RANGE_KM2
    area = np.exp(rng.uniform(np.log(lo), np.log(hi), n_requests))
    age = rng.integers(0, MAX_AGE_DAYS + 1, n_requests)
    stereo = rng.random(n_requests) < STEREO_PROB
    uncertainty = rng.random(n_requests)

    db = []
    for k in range(n_requests):
        cell = grid[int(cells[k])]
        lat = float(np.clip(cell.center.latitude + u_lat[k] * cell.half_size, -90.0, 90.0))
        lon = float((cell.center.longitude + u_lon[k] * cell.half_size + 180.0) % 360.0 - 180.0)
        p = int(priority[k])
        a = round(float(area[k]), 3)
        db.append(
            Request(
                request_id=k,
                location=GeodeticPoint(round(lat, 6), round(lon, 6) if round(lon, 6) < 180.0 else -180.0),
                area=a,
                priority=p,
                price=round(PRICE_BASE + PRICE_PER_KM2 * a + PRIORITY_BONUS[p], 2),
                age=int(age[k]),
                stereo=bool(stereo[k]),
                uncertainty=round(float(uncertainty[k]), 6),
            )
        )
    return db


def bind_strips(db: list[Request], swath_km: float) -> list[Request]:
    """Fix ``n_strips`` for a reference swath; stereo products stay single-strip."""
    out = []
    for r in db:
        n = 1 if r.stereo else max(1, int(np.ceil(np.sqrt(r.area) / swath_km)))
        out.append(replace(r, n_strips=n))
    return out


def priority_histogram(db: list[Request]) -> tuple[int, int, int, int]:
    counts = [0, 0, 0, 0]
    for r in db:
        counts[r.priority - 1] += 1
    return tuple(counts)


def mean_priority(db: list[Request]) -> float:
    counts = priority_histogram(db)
    return sum((i + 1) * c for i, c in enumerate(counts)) / sum(counts)


def write_db(db: list[Request], path: str | os.PathLike) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w") as fh:
        for r in db:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
    tmp.replace(path)


def read_db(path: str | os.PathLike) -> list[Request]:
    out = []
    with Path(path).open() as fh:
        for line in fh:
            if line.strip():
                out.append(Request.from_dict(json.loads(line)))
    ids = [r.request_id for r in out]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate request_id in database")
    return out
