"""Horizon discretisation and enumeration of feasible imaging attempts.

The output is the performance table: one row per candidate acquisition
(satellite, start time, geometry, quality criteria). Rows pass the three
quality gates (off-nadir, sun elevation, cloud cover) by construction.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from . import astro
from .astro import EphemerisSample, GeodeticPoint, SatelliteSpec, TwoLineElement
from .demand import Request, bind_strips
from .weather import PointForecastClient, WeatherError

log = logging.getLogger(__name__)

MIN_SUN_ELEVATION = 15.0
MAX_CLOUD_COVER = 0.60
STEREO_CONVERGENCE = (15.0, 20.0)
BYTES_PER_PIXEL = 2
MIN_ACQ_SECONDS = 1.0
MAX_HORIZON_STEPS = 10**7
TRACK_SAMPLE_SECONDS = 60.0
SCHEMA = "eosched.performance_table"
SCHEMA_VERSION = 1

ROLES = ("mono", "stereo_first", "stereo_second")
CRITERIA = ("area", "off_nadir", "sun_elev", "cloud_cover", "priority", "price", "age", "uncertainty")


@dataclass(frozen=True)
class Horizon:
    start: datetime
    duration: float  # hours
    granularity: float = 10.0  # seconds

    def __post_init__(self):
        if self.start.tzinfo is None:
            raise ValueError("horizon start must be timezone-aware")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.granularity < 1:
            raise ValueError("granularity must be >= 1 s")
        if self.duration * 3600.0 / self.granularity > MAX_HORIZON_STEPS:
            raise ValueError("horizon has too many time steps")

    @property
    def end(self) -> datetime:
        return self.start + timedelta(hours=self.duration)

    def step_offsets(self) -> np.ndarray:
        n = int(math.floor(self.duration * 3600.0 / self.granularity + 1e-9))
        return np.arange(n + 1, dtype=float) * self.granularity


@dataclass(frozen=True)
class Attempt:
    attempt_id: int
    request_id: int
    satellite: int
    strip_index: int
    stereo_role: str
    t_clock: datetime
    acq_duration: float
    los: tuple[float, float, float]
    off_nadir: float
    sun_elev: float
    cloud_cover: float
    memory_mb: float
    criteria: tuple[float, ...]

    @property
    def t_unix(self) -> float:
        return self.t_clock.timestamp()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["t_clock"] = _iso(self.t_clock)
        d["los"] = list(self.los)
        d["criteria"] = list(self.criteria)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Attempt":
        return cls(
            attempt_id=int(d["attempt_id"]),
            request_id=int(d["request_id"]),
            satellite=int(d["satellite"]),
            strip_index=int(d["strip_index"]),
            stereo_role=d["stereo_role"],
            t_clock=_parse_iso(d["t_clock"]),
            acq_duration=float(d["acq_duration"]),
            los=tuple(float(x) for x in d["los"]),
            off_nadir=float(d["off_nadir"]),
            sun_elev=float(d["sun_elev"]),
            cloud_cover=float(d["cloud_cover"]),
            memory_mb=float(d["memory_mb"]),
            criteria=tuple(float(x) for x in d["criteria"]),
        )


@dataclass(frozen=True)
class CloudSource:
    mode: str = "synthetic"
    seed: int = 0
    endpoint: str | None = None
    key_env: str = "EOSCHED_WEATHER_API_KEY"

    def __post_init__(self):
        if self.mode not in ("synthetic", "http_point_forecast"):
            raise ValueError(f"unknown cloud mode {self.mode!r}")
        if self.mode == "http_point_forecast" and not self.endpoint:
            raise ValueError("http_point_forecast needs an endpoint")


@dataclass
class PerformanceTable:
    attempts: list[Attempt]
    horizon: Horizon
    satellites: list[SatelliteSpec]
    requests: list[Request] = field(default_factory=list)
    stereo_pairs: list[tuple[int, int]] = field(default_factory=list)
    tracks: dict[int, list[tuple[float, float]]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.attempts)

    def spec_for(self, norad_id: int) -> SatelliteSpec:
        for s in self.satellites:
            if s.norad_id == norad_id:
                return s
        raise KeyError(norad_id)

    def request_map(self) -> dict[int, Request]:
        return {r.request_id: r for r in self.requests}

    def fingerprint(self) -> str:
        return hashlib.sha256(table_to_json(self).encode()).hexdigest()[:16]


def _iso(t: datetime) -> str:
    return t.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _parse_iso(s: str) -> datetime:
    return datetime.strptime(s.replace("Z", ""), "%Y-%m-%dT%H:%M:%S.%f").replace(tzinfo=timezone.utc)


# ------------------------------------------------------------ small models


def strip_count(req: Request, spec: SatelliteSpec) -> int:
    """Square-root sizing: the request is treated as a square of side sqrt(area)."""
    return max(1, math.ceil(math.sqrt(req.area) / spec.swath))


def acquisition_duration(req: Request, spec: SatelliteSpec, sample: EphemerisSample) -> float:
    if sample.ground_speed <= 0:
        raise ValueError("ground speed must be positive")
    n = 1 if req.stereo else strip_count(req, spec)
    return _acq_seconds(req.area, n, sample.ground_speed)


def _acq_seconds(area, n_strips, ground_speed):
    return np.maximum(np.sqrt(area) / n_strips / ground_speed, MIN_ACQ_SECONDS)


def memory_usage(spec: SatelliteSpec) -> float:
    """MB for one uncompressed swath-by-swath image."""
    pixels = spec.swath**2 * 1e6 / spec.resolution
    return pixels * BYTES_PER_PIXEL / 2**20


# ------------------------------------------------------------------ clouds

_NOISE_LAT_STEP = 7.5
_NOISE_LON_STEP = 7.5
_NOISE_TIME_STEP = 6 * 3600.0
_NOISE_AMPLITUDE = 0.25
_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _hash_uniform(i, j, k, seed):
    """SplitMix64 over integer lattice coordinates -> uniform [0, 1)."""
    with np.errstate(over="ignore"):
        x = (
            np.asarray(i, dtype=np.int64).astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
            ^ np.asarray(j, dtype=np.int64).astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
            ^ np.asarray(k, dtype=np.int64).astype(np.uint64) * np.uint64(0x165667B19E3779F9)
            ^ np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * np.uint64(0xD6E8FEB86659FD93)
        )
        x = x + np.uint64(0x9E3779B97F4A7C15)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        x = x ^ (x >> np.uint64(31))
    return (x >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def cloud_climatology(lat_deg):
    lat = np.radians(lat_deg)
    return np.clip(0.55 - 0.15 * np.cos(2 * lat) + 0.10 * np.cos(6 * lat), 0.1, 0.8)


def synthetic_cloud_array(lat_deg, lon_deg, unix_t, seed: int):
    """Latitude climatology plus seeded trilinear value noise in (lat, lon, time)."""
    lat = np.asarray(lat_deg, dtype=float)
    lon = np.asarray(lon_deg, dtype=float)
    t = np.asarray(unix_t, dtype=float)
    lat, lon, t = np.broadcast_arrays(lat, lon, t)
    u = (lat + 90.0) / _NOISE_LAT_STEP
    v = np.mod(lon + 180.0, 360.0) / _NOISE_LON_STEP
    w = t / _NOISE_TIME_STEP
    i0, j0, k0 = np.floor(u), np.floor(v), np.floor(w)
    fu, fv, fw = u - i0, v - j0, w - k0
    fu, fv, fw = (f * f * (3 - 2 * f) for f in (fu, fv, fw))
    nlon = int(round(360.0 / _NOISE_LON_STEP))
    total = np.zeros(lat.shape)
    for di in (0, 1):
        wu = fu if di else 1 - fu
        for dj in (0, 1):
            wv = fv if dj else 1 - fv
            jj = np.mod(j0 + dj, nlon)
            for dk in (0, 1):
                wk = fw if dk else 1 - fw
                total = total + wu * wv * wk * _hash_uniform(i0 + di, jj, k0 + dk, seed)
    return np.clip(cloud_climatology(lat) + _NOISE_AMPLITUDE * (2.0 * total - 1.0), 0.0, 1.0)


def synthetic_cloud(loc: GeodeticPoint, t: datetime, seed: int) -> float:
    return float(synthetic_cloud_array(loc.latitude, loc.longitude, t.timestamp(), seed))


def cloud_function(source: CloudSource):
    """Vectorised cloud lookup ``f(lat, lon, unix_t) -> fractions`` for a source."""
    if source.mode == "synthetic":
        return lambda lat, lon, t: synthetic_cloud_array(lat, lon, t, source.seed)

    client = PointForecastClient(source.endpoint, key_env=source.key_env)
    warned = []

    def lookup(lat, lon, t):
        lat, lon, t = np.broadcast_arrays(np.asarray(lat, float), np.asarray(lon, float), np.asarray(t, float))
        out = np.empty(lat.shape)
        for idx in np.ndindex(lat.shape):
            try:
                out[idx] = client.cloud_cover(lat[idx], lon[idx], t[idx])
            except WeatherError as exc:
                if not warned:
                    log.warning("weather service unavailable, falling back to synthetic clouds: %s", exc)
                    warned.append(True)
                out[idx] = synthetic_cloud_array(lat[idx], lon[idx], t[idx], source.seed)
        return out

    return lookup


# ------------------------------------------------------------- enumeration


def _split_jd(unix_t: np.ndarray):
    days = unix_t / 86400.0
    whole = np.floor(days)
    return 2440587.5 + whole, days - whole


def _normalize(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _max_ground_range(max_off_nadir: float, altitude: float) -> float:
    eta = math.radians(max_off_nadir)
    rho = (astro.MEAN_EARTH_RADIUS + altitude) / astro.MEAN_EARTH_RADIUS
    s = rho * math.sin(eta)
    lam = math.pi / 2 - eta if s >= 1.0 else math.asin(s) - eta
    return lam * astro.MEAN_EARTH_RADIUS


def _targets(db: list[Request]):
    """One ground point per (request, strip); strips are offset east-west."""
    lat, lon, owner, strip = [], [], [], []
    for k, r in enumerate(db):
        n = r.n_strips
        width = math.sqrt(r.area) / n
        for s in range(n):
            offset = (s - (n - 1) / 2.0) * width
            if offset == 0.0:
                p = (r.location.latitude, r.location.longitude)
            else:
                p = astro.destination_point(r.location.latitude, r.location.longitude, 90.0, offset)
            lat.append(p[0])
            lon.append(p[1])
            owner.append(k)
            strip.append(s)
    return np.array(lat), np.array(lon), np.array(owner, dtype=int), np.array(strip, dtype=int)


def _runs(steps: np.ndarray) -> list[np.ndarray]:
    """Split sorted step indices into maximal runs of consecutive steps."""
    if steps.size == 0:
        return []
    cut = np.nonzero(np.diff(steps) != 1)[0] + 1
    return np.split(np.arange(steps.size), cut)


def _satellite_records(
    tle: TwoLineElement,
    spec: SatelliteSpec,
    db: list[Request],
    targets,
    horizon: Horizon,
    clouds,
    keep_all_steps: bool,
    max_tle_age_days: float,
):
    offsets = horizon.step_offsets()
    t0 = horizon.start.timestamp()
    unix_t = t0 + offsets
    for edge in (horizon.start, horizon.end):
        if abs((edge - tle.epoch).total_seconds()) > max_tle_age_days * 86400.0:
            raise astro.PropagationError(
                f"horizon edge {edge.isoformat()} is outside the validity of the TLE for {tle.norad_id}"
            )
    jd, fr = _split_jd(unix_t)
    err, r_teme, v_teme = astro.propagate_arrays(tle, jd, fr)
    if np.any(err != 0) or not np.all(np.isfinite(r_teme)):
        raise astro.PropagationError(f"SGP4 failed for {tle.norad_id} (codes {sorted(set(err.tolist()))})")
    theta = astro.gmst(jd + fr)
    r_ecef = astro.teme_to_ecef(r_teme, theta)
    sub_lat, sub_lon, sub_alt = astro.ecef_to_geodetic(r_ecef)
    if np.any(sub_alt <= 0):
        raise astro.DecayedOrbitError(f"satellite {tle.norad_id} below ground during horizon")
    ground = astro.geodetic_to_ecef(sub_lat, sub_lon, 0.0)
    nadir = _normalize(ground - r_ecef)
    gspeed = astro.ground_speed_from_state(r_teme, v_teme, astro.ecef_to_teme(ground, theta))

    stride = max(1, int(round(TRACK_SAMPLE_SECONDS / horizon.granularity)))
    track = [(float(a), float(b)) for a, b in zip(sub_lat[::stride], sub_lon[::stride])]

    tlat, tlon, owner, strip = targets
    tecef = astro.geodetic_to_ecef(tlat, tlon, 0.0)
    limit = 1.1 * _max_ground_range(spec.max_off_nadir, float(sub_alt.max())) + 5.0

    cand_t, cand_k = [], []
    chunk = max(1, 2_000_000 // max(1, tlat.size))
    for a in range(0, unix_t.size, chunk):
        b = min(unix_t.size, a + chunk)
        d = astro.great_circle_km(sub_lat[a:b, None], sub_lon[a:b, None], tlat[None, :], tlon[None, :])
        ti, ki = np.nonzero(d < limit)
        cand_t.append(ti + a)
        cand_k.append(ki)
    ti = np.concatenate(cand_t) if cand_t else np.empty(0, int)
    ki = np.concatenate(cand_k) if cand_k else np.empty(0, int)

    los_ecef = _normalize(tecef[ki] - r_ecef[ti])
    off = astro.angle_between(nadir[ti], los_ecef)
    keep = off <= spec.max_off_nadir
    ti, ki, off, los_ecef = ti[keep], ki[keep], off[keep], los_ecef[keep]
    sun = astro.sun_elevation_arrays(tlat[ki], tlon[ki], jd[ti] + fr[ti])
    keep = sun >= MIN_SUN_ELEVATION
    ti, ki, off, los_ecef, sun = ti[keep], ki[keep], off[keep], los_ecef[keep], sun[keep]
    cloud = np.asarray(clouds(tlat[ki], tlon[ki], unix_t[ti]), dtype=float)
    keep = cloud <= MAX_CLOUD_COVER
    ti, ki, off, los_ecef, sun, cloud = ti[keep], ki[keep], off[keep], los_ecef[keep], sun[keep], cloud[keep]
    los_teme = astro.ecef_to_teme(los_ecef, theta[ti])

    mem = memory_usage(spec)
    records = []
    pairs = []
    order = np.lexsort((ti, ki))
    ki_sorted = ki[order]
    bounds = np.nonzero(np.diff(ki_sorted))[0] + 1
    for grp in np.split(order, bounds):
        if grp.size == 0:
            continue
        k = int(ki[grp[0]])
        req = db[owner[k]]
        steps = ti[grp]
        acq = _acq_seconds(req.area, req.n_strips, gspeed[steps])

        def rec(idx, role):
            g = grp[idx]
            return dict(
                request=req,
                satellite=spec.norad_id,
                strip_index=int(strip[k]),
                role=role,
                t=float(unix_t[ti[g]]),
                acq=float(acq[idx]),
                los=tuple(float(x) for x in los_teme[g]),
                off=float(off[g]),
                sun=float(sun[g]),
                cloud=float(cloud[g]),
                mem=mem,
            )

        for run in _runs(steps):
            if not req.stereo:
                picks = run if keep_all_steps else [run[int(np.argmin(off[grp[run]]))]]
                records.extend(rec(int(i), "mono") for i in picks)
                continue
            valid = []
            for a_pos, a in enumerate(run):
                for b in run[a_pos + 1 :]:
                    conv = float(astro.angle_between(los_teme[grp[a]], los_teme[grp[b]]))
                    if not STEREO_CONVERGENCE[0] <= conv <= STEREO_CONVERGENCE[1]:
                        continue
                    gap = unix_t[steps[b]] - unix_t[steps[a]]
                    if conv / spec.rotation_speed + acq[a] >= gap:
                        continue
                    valid.append((int(a), int(b)))
            if not valid:
                continue
            if not keep_all_steps:
                valid = [min(valid, key=lambda p: (off[grp[p[0]]] + off[grp[p[1]]], p))]
            firsts = {a: rec(a, "stereo_first") for a in sorted({p[0] for p in valid})}
            seconds = {b: rec(b, "stereo_second") for b in sorted({p[1] for p in valid})}
            records.extend(firsts.values())
            records.extend(seconds.values())
            pairs.extend((firsts[a], seconds[b]) for a, b in valid)
    return spec.norad_id, records, pairs, track


def enumerate_attempts(
    db: list[Request],
    sats: list[tuple[TwoLineElement, SatelliteSpec]],
    horizon: Horizon,
    clouds: CloudSource | None = None,
    *,
    keep_all_steps: bool = False,
    workers: int = 1,
    max_tle_age_days: float = 30.0,
) -> PerformanceTable:
    """Enumerate every gate-passing attempt over the horizon.

    By default each contiguous visibility window keeps only its
    lowest-off-nadir step per (request, strip, role, satellite); stereo
    windows keep the valid pair with the smallest summed off-nadir angle.
    ``keep_all_steps`` retains every step (and every valid stereo pair).
    """
    if not db:
        raise ValueError("customer database is empty")
    if not sats:
        raise ValueError("at least one satellite is required")
    clouds = clouds or CloudSource()
    cloud_fn = cloud_function(clouds)
    specs = [s for _, s in sats]
    db = bind_strips(db, min(s.swath for s in specs))
    targets = _targets(db)

    def work(item):
        tle, spec = item
        if tle.norad_id != spec.norad_id:
            raise ValueError(f"TLE {tle.norad_id} paired with spec {spec.norad_id}")
        return _satellite_records(tle, spec, db, targets, horizon, cloud_fn, keep_all_steps, max_tle_age_days)

    if workers > 1 and clouds.mode == "synthetic":
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, sats))
    else:
        results = [work(item) for item in sats]

    records, raw_pairs, tracks = [], [], {}
    for norad, recs, prs, track in results:
        records.extend(recs)
        raw_pairs.extend(prs)
        tracks[norad] = track

    def key(r):
        return (r["t"], r["satellite"], r["request"].request_id, r["strip_index"], ROLES.index(r["role"]))

    records.sort(key=key)
    ids = {id(r): i for i, r in enumerate(records)}
    attempts = []
    for i, r in enumerate(records):
        req = r["request"]
        attempts.append(
            Attempt(
                attempt_id=i,
                request_id=req.request_id,
                satellite=r["satellite"],
                strip_index=r["strip_index"],
                stereo_role=r["role"],
                t_clock=datetime.fromtimestamp(r["t"], tz=timezone.utc),
                acq_duration=r["acq"],
                los=r["los"],
                off_nadir=r["off"],
                sun_elev=r["sun"],
                cloud_cover=r["cloud"],
                memory_mb=r["mem"],
                criteria=(req.area, r["off"], r["sun"], r["cloud"], float(req.priority), req.price, float(req.age), req.uncertainty),
            )
        )
    pairs = sorted((ids[id(a)], ids[id(b)]) for a, b in raw_pairs)
    log.info("enumerated %d attempts for %d requests", len(attempts), len({a.request_id for a in attempts}))
    return PerformanceTable(
        attempts=attempts,
        horizon=horizon,
        satellites=specs,
        requests=db,
        stereo_pairs=pairs,
        tracks=tracks,
    )


# ---------------------------------------------------------------------- IO


def table_to_dict(table: PerformanceTable) -> dict:
    return {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "horizon": {
            "start": _iso(table.horizon.start),
            "duration_hours": table.horizon.duration,
            "granularity_s": table.horizon.granularity,
        },
        "satellites": [asdict(s) for s in table.satellites],
        "requests": [r.to_dict() for r in table.requests],
        "attempts": [a.to_dict() for a in table.attempts],
        "stereo_pairs": [list(p) for p in table.stereo_pairs],
        "tracks": {str(k): [list(p) for p in v] for k, v in sorted(table.tracks.items())},
    }


def table_to_json(table: PerformanceTable) -> str:
    return json.dumps(table_to_dict(table), sort_keys=True, separators=(",", ":"))


def table_from_dict(d: dict) -> PerformanceTable:
    if d.get("schema") != SCHEMA:
        raise ValueError(f"not a performance table (schema={d.get('schema')!r})")
    if d.get("version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported performance table version {d.get('version')}")
    h = d["horizon"]
    return PerformanceTable(
        attempts=[Attempt.from_dict(a) for a in d["attempts"]],
        horizon=Horizon(_parse_iso(h["start"]), float(h["duration_hours"]), float(h["granularity_s"])),
        satellites=[SatelliteSpec(**s) for s in d["satellites"]],
        requests=[Request.from_dict(r) for r in d["requests"]],
        stereo_pairs=[(int(a), int(b)) for a, b in d["stereo_pairs"]],
        tracks={int(k): [(float(a), float(b)) for a, b in v] for k, v in d["tracks"].items()},
    )


def write_table(table: PerformanceTable, path: str | os.PathLike) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(table_to_json(table))
    tmp.replace(path)


def read_table(path: str | os.PathLike) -> PerformanceTable:
    return table_from_dict(json.loads(Path(path).read_text()))


def write_columnar_cache(table: PerformanceTable, path: str | os.PathLike) -> None:
    """Binary columnar cache (numpy .npz): one array per attempt field.

    Arrays: attempt_id, request_id, satellite, strip_index (int64),
    stereo_role (int8 index into ROLES), t_unix, acq_duration, off_nadir,
    sun_elev, cloud_cover, memory_mb (float64), los (N x 3), criteria (N x 8),
    stereo_pairs (P x 2). Horizon, satellites, requests and tracks are kept as
    a JSON string under ``meta``.
    """
    a = table.attempts
    meta = table_to_dict(table)
    meta.pop("attempts")
    cols = dict(
        attempt_id=np.array([x.attempt_id for x in a], dtype=np.int64),
        request_id=np.array([x.request_id for x in a], dtype=np.int64),
        satellite=np.array([x.satellite for x in a], dtype=np.int64),
        strip_index=np.array([x.strip_index for x in a], dtype=np.int64),
        stereo_role=np.array([ROLES.index(x.stereo_role) for x in a], dtype=np.int8),
        t_unix=np.array([x.t_unix for x in a], dtype=float),
        acq_duration=np.array([x.acq_duration for x in a], dtype=float),
        off_nadir=np.array([x.off_nadir for x in a], dtype=float),
        sun_elev=np.array([x.sun_elev for x in a], dtype=float),
        cloud_cover=np.array([x.cloud_cover for x in a], dtype=float),
        memory_mb=np.array([x.memory_mb for x in a], dtype=float),
        los=np.array([x.los for x in a], dtype=float).reshape(-1, 3),
        criteria=np.array([x.criteria for x in a], dtype=float).reshape(-1, len(CRITERIA)),
        stereo_pairs=np.array(table.stereo_pairs, dtype=np.int64).reshape(-1, 2),
        meta=np.array(json.dumps(meta, sort_keys=True)),
    )
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **cols)


def read_columnar_cache(path: str | os.PathLike) -> PerformanceTable:
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        n = z["attempt_id"].size
        attempts = [
            Attempt(
                attempt_id=int(z["attempt_id"][i]),
                request_id=int(z["request_id"][i]),
                satellite=int(z["satellite"][i]),
                strip_index=int(z["strip_index"][i]),
                stereo_role=ROLES[int(z["stereo_role"][i])],
                t_clock=datetime.fromtimestamp(float(z["t_unix"][i]), tz=timezone.utc),
                acq_duration=float(z["acq_duration"][i]),
                los=tuple(float(x) for x in z["los"][i]),
                off_nadir=float(z["off_nadir"][i]),
                sun_elev=float(z["sun_elev"][i]),
                cloud_cover=float(z["cloud_cover"][i]),
                memory_mb=float(z["memory_mb"][i]),
                criteria=tuple(float(x) for x in z["criteria"][i]),
            )
            for i in range(n)
        ]
    meta["attempts"] = []
    table = table_from_dict(meta)
    table.attempts = attempts
    return table
