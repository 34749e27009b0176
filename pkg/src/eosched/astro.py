"""Orbital and viewing-geometry primitives.

Positions coming out of SGP4 are in the TEME frame, which is what this
package calls "ECI". Earth-fixed coordinates are obtained by rotating TEME
through Greenwich mean sidereal time (polar motion is ignored, which is far
below the precision a 10 s scheduling grid needs).
"""
from __future__ import annotations

import logging
import math
import os
import urllib.request
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

import numpy as np
from sgp4.api import Satrec, WGS72

log = logging.getLogger(__name__)

# WGS-84
WGS84_A = 6378.137
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)
MEAN_EARTH_RADIUS = 6371.0
EARTH_ROTATION_RATE = 7.2921158553e-5  # rad/s

LEO_ALTITUDE_BAND = (200.0, 2000.0)
TLE_LINE_LENGTH = 69


class TLEError(ValueError):
    pass


class TLELengthError(TLEError):
    pass


class TLEChecksumError(TLEError):
    pass


class TLECatalogMismatchError(TLEError):
    pass


class PropagationError(RuntimeError):
    pass


class DecayedOrbitError(PropagationError):
    pass


@dataclass(frozen=True)
class GeodeticPoint:
    latitude: float
    longitude: float
    altitude: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude < 180.0:
            raise ValueError(f"longitude out of range: {self.longitude}")
        if self.altitude < 0.0:
            raise ValueError(f"negative altitude: {self.altitude}")


@dataclass(frozen=True)
class TwoLineElement:
    norad_id: int
    line1: str
    line2: str
    epoch: datetime
    name: str | None = None

    def satrec(self) -> Satrec:
        return Satrec.twoline2rv(self.line1, self.line2, WGS72)

    def to_text(self) -> str:
        head = f"{self.name}\n" if self.name else ""
        return f"{head}{self.line1}\n{self.line2}\n"


@dataclass(frozen=True)
class SatelliteSpec:
    norad_id: int
    rotation_speed: float  # deg/s
    swath: float  # km
    max_off_nadir: float = 30.0  # deg
    memory_capacity: float = 163840.0  # MB
    resolution: float = 2.25  # m^2 per pixel

    def __post_init__(self):
        for name in ("rotation_speed", "swath", "max_off_nadir", "memory_capacity", "resolution"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_off_nadir > 90.0:
            raise ValueError("max_off_nadir must be <= 90 degrees")


@dataclass(frozen=True)
class EphemerisSample:
    time: datetime
    subsatellite: GeodeticPoint
    position_eci: np.ndarray
    velocity_eci: np.ndarray
    ground_speed: float


# --------------------------------------------------------------------- TLEs


def tle_checksum(line: str) -> int:
    """Modulo-10 checksum over the first 68 characters ('-' counts as 1)."""
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


def _tle_epoch(line1: str) -> datetime:
    yy = int(line1[18:20])
    year = 2000 + yy if yy < 57 else 1900 + yy
    day = float(line1[20:32])
    return datetime(year, 1, 1, tzinfo=timezone.utc) + timedelta(days=day - 1.0)


def _catalog_number(line: str) -> int:
    field = line[2:7].strip()
    if field and field[0].isalpha():
        # alpha-5: A=10 ... Z=33, skipping I and O
        letters = "ABCDEFGHJKLMNPQRSTUVWXYZ"
        return (letters.index(field[0]) + 10) * 10000 + int(field[1:])
    return int(field)


def parse_tle(text: str) -> TwoLineElement:
    """Parse and validate one TLE, optionally preceded by a name line."""
    lines = [ln.rstrip("\r\n") for ln in text.strip("\n").splitlines() if ln.strip()]
    name = None
    if len(lines) == 3:
        name = lines[0].strip()
        if name.startswith("0 "):
            name = name[2:].strip()
        lines = lines[1:]
    if len(lines) != 2:
        raise TLEError(f"expected 2 or 3 lines, got {len(lines)}")
    line1, line2 = (ln.rstrip() for ln in lines)
    for idx, line in ((1, line1), (2, line2)):
        if len(line) != TLE_LINE_LENGTH:
            raise TLELengthError(f"line {idx} has {len(line)} characters, expected {TLE_LINE_LENGTH}")
        if not line.startswith(f"{idx} "):
            raise TLEError(f"line {idx} must start with '{idx} '")
        if not line[68].isdigit() or int(line[68]) != tle_checksum(line):
            raise TLEChecksumError(f"line {idx} checksum mismatch: expected {tle_checksum(line)}, found {line[68]!r}")
    id1, id2 = _catalog_number(line1), _catalog_number(line2)
    if id1 != id2:
        raise TLECatalogMismatchError(f"catalog numbers differ: {id1} vs {id2}")
    return TwoLineElement(norad_id=id1, line1=line1, line2=line2, epoch=_tle_epoch(line1), name=name)


def parse_tle_file(text: str) -> list[TwoLineElement]:
    """Parse a concatenation of 2- or 3-line TLE records."""
    out = []
    pending: list[str] = []
    for raw in text.splitlines():
        line = raw.rstrip()
        if not line.strip() or line.startswith("#"):
            continue
        pending.append(line)
        if line.startswith("2 ") and len(pending) >= 2 and pending[-2].startswith("1 "):
            out.append(parse_tle("\n".join(pending[-3:] if len(pending) >= 3 else pending[-2:])))
            pending = []
    return out


def format_tle(
    norad_id: int,
    epoch: datetime,
    inclination: float,
    raan: float,
    eccentricity: float,
    arg_perigee: float,
    mean_anomaly: float,
    mean_motion: float,
    *,
    bstar: float = 0.0,
    intl_designator: str = "00000A",
    name: str | None = None,
    element_set: int = 999,
    rev_number: int = 0,
) -> TwoLineElement:
    """Build a checksummed TLE from mean elements (degrees, rev/day)."""
    epoch = epoch.astimezone(timezone.utc)
    start = datetime(epoch.year, 1, 1, tzinfo=timezone.utc)
    doy = (epoch - start).total_seconds() / 86400.0 + 1.0
    if bstar == 0.0:
        bstar_field = " 00000-0"
    else:
        exp = math.floor(math.log10(abs(bstar))) + 1
        mant = round(abs(bstar) / 10.0**exp * 1e5)
        bstar_field = f"{'-' if bstar < 0 else ' '}{mant:05d}{'-' if exp < 0 else '+'}{abs(exp):d}"
    body1 = (
        f"1 {norad_id:05d}U {intl_designator:<8s} {epoch.year % 100:02d}{doy:012.8f} "
        f" .00000000  00000-0 {bstar_field} 0 {element_set:4d}"
    )
    ecc = f"{eccentricity:.7f}"[2:]
    body2 = (
        f"2 {norad_id:05d} {inclination:8.4f} {raan % 360:8.4f} {ecc} "
        f"{arg_perigee % 360:8.4f} {mean_anomaly % 360:8.4f} {mean_motion:11.8f}{rev_number:5d}"
    )
    line1 = body1 + str(tle_checksum(body1))
    line2 = body2 + str(tle_checksum(body2))
    return parse_tle(((name + "\n") if name else "") + line1 + "\n" + line2)


def builtin_tles() -> dict[int, TwoLineElement]:
    text = resources.files("eosched.data").joinpath("builtin.tle").read_text()
    return {t.norad_id: t for t in parse_tle_file(text)}


def load_tles(norad_ids, tle_file: str | os.PathLike | None = None) -> list[TwoLineElement]:
    """Resolve TLEs by catalog number from a local file, falling back to the built-ins."""
    pool = dict(builtin_tles())
    if tle_file is not None:
        pool.update({t.norad_id: t for t in parse_tle_file(Path(tle_file).read_text())})
    missing = [n for n in norad_ids if n not in pool]
    if missing:
        raise KeyError(f"no TLE available for NORAD ids {missing}")
    return [pool[n] for n in norad_ids]


def fetch_tle(
    norad_id: int,
    url_template: str,
    cache_dir: str | os.PathLike,
    timeout: float = 10.0,
    refresh: bool = False,
) -> TwoLineElement:
    """Download a TLE by catalog number and cache it on disk.

    ``url_template`` must contain ``{norad_id}``.
    """
    cache = Path(cache_dir)
    cached = cache / f"{norad_id}.tle"
    if cached.exists() and not refresh:
        return parse_tle(cached.read_text())
    url = url_template.format(norad_id=norad_id)
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        text = resp.read().decode("ascii", errors="replace")
    records = [t for t in parse_tle_file(text) if t.norad_id == norad_id]
    if not records:
        raise TLEError(f"response from {url} holds no TLE for {norad_id}")
    cache.mkdir(parents=True, exist_ok=True)
    tmp = cached.with_suffix(".tmp")
    tmp.write_text(records[0].to_text())
    tmp.replace(cached)
    return records[0]


# --------------------------------------------------------------- time/frames


def julian_date(t: datetime) -> tuple[float, float]:
    """Split Julian date (whole, fraction) of a UTC datetime."""
    t = t.astimezone(timezone.utc)
    y, m = t.year, t.month
    if m <= 2:
        y -= 1
        m += 12
    a = y // 100
    b = 2 - a + a // 4
    jd0 = math.floor(365.25 * (y + 4716)) + math.floor(30.6001 * (m + 1)) + t.day + b - 1524.5
    fr = (t.hour * 3600 + t.minute * 60 + t.second + t.microsecond * 1e-6) / 86400.0
    return float(jd0), fr


def gmst(jd_ut1):
    """Greenwich mean sidereal time in radians (IAU-82, as used with TEME)."""
    tut1 = (np.asarray(jd_ut1, dtype=float) - 2451545.0) / 36525.0
    secs = (
        -6.2e-6 * tut1**3
        + 0.093104 * tut1**2
        + (876600.0 * 3600.0 + 8640184.812866) * tut1
        + 67310.54841
    )
    return np.mod(np.radians(secs / 240.0), 2.0 * np.pi)


def _rot_z(vec, angle):
    c, s = np.cos(angle), np.sin(angle)
    x, y, z = vec[..., 0], vec[..., 1], vec[..., 2]
    return np.stack([c * x - s * y, s * x + c * y, z], axis=-1)


def teme_to_ecef(r, theta):
    """Rotate TEME vectors into the Earth-fixed frame; ``theta`` broadcasts against r[..., 0]."""
    return _rot_z(np.asarray(r, dtype=float), -np.asarray(theta))


def ecef_to_teme(r, theta):
    return _rot_z(np.asarray(r, dtype=float), np.asarray(theta))


def geodetic_to_ecef(lat_deg, lon_deg, alt_km=0.0):
    lat = np.radians(lat_deg)
    lon = np.radians(lon_deg)
    n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * np.sin(lat) ** 2)
    x = (n + alt_km) * np.cos(lat) * np.cos(lon)
    y = (n + alt_km) * np.cos(lat) * np.sin(lon)
    z = (n * (1.0 - WGS84_E2) + alt_km) * np.sin(lat)
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def ecef_to_geodetic(r):
    """Return (lat_deg, lon_deg, alt_km) arrays; Bowring start plus fixed-point refinement."""
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    p = np.hypot(x, y)
    lon = np.arctan2(y, x)
    lat = np.arctan2(z, p * (1.0 - WGS84_E2))
    for _ in range(6):
        n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * np.sin(lat) ** 2)
        alt = p / np.maximum(np.cos(lat), 1e-12) - n
        lat = np.arctan2(z, p * (1.0 - WGS84_E2 * n / (n + alt)))
    n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * np.sin(lat) ** 2)
    alt = np.where(
        np.abs(np.cos(lat)) > 1e-9,
        p / np.maximum(np.abs(np.cos(lat)), 1e-12) - n,
        np.abs(z) - n * (1.0 - WGS84_E2),
    )
    lon_deg = (np.degrees(lon) + 180.0) % 360.0 - 180.0
    return np.degrees(lat), lon_deg, alt


def great_circle_km(lat1, lon1, lat2, lon2):
    """Haversine distance on the mean spherical Earth."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dp = p2 - p1
    dl = np.radians(lon2) - np.radians(lon1)
    h = np.sin(dp / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2) ** 2
    return 2.0 * MEAN_EARTH_RADIUS * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def destination_point(lat, lon, bearing_deg, distance_km):
    """Point reached travelling ``distance_km`` along ``bearing_deg`` on the sphere."""
    p1, l1 = math.radians(lat), math.radians(lon)
    b = math.radians(bearing_deg)
    d = distance_km / MEAN_EARTH_RADIUS
    p2 = math.asin(math.sin(p1) * math.cos(d) + math.cos(p1) * math.sin(d) * math.cos(b))
    l2 = l1 + math.atan2(math.sin(b) * math.sin(d) * math.cos(p1), math.cos(d) - math.sin(p1) * math.sin(p2))
    lon2 = (math.degrees(l2) + 180.0) % 360.0 - 180.0
    return math.degrees(p2), lon2


# -------------------------------------------------------------- propagation


def propagate_arrays(tle: TwoLineElement, jd, fr):
    """Vectorised SGP4: TEME position/velocity (km, km/s) at split Julian dates."""
    sat = tle.satrec()
    jd = np.atleast_1d(np.asarray(jd, dtype=float))
    fr = np.atleast_1d(np.asarray(fr, dtype=float))
    jd, fr = np.broadcast_arrays(jd, fr)
    err, r, v = sat.sgp4_array(np.ascontiguousarray(jd), np.ascontiguousarray(fr))
    return err, r, v


def ground_speed_from_state(r_teme, v_teme, r_ground_teme):
    """Earth-relative horizontal speed scaled down to the ground point's radius."""
    r_teme = np.asarray(r_teme, dtype=float)
    v_rel = np.asarray(v_teme, dtype=float) - np.cross([0.0, 0.0, EARTH_ROTATION_RATE], r_teme)
    rn = np.linalg.norm(r_teme, axis=-1, keepdims=True)
    rhat = r_teme / rn
    v_h = v_rel - np.sum(v_rel * rhat, axis=-1, keepdims=True) * rhat
    scale = np.linalg.norm(r_ground_teme, axis=-1) / rn[..., 0]
    return np.linalg.norm(v_h, axis=-1) * scale


def propagate(tle: TwoLineElement, t: datetime, max_age_days: float | None = 30.0) -> EphemerisSample:
    """SGP4 state at ``t`` with the geodetic sub-satellite point."""
    if t.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware UTC")
    if max_age_days is not None and abs((t - tle.epoch).total_seconds()) > max_age_days * 86400.0:
        raise PropagationError(f"{t.isoformat()} is more than {max_age_days} days from the TLE epoch")
    jd, fr = julian_date(t)
    err, r, v = propagate_arrays(tle, jd, fr)
    if err[0] == 6:
        raise DecayedOrbitError(f"satellite {tle.norad_id} has decayed at {t.isoformat()}")
    if err[0] != 0 or not np.all(np.isfinite(r)):
        raise PropagationError(f"SGP4 error code {err[0]} for {tle.norad_id}")
    r, v = r[0], v[0]
    theta = float(gmst(jd + fr))
    lat, lon, alt = ecef_to_geodetic(teme_to_ecef(r, theta))
    if alt <= 0.0:
        raise DecayedOrbitError(f"negative altitude {float(alt):.1f} km")
    ground = ecef_to_teme(geodetic_to_ecef(lat, lon, 0.0), theta)
    speed = float(ground_speed_from_state(r, v, ground))
    return EphemerisSample(
        time=t,
        subsatellite=GeodeticPoint(float(lat), float(lon), float(alt)),
        position_eci=r,
        velocity_eci=v,
        ground_speed=speed,
    )


# ----------------------------------------------------------------- geometry


def target_eci(target: GeodeticPoint, t: datetime) -> np.ndarray:
    jd, fr = julian_date(t)
    return ecef_to_teme(geodetic_to_ecef(target.latitude, target.longitude, target.altitude), float(gmst(jd + fr)))


def _nadir_eci(sample: EphemerisSample) -> np.ndarray:
    sub = sample.subsatellite
    ground = target_eci(GeodeticPoint(sub.latitude, sub.longitude, 0.0), sample.time)
    d = ground - sample.position_eci
    return d / np.linalg.norm(d)


def line_of_sight(sample: EphemerisSample, target: GeodeticPoint) -> np.ndarray:
    """Unit vector from the satellite to ``target`` in the inertial (TEME) frame."""
    d = target_eci(target, sample.time) - sample.position_eci
    return d / np.linalg.norm(d)


def angle_between(u, v) -> np.ndarray:
    """Angle in degrees between (arrays of) unit vectors; atan2 form keeps small angles exact."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.degrees(np.arctan2(cross, dot))


def off_nadir_angle(sample: EphemerisSample, target: GeodeticPoint) -> float:
    """Angle at the satellite between the geodetic nadir and the look direction."""
    return float(angle_between(_nadir_eci(sample), line_of_sight(sample, target)))


# --------------------------------------------------------------------- sun


def sun_elevation_arrays(lat_deg, lon_deg, jd):
    """Solar elevation (deg) from the almanac low-precision formulae.

    Good to roughly 0.01 deg in declination between 1950 and 2050; refraction
    is not applied.
    """
    n = np.asarray(jd, dtype=float) - 2451545.0
    mean_lon = np.mod(280.460 + 0.9856474 * n, 360.0)
    g = np.radians(np.mod(357.528 + 0.9856003 * n, 360.0))
    ecl_lon = np.radians(mean_lon + 1.915 * np.sin(g) + 0.020 * np.sin(2 * g))
    obliq = np.radians(23.439 - 0.0000004 * n)
    ra = np.arctan2(np.cos(obliq) * np.sin(ecl_lon), np.cos(ecl_lon))
    dec = np.arcsin(np.sin(obliq) * np.sin(ecl_lon))
    hour_angle = gmst(jd) + np.radians(lon_deg) - ra
    lat = np.radians(lat_deg)
    sin_el = np.sin(lat) * np.sin(dec) + np.cos(lat) * np.cos(dec) * np.cos(hour_angle)
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def sun_elevation(target: GeodeticPoint, t: datetime) -> float:
    jd, fr = julian_date(t)
    return float(sun_elevation_arrays(target.latitude, target.longitude, jd + fr))
