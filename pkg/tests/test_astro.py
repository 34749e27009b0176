from __future__ import annotations

import math
import threading
from datetime import datetime, timedelta, timezone
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eosched import astro
from eosched.astro import (
    GeodeticPoint,
    PropagationError,
    TLECatalogMismatchError,
    TLEChecksumError,
    TLEError,
    TLELengthError,
)

from instances import sgp4_verification_cases


# widely published ISS element set with valid checksums
ISS_1 = "1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927"
ISS_2 = "2 25544  51.6416 247.4627 0006703 130.5360 325.0288 15.72125391563537"


# ------------------------------------------------------------------ TLE text


def test_checksum_known_lines():
    assert astro.tle_checksum(ISS_1) == 7
    assert astro.tle_checksum(ISS_2) == 7


def test_parse_valid_tle_with_name():
    tle = astro.parse_tle(f"ISS (ZARYA)\n{ISS_1}\n{ISS_2}\n")
    assert tle.norad_id == 25544
    assert tle.name == "ISS (ZARYA)"
    # day 264.51782528 of 2008
    expected = datetime(2008, 1, 1, tzinfo=timezone.utc) + timedelta(days=263.51782528)
    assert abs((tle.epoch - expected).total_seconds()) < 1e-3


def test_parse_rejects_short_line():
    with pytest.raises(TLELengthError):
        astro.parse_tle(f"{ISS_1[:-1]}\n{ISS_2}")


def test_parse_rejects_bad_checksum():
    bad = ISS_2[:-1] + "3"
    with pytest.raises(TLEChecksumError):
        astro.parse_tle(f"{ISS_1}\n{bad}")


def test_parse_rejects_catalog_mismatch():
    other = ISS_2[:2] + "25545" + ISS_2[7:68]
    other += str(astro.tle_checksum(other))
    with pytest.raises(TLECatalogMismatchError):
        astro.parse_tle(f"{ISS_1}\n{other}")


def test_parse_rejects_wrong_line_count():
    with pytest.raises(TLEError):
        astro.parse_tle(ISS_1)


def test_format_tle_round_trip():
    epoch = datetime(2024, 10, 16, 12, tzinfo=timezone.utc)
    tle = astro.format_tle(99999, epoch, 98.2, 10.0, 0.0001, 90.0, 45.0, 14.5855, bstar=1.2e-5, name="TEST")
    again = astro.parse_tle(tle.to_text())
    assert again == tle
    assert abs((tle.epoch - epoch).total_seconds()) < 1e-3
    sat = tle.satrec()
    assert math.isclose(math.degrees(sat.inclo), 98.2, abs_tol=1e-4)
    assert math.isclose(sat.bstar, 1.2e-5, rel_tol=1e-4)


def test_parse_tle_file_mixed_records():
    text = f"# comment\nISS\n{ISS_1}\n{ISS_2}\n\n{ISS_1}\n{ISS_2}\n"
    assert [t.norad_id for t in astro.parse_tle_file(text)] == [25544, 25544]


def test_builtin_catalog_and_load(tmp_path):
    tles = astro.load_tles([38755, 40053])
    assert [t.norad_id for t in tles] == [38755, 40053]
    extra = tmp_path / "extra.tle"
    extra.write_text(f"{ISS_1}\n{ISS_2}\n")
    assert astro.load_tles([25544], extra)[0].norad_id == 25544
    with pytest.raises(KeyError):
        astro.load_tles([1])
    with pytest.raises(FileNotFoundError):
        astro.load_tles([38755], tmp_path / "missing.tle")


class _TLEHandler(BaseHTTPRequestHandler):
    hits = 0

    def do_GET(self):
        type(self).hits += 1
        body = f"ISS\n{ISS_1}\n{ISS_2}\n".encode() if "25544" in self.path else b"nothing here\n"
        self.send_response(200)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def tle_server():
    server = HTTPServer(("127.0.0.1", 0), _TLEHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _TLEHandler.hits = 0
    yield f"http://127.0.0.1:{server.server_port}/gp?CATNR={{norad_id}}"
    server.shutdown()


def test_fetch_tle_caches(tle_server, tmp_path):
    tle = astro.fetch_tle(25544, tle_server, tmp_path)
    assert tle.norad_id == 25544
    assert (tmp_path / "25544.tle").exists()
    astro.fetch_tle(25544, tle_server, tmp_path)
    assert _TLEHandler.hits == 1
    astro.fetch_tle(25544, tle_server, tmp_path, refresh=True)
    assert _TLEHandler.hits == 2


def test_fetch_tle_missing_record(tle_server, tmp_path):
    with pytest.raises(TLEError):
        astro.fetch_tle(11111, tle_server, tmp_path)
    assert not any(tmp_path.iterdir())


# -------------------------------------------------------------- SGP4 vectors


def test_sgp4_matches_verification_vectors():
    worst = 0.0
    count = 0
    for tle, rows in sgp4_verification_cases():
        sat = tle.satrec()
        ts = np.array([r[0] for r in rows])
        err, r, _ = astro.propagate_arrays(tle, np.full(ts.size, sat.jdsatepoch), sat.jdsatepochF + ts / 1440.0)
        want = np.array([r_[1] for r_ in rows])
        ok = err == 0
        worst = max(worst, float(np.max(np.linalg.norm(r[ok] - want[ok], axis=1), initial=0.0)))
        count += int(ok.sum())
    assert count > 400
    assert worst < 1e-3


# ------------------------------------------------------------ frames/geodesy


def test_julian_date_j2000():
    jd, fr = astro.julian_date(datetime(2000, 1, 1, 12, tzinfo=timezone.utc))
    assert jd + fr == 2451545.0


def test_gmst_at_j2000():
    # 18h 41m 50.54841s
    assert math.isclose(math.degrees(float(astro.gmst(2451545.0))), 280.46061837, abs_tol=1e-6)


def test_geodetic_reference_points():
    np.testing.assert_allclose(astro.geodetic_to_ecef(0.0, 0.0), [6378.137, 0.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(astro.geodetic_to_ecef(90.0, 0.0), [0.0, 0.0, 6356.752314245], atol=1e-6)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-89.9, 89.9),
    st.floats(-180.0, 179.999),
    st.floats(0.0, 2000.0),
)
def test_geodetic_round_trip(lat, lon, alt):
    lat2, lon2, alt2 = astro.ecef_to_geodetic(astro.geodetic_to_ecef(lat, lon, alt))
    assert abs(float(lat2) - lat) < 1e-8
    assert abs((float(lon2) - lon + 180.0) % 360.0 - 180.0) < 1e-8
    assert abs(float(alt2) - alt) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * math.pi), st.lists(st.floats(-1e4, 1e4), min_size=3, max_size=3))
def test_frame_rotation_round_trip_and_norm(theta, v):
    v = np.array(v)
    back = astro.ecef_to_teme(astro.teme_to_ecef(v, theta), theta)
    np.testing.assert_allclose(back, v, atol=1e-8)
    assert math.isclose(np.linalg.norm(astro.teme_to_ecef(v, theta)), np.linalg.norm(v), rel_tol=1e-12, abs_tol=1e-9)


def test_great_circle_quarter_meridian():
    assert math.isclose(float(astro.great_circle_km(0, 0, 90, 0)), math.pi / 2 * astro.MEAN_EARTH_RADIUS, rel_tol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-80, 80), st.floats(-180, 180), st.floats(0, 360), st.floats(1, 5000))
def test_destination_point_distance(lat, lon, bearing, dist):
    lat2, lon2 = astro.destination_point(lat, lon, bearing, dist)
    assert math.isclose(float(astro.great_circle_km(lat, lon, lat2, lon2)), dist, rel_tol=1e-6)


def test_angle_between_small_and_right_angles():
    assert math.isclose(float(astro.angle_between([1, 0, 0], [0, 1, 0])), 90.0)
    eps = 1e-9
    v = np.array([1.0, eps, 0.0]) / math.hypot(1.0, eps)
    assert math.isclose(float(astro.angle_between([1, 0, 0], v)), math.degrees(eps), rel_tol=1e-6)


# --------------------------------------------------------------- propagation


@pytest.fixture(scope="module")
def spot():
    return astro.load_tles([38755])[0]


def test_propagate_leo_sample(spot):
    s = astro.propagate(spot, spot.epoch + timedelta(hours=3))
    assert 650 < s.subsatellite.altitude < 750
    # circular-orbit ground track speed for ~700 km is about 6.8 km/s
    assert 6.5 < s.ground_speed < 7.1


def test_propagate_rejects_stale_and_naive(spot):
    with pytest.raises(PropagationError):
        astro.propagate(spot, spot.epoch + timedelta(days=31))
    astro.propagate(spot, spot.epoch + timedelta(days=31), max_age_days=None)
    with pytest.raises(ValueError):
        astro.propagate(spot, datetime(2024, 10, 17))


def test_off_nadir_matches_spherical_oracle(spot):
    s = astro.propagate(spot, spot.epoch + timedelta(hours=1))
    sub = s.subsatellite
    assert astro.off_nadir_angle(s, GeodeticPoint(sub.latitude, sub.longitude)) < 0.05
    r_sat = np.linalg.norm(s.position_eci)
    for d in (100.0, 250.0, 400.0):
        lat, lon = astro.destination_point(sub.latitude, sub.longitude, 75.0, d)
        target = GeodeticPoint(lat, lon)
        r_t = np.linalg.norm(astro.target_eci(target, s.time))
        lam = d / astro.MEAN_EARTH_RADIUS
        expected = math.degrees(math.atan2(r_t * math.sin(lam), r_sat - r_t * math.cos(lam)))
        assert abs(astro.off_nadir_angle(s, target) - expected) < 0.3


# ----------------------------------------------------------------------- sun


def test_sun_near_zenith_at_equinox_noon():
    # March 2024 equinox; the equation of time puts solar noon at Greenwich near 12:07 UTC
    el = astro.sun_elevation(GeodeticPoint(0.0, 0.0), datetime(2024, 3, 20, 12, 7, tzinfo=timezone.utc))
    assert el > 89.0


def test_sun_noon_elevation_matches_declination_oracle():
    # June solstice: declination = obliquity; noon elevation = 90 - |lat - dec|
    t = datetime(2024, 6, 20, 12, 2, tzinfo=timezone.utc)
    for lat in (-40.0, 0.0, 23.44, 50.0):
        el = astro.sun_elevation(GeodeticPoint(lat, 0.0), t)
        assert abs(el - (90.0 - abs(lat - 23.44))) < 0.5


def test_sun_below_horizon_at_midnight():
    assert astro.sun_elevation(GeodeticPoint(48.0, 2.0), datetime(2024, 10, 17, 0, 0, tzinfo=timezone.utc)) < -20


def test_geodetic_point_validation():
    with pytest.raises(ValueError):
        GeodeticPoint(91.0, 0.0)
    with pytest.raises(ValueError):
        GeodeticPoint(0.0, 180.0)
    with pytest.raises(ValueError):
        GeodeticPoint(0.0, 0.0, -1.0)
    assert GeodeticPoint(0.0, -180.0).longitude == -180.0
