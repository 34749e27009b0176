"""Synthetic performance tables and brute-force oracles shared by the tests."""
from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from eosched.astro import GeodeticPoint, SatelliteSpec, TwoLineElement, angle_between
from eosched.demand import Request
from eosched.problem import ProblemInstance, assemble
from eosched.scenario import Attempt, Horizon, PerformanceTable

T0 = datetime(2024, 10, 17, 9, 40, tzinfo=timezone.utc)


def make_request(rid: int, *, stereo=False, n_strips=1, priority=2, price=1000.0, area=100.0, lat=10.0, lon=20.0) -> Request:
    return Request(
        request_id=rid,
        location=GeodeticPoint(lat, lon),
        area=area,
        priority=priority,
        price=price,
        age=3,
        stereo=stereo,
        uncertainty=0.5,
        n_strips=n_strips,
    )


def make_attempt(aid, rid, sat, t, los, *, role="mono", strip=0, acq=2.0, mem=3000.0, off=10.0, sun=40.0, cloud=0.2, criteria=None) -> Attempt:
    los = np.asarray(los, dtype=float)
    los = tuple(float(x) for x in los / np.linalg.norm(los))
    return Attempt(
        attempt_id=aid,
        request_id=rid,
        satellite=sat,
        strip_index=strip,
        stereo_role=role,
        t_clock=T0 + timedelta(seconds=float(t)),
        acq_duration=acq,
        los=los,
        off_nadir=off,
        sun_elev=sun,
        cloud_cover=cloud,
        memory_mb=mem,
        criteria=criteria or (100.0, off, sun, cloud, 2.0, 1000.0, 3.0, 0.5),
    )


def _cone(rng, half_angle_deg: float) -> np.ndarray:
    """Random unit vector within a cone around -z (roughly nadir)."""
    c = np.cos(np.radians(half_angle_deg))
    z = rng.uniform(c, 1.0)
    phi = rng.uniform(0, 2 * np.pi)
    s = np.sqrt(1 - z * z)
    return np.array([s * np.cos(phi), s * np.sin(phi), -z])


def random_table(
    rng: np.random.Generator,
    n: int,
    *,
    n_sats: int = 2,
    stereo_prob: float = 0.25,
    window: float | None = None,
    memory_tight: bool = True,
) -> PerformanceTable:
    """Attempts with random times, look directions, strips, stereo roles and memory use.

    ``window`` (seconds) controls conflict density; the default spreads
    ``n`` attempts so that most neighbours on one satellite conflict.
    """
    window = window if window is not None else 12.0 * n
    sats = []
    for k in range(n_sats):
        cap = float(rng.uniform(4000, 20000)) if memory_tight else 1e9
        sats.append(SatelliteSpec(norad_id=k + 1, rotation_speed=float(rng.uniform(1.0, 3.0)), swath=60.0, memory_capacity=cap))
    requests: list[Request] = []
    rows = []  # (rid, sat, t, role, strip)
    rid = 0
    while len(rows) < n:
        stereo = rng.random() < stereo_prob
        n_strips = 1 if stereo else int(rng.choice([1, 1, 1, 2, 3]))
        req = make_request(
            rid,
            stereo=stereo,
            n_strips=n_strips,
            priority=int(rng.integers(1, 5)),
            price=float(rng.uniform(500, 3000)),
            area=float(rng.uniform(30, 2000)),
            lat=float(rng.uniform(-60, 60)),
            lon=float(rng.uniform(-180, 180)),
        )
        requests.append(req)
        k = int(rng.integers(1, 5))
        for _ in range(min(k, n - len(rows))):
            sat = int(rng.integers(1, n_sats + 1))
            t = float(rng.uniform(0, window))
            if stereo:
                role = "stereo_first" if rng.random() < 0.5 else "stereo_second"
                strip = 0
            else:
                role = "mono"
                strip = int(rng.integers(0, n_strips))
            rows.append((rid, sat, t, role, strip))
        rid += 1
    rows.sort(key=lambda r: (r[2], r[1], r[0]))
    attempts = []
    for aid, (r, sat, t, role, strip) in enumerate(rows):
        off = float(rng.uniform(0, 30))
        cloud = float(rng.uniform(0, 0.6))
        sun = float(rng.uniform(15, 70))
        req = requests[r]
        attempts.append(
            make_attempt(
                aid, r, sat, t, _cone(rng, 30.0), role=role, strip=strip,
                acq=float(rng.uniform(1, 8)), mem=float(rng.uniform(1500, 4000)),
                off=off, sun=sun, cloud=cloud,
                criteria=(req.area, off, sun, cloud * 100, float(req.priority), req.price, float(req.age), req.uncertainty),
            )
        )
    pairs = []
    for i, a in enumerate(attempts):
        if a.stereo_role != "stereo_first":
            continue
        for j, b in enumerate(attempts):
            if b.stereo_role == "stereo_second" and b.request_id == a.request_id and b.satellite == a.satellite and b.t_unix > a.t_unix:
                pairs.append((i, j))
    horizon = Horizon(T0, max(window, 60.0) / 3600.0 + 0.01, 10.0)
    return PerformanceTable(attempts, horizon, sats, requests, sorted(pairs), {})


def random_instance(rng: np.random.Generator, n: int, **kw) -> ProblemInstance:
    table = random_table(rng, n, **kw)
    inst = assemble(table)
    return inst.with_scores(rng.uniform(0.05, 1.0, inst.n).round(6))


def g_only_instance(rng: np.random.Generator, n: int, window: float | None = None) -> ProblemInstance:
    """One satellite, mono attempts of distinct requests, no binding memory: only G rows bind."""
    table = random_table(rng, n, n_sats=1, stereo_prob=0.0, window=window, memory_tight=False)
    attempts = []
    for k, a in enumerate(table.attempts):
        # one attempt per request keeps B rows slack
        attempts.append(Attempt(**{**a.__dict__, "attempt_id": k, "request_id": k, "strip_index": 0}))
    reqs = [make_request(i) for i in range(len(attempts))]
    table = PerformanceTable(attempts, table.horizon, table.satellites, reqs, [], {})
    inst = assemble(table)
    return inst.with_scores(rng.uniform(0.05, 1.0, inst.n).round(6))


# ------------------------------------------------------------------ oracles


def exhaustive_best(inst: ProblemInstance) -> float:
    """Maximum objective over every feasible subset (depth-first, feasibility pruning only)."""
    n = inst.n
    conflicts = inst.conflicts
    b_of, m_of = inst.b_row_of, inst.m_row_of
    caps = [cap for _, cap in inst.b_rows]
    mcap = [r.capacity for r in inst.m_rows]
    partners: list[list[int | None]] = [[] for _ in range(n)]
    for p, m in inst.a_rows:
        partners[p].append(m)
        if m is not None:
            partners[m].append(p)
    scores = [float(s) for s in inst.scores]
    b_used = [0] * len(caps)
    m_used = [0.0] * len(mcap)
    chosen = [False] * n
    best = [0.0]

    def rec(i: int, value: float):
        if i == n:
            best[0] = max(best[0], value)
            return
        # a-rows are checked once both columns are decided
        if not any(q is not None and q < i and chosen[q] for q in partners[i]):
            rec(i + 1, value)  # exclude
        if any(chosen[j] for j in conflicts[i]):
            return
        b, m = b_of[i], m_of[i]
        if b >= 0 and b_used[b] + 1 > caps[b]:
            return
        mb = inst.m_rows[m].usage[i] if m >= 0 else 0.0
        if m >= 0 and m_used[m] + mb > mcap[m] + 1e-9:
            return
        chosen[i] = True
        if b >= 0:
            b_used[b] += 1
        if m >= 0:
            m_used[m] += mb
        if all(q is not None and (q > i or chosen[q]) for q in partners[i]):
            rec(i + 1, value + scores[i])
        chosen[i] = False
        if b >= 0:
            b_used[b] -= 1
        if m >= 0:
            m_used[m] -= mb

    rec(0, 0.0)
    return best[0]


def brute_force_chain(inst: ProblemInstance) -> float:
    """Best total score over subsets with no two members in a common G row (all subsets enumerated)."""
    n = inst.n
    cmask = [0] * n
    for row in inst.g_rows:
        for i in row:
            for j in row:
                if i != j:
                    cmask[i] |= 1 << j
    ok = np.ones(1, dtype=bool)
    val = np.zeros(1)
    for h in range(n):
        low = np.arange(1 << h, dtype=np.int64)
        ok = np.concatenate([ok, ok & ((low & cmask[h]) == 0)])
        val = np.concatenate([val, val + inst.scores[h]])
    return float(val[ok].max())


def replay_overlaps(inst: ProblemInstance, selected) -> int:
    """Simulate each satellite's attitude timeline and count slew/acquisition overlaps.

    For consecutive selected looks i -> j the platform is busy acquiring i for
    ``acq_i`` seconds and then slews at constant rate; it must be on target
    strictly before ``t_j``.
    """
    cols = inst.columns
    by_sat: dict[int, list[int]] = {}
    for c in selected:
        by_sat.setdefault(cols[c].satellite, []).append(c)
    overlaps = 0
    for sat, cs in by_sat.items():
        spec = inst.table.spec_for(sat)
        cs.sort(key=lambda c: (cols[c].t_unix, c))
        for a, b in zip(cs, cs[1:]):
            i, j = cols[a], cols[b]
            ready = i.t_unix + i.acq_duration + float(angle_between(i.los, j.los)) / spec.rotation_speed
            if ready >= j.t_unix:
                overlaps += 1
    return overlaps


def sgp4_verification_cases():
    """(TwoLineElement, [(tsince_min, xyz_km)]) for every satellite in the published SGP4 test output."""
    data = Path(__file__).parent / "data"
    lines = (data / "SGP4-VER.TLE").read_text().splitlines()
    elements = {}
    for k, line in enumerate(lines):
        if line.startswith("1 "):
            l1, l2 = line[:69], lines[k + 1][:69]
            elements[int(l1[2:7])] = TwoLineElement(int(l1[2:7]), l1, l2, datetime(2000, 1, 1, tzinfo=timezone.utc))
    cases, current = {}, None
    for line in (data / "tcppver.out").read_text().splitlines():
        parts = line.split()
        if len(parts) == 2 and parts[1] == "xx":
            current = int(parts[0])
            cases[current] = []
        elif parts and current is not None:
            cases[current].append((float(parts[0]), np.array([float(x) for x in parts[1:4]])))
    return [(elements[k], rows) for k, rows in cases.items() if k in elements and rows]
