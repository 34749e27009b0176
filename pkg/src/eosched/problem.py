"""Binary program assembly: objective scores and the four constraint families.

Columns are the attempts of a performance table, extended with copy columns
so that no attempt takes part in more than one stereo pair. Constraints are
kept as sparse index sets:

* ``g_rows``  maneuver conflicts, each ``sum x <= 1``
* ``b_rows``  per-request acquisition caps, ``sum x <= cap``
* ``a_rows``  stereo pairing, ``x_plus - x_minus = 0`` (``minus`` may be
  ``None`` for a stereo attempt without any partner, i.e. ``x_plus = 0``)
* ``m_rows``  per-satellite memory, ``sum mb_i x_i <= capacity``
"""
from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .astro import SatelliteSpec, angle_between
from .scenario import Attempt, PerformanceTable

log = logging.getLogger(__name__)

SCHEMA = "eosched.problem_instance"
SCHEMA_VERSION = 1


class ManeuverError(ValueError):
    pass


@dataclass(frozen=True)
class Maneuver:
    from_attempt: int
    to_attempt: int
    slew_angle: float
    t_man: float


@dataclass(frozen=True)
class MemoryRow:
    satellite: int
    usage: dict[int, float]
    capacity: float


@dataclass
class ProblemInstance:
    n: int
    scores: np.ndarray
    g_rows: list[tuple[int, ...]]
    b_rows: list[tuple[tuple[int, ...], int]]
    a_rows: list[tuple[int, int | None]]
    m_rows: list[MemoryRow]
    copy_map: dict[int, int]
    columns: list[Attempt]
    table: PerformanceTable | None = None
    simplify: bool = False

    def original(self, i: int) -> int:
        return self.copy_map.get(i, i)

    @property
    def n_constraints(self) -> int:
        return len(self.g_rows) + len(self.b_rows) + len(self.a_rows) + len(self.m_rows)

    @cached_property
    def conflicts(self) -> list[set[int]]:
        out: list[set[int]] = [set() for _ in range(self.n)]
        for row in self.g_rows:
            for i in row:
                out[i].update(row)
        for i in range(self.n):
            out[i].discard(i)
        return out

    @cached_property
    def b_row_of(self) -> list[int]:
        out = [-1] * self.n
        for r, (idx, _) in enumerate(self.b_rows):
            for i in idx:
                out[i] = r
        return out

    @cached_property
    def a_row_of(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for s, (p, m) in enumerate(self.a_rows):
            out[p].append(s)
            if m is not None:
                out[m].append(s)
        return out

    @cached_property
    def m_row_of(self) -> list[int]:
        out = [-1] * self.n
        for r, row in enumerate(self.m_rows):
            for i in row.usage:
                out[i] = r
        return out

    def with_scores(self, scores) -> "ProblemInstance":
        scores = np.asarray(scores, dtype=float)
        if scores.shape != (self.n,):
            raise ValueError(f"expected {self.n} scores, got shape {scores.shape}")
        return replace(self, scores=scores)


# ---------------------------------------------------------------- maneuvers


def maneuver_time(i: Attempt, j: Attempt, spec: SatelliteSpec) -> float:
    """Slew time between two looks at the platform's constant rotation rate."""
    if i.satellite != j.satellite:
        raise ManeuverError(f"attempts {i.attempt_id} and {j.attempt_id} are on different satellites")
    return float(angle_between(i.los, j.los)) / spec.rotation_speed


def maneuver(i: Attempt, j: Attempt, spec: SatelliteSpec) -> Maneuver:
    if i.t_unix > j.t_unix:
        i, j = j, i
    angle = float(angle_between(i.los, j.los))
    return Maneuver(i.attempt_id, j.attempt_id, angle, angle / spec.rotation_speed)


def _infeasible_pairs(columns: list[Attempt], specs: dict[int, SatelliteSpec]):
    """Forward same-satellite pairs violating the slew-plus-acquisition condition.

    Yields ``(i, j, consecutive)`` with ``i`` before ``j`` in (t_clock, index)
    order; ``consecutive`` marks neighbours in that order.
    """
    by_sat: dict[int, list[int]] = defaultdict(list)
    for idx, a in enumerate(columns):
        by_sat[a.satellite].append(idx)
    for sat in sorted(by_sat):
        speed = specs[sat].rotation_speed
        idx = sorted(by_sat[sat], key=lambda k: (columns[k].t_unix, k))
        t = np.array([columns[k].t_unix for k in idx])
        acq = np.array([columns[k].acq_duration for k in idx])
        los = np.array([columns[k].los for k in idx], dtype=float).reshape(-1, 3)
        for a in range(len(idx)):
            # slews never exceed 180 deg, so nothing beyond this gap can conflict
            stop = np.searchsorted(t, t[a] + 180.0 / speed + acq[a], side="right")
            if stop <= a + 1:
                continue
            gap = t[a + 1 : stop] - t[a]
            t_man = angle_between(los[a], los[a + 1 : stop]) / speed
            for off in np.nonzero(t_man + acq[a] >= gap)[0]:
                b = a + 1 + int(off)
                yield idx[a], idx[b], b == a + 1


def build_g_rows(columns: list[Attempt], specs: dict[int, SatelliteSpec], simplify: bool = False) -> list[tuple[int, ...]]:
    """Maneuverability rows.

    Pairwise mode emits one row per forward-infeasible pair. Simplify mode
    merges maximal runs of consecutively conflicting attempts into a single
    group row and keeps pairwise rows only for conflicts no group covers.
    """
    pairs = list(_infeasible_pairs(columns, specs))
    if not simplify:
        return [(i, j) for i, j, _ in pairs]

    parent: dict[int, int] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j, consecutive in pairs:
        if consecutive:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[rj] = ri
    groups: dict[int, list[int]] = defaultdict(list)
    for x in list(parent):
        groups[find(x)].append(x)
    member = {x: root for root, xs in groups.items() for x in xs}
    rows = [tuple(sorted(xs, key=lambda k: (columns[k].t_unix, k))) for xs in groups.values()]
    for i, j, _ in pairs:
        if i not in member or j not in member or member[i] != member[j]:
            rows.append((i, j))
    rows.sort(key=lambda r: (columns[r[0]].t_unix, r))
    return rows


def build_b_rows(columns: list[Attempt], table: PerformanceTable) -> list[tuple[tuple[int, ...], int]]:
    """One row per unique request id in order of first appearance."""
    reqs = table.request_map()
    members: dict[int, list[int]] = {}
    for idx, a in enumerate(columns):
        members.setdefault(a.request_id, []).append(idx)
    rows = []
    for rid, idx in members.items():
        req = reqs.get(rid)
        stereo = req.stereo if req is not None else any(columns[i].stereo_role != "mono" for i in idx)
        if stereo:
            cap = 2
        else:
            cap = req.n_strips if req is not None else 1
        rows.append((tuple(idx), cap))
    return rows


def build_a_rows(table: PerformanceTable):
    """Stereo equality rows plus copy columns.

    An attempt used by more than one allowed pair keeps the first pair and
    gets a copy column for each further pair. Returns ``(a_rows, copy_map,
    columns)`` where ``columns`` is the table's attempts followed by copies.
    """
    columns = list(table.attempts)
    copy_map: dict[int, int] = {}
    used: set[int] = set()
    a_rows: list[tuple[int, int | None]] = []

    def column_for(i: int) -> int:
        if i not in used:
            used.add(i)
            return i
        c = len(columns)
        columns.append(replace(table.attempts[i], attempt_id=c))
        copy_map[c] = i
        return c

    for first, second in sorted(table.stereo_pairs):
        a_rows.append((column_for(first), column_for(second)))
    orphan = [a.attempt_id for a in table.attempts if a.stereo_role != "mono" and a.attempt_id not in used]
    if orphan:
        log.warning("%d stereo attempts have no allowed partner and are fixed to zero", len(orphan))
        a_rows.extend((i, None) for i in orphan)
    return a_rows, copy_map, columns


def build_m_rows(columns: list[Attempt], sats: list[SatelliteSpec]) -> list[MemoryRow]:
    rows = []
    for spec in sats:
        usage = {i: a.memory_mb for i, a in enumerate(columns) if a.satellite == spec.norad_id}
        rows.append(MemoryRow(spec.norad_id, usage, spec.memory_capacity))
    return rows


def assemble(table: PerformanceTable, simplify: bool = False, sats: list[SatelliteSpec] | None = None) -> ProblemInstance:
    sats = list(sats) if sats is not None else list(table.satellites)
    specs = {s.norad_id: s for s in sats}
    a_rows, copy_map, columns = build_a_rows(table)
    return ProblemInstance(
        n=len(columns),
        scores=np.zeros(len(columns)),
        g_rows=build_g_rows(columns, specs, simplify),
        b_rows=build_b_rows(columns, table),
        a_rows=a_rows,
        m_rows=build_m_rows(columns, sats) if columns else [],
        copy_map=copy_map,
        columns=columns,
        table=table,
        simplify=simplify,
    )


def constraint_counts(table: PerformanceTable) -> dict[str, int]:
    """Row totals for the pairwise and simplified formulations of one table."""
    return {
        "pairwise": assemble(table, simplify=False).n_constraints,
        "simplified": assemble(table, simplify=True).n_constraints,
    }


# ---------------------------------------------------------------------- IO


def instance_to_dict(inst: ProblemInstance) -> dict:
    return {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "n": inst.n,
        "simplify": inst.simplify,
        "table_fingerprint": inst.table.fingerprint() if inst.table is not None else None,
        "scores": [float(s) for s in inst.scores],
        "g_rows": [list(r) for r in inst.g_rows],
        "b_rows": [{"index": list(idx), "cap": cap} for idx, cap in inst.b_rows],
        "a_rows": [[p, m] for p, m in inst.a_rows],
        "m_rows": [
            {"satellite": r.satellite, "capacity": r.capacity, "usage": [[i, mb] for i, mb in sorted(r.usage.items())]}
            for r in inst.m_rows
        ],
        "copy_map": [[c, o] for c, o in sorted(inst.copy_map.items())],
    }


def instance_to_json(inst: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True, separators=(",", ":"))


def instance_from_dict(d: dict, table: PerformanceTable) -> ProblemInstance:
    if d.get("schema") != SCHEMA or d.get("version") != SCHEMA_VERSION:
        raise ValueError("not a supported problem instance document")
    if d.get("table_fingerprint") not in (None, table.fingerprint()):
        raise ValueError("instance was built from a different performance table")
    copy_map = {int(c): int(o) for c, o in d["copy_map"]}
    columns = list(table.attempts)
    for c in sorted(copy_map):
        columns.append(replace(table.attempts[copy_map[c]], attempt_id=c))
    if len(columns) != d["n"]:
        raise ValueError("column count does not match the table plus copies")
    return ProblemInstance(
        n=int(d["n"]),
        scores=np.array(d["scores"], dtype=float),
        g_rows=[tuple(int(i) for i in r) for r in d["g_rows"]],
        b_rows=[(tuple(int(i) for i in r["index"]), int(r["cap"])) for r in d["b_rows"]],
        a_rows=[(int(p), None if m is None else int(m)) for p, m in d["a_rows"]],
        m_rows=[MemoryRow(int(r["satellite"]), {int(i): float(mb) for i, mb in r["usage"]}, float(r["capacity"])) for r in d["m_rows"]],
        copy_map=copy_map,
        columns=columns,
        table=table,
        simplify=bool(d["simplify"]),
    )
