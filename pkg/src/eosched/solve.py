"""Solution engines for the binary scheduling program.

Three engines share one feasibility checker:

* ``solve_greedy``  seeded random-order construction (a weak baseline)
* ``solve_elpa``    per-satellite longest path on the maneuver DAG followed
  by a repair loop for request caps, stereo pairing and memory
* ``solve_exact``   depth-first branch and bound, optimal within a time limit
"""
from __future__ import annotations

import json
import logging
import os
import time
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .lpfile import read_lp, write_lp  # noqa: F401  (re-exported)
from .problem import ProblemInstance

log = logging.getLogger(__name__)

METHODS = ("greedy", "elpa", "exact", "external")


class Violation(NamedTuple):
    kind: str  # "g", "b", "a" or "m"
    row: int


class Feasibility(NamedTuple):
    ok: bool
    violated: Violation | None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Schedule:
    selected: tuple[int, ...]
    objective: float
    method: str
    runtime: float
    feasible: bool
    optimal: bool | None = None

    def to_dict(self, reproducible: bool = False) -> dict:
        return {
            "method": self.method,
            "objective": self.objective,
            "runtime_s": None if reproducible else round(self.runtime, 6),
            "selected": list(self.selected),
            "feasible": self.feasible,
            "optimal": self.optimal,
        }


def _row_violations(inst: ProblemInstance, sel: set[int], kinds: str = "gbam"):
    """Yield every violated row for selection ``sel`` in g, b, a, m order."""
    if "g" in kinds:
        for k, row in enumerate(inst.g_rows):
            if sum(1 for i in row if i in sel) > 1:
                yield Violation("g", k)
    if "b" in kinds:
        for k, (idx, cap) in enumerate(inst.b_rows):
            if sum(1 for i in idx if i in sel) > cap:
                yield Violation("b", k)
    if "a" in kinds:
        for k, (p, m) in enumerate(inst.a_rows):
            if (p in sel) if m is None else ((p in sel) != (m in sel)):
                yield Violation("a", k)
    if "m" in kinds:
        for k, row in enumerate(inst.m_rows):
            if sum(mb for i, mb in row.usage.items() if i in sel) > row.capacity + 1e-9:
                yield Violation("m", k)


def check_feasible(inst: ProblemInstance, x) -> Feasibility:
    sel = set(int(i) for i in x)
    bad = [i for i in sel if not 0 <= i < inst.n]
    if bad:
        raise IndexError(f"column indices out of range: {sorted(bad)}")
    first = next(_row_violations(inst, sel), None)
    return Feasibility(first is None, first)


def _objective(inst: ProblemInstance, sel) -> float:
    return float(sum(float(inst.scores[i]) for i in sorted(sel)))


def _schedule(inst: ProblemInstance, sel, method: str, t0: float, optimal=None) -> Schedule:
    chosen = tuple(sorted(int(i) for i in sel))
    feas = check_feasible(inst, chosen)
    if not feas.ok:
        raise AssertionError(f"{method} produced an infeasible selection ({feas.violated})")
    return Schedule(chosen, _objective(inst, chosen), method, time.perf_counter() - t0, True, optimal)


class _State:
    """Incremental bookkeeping for the <= families (g, b, m)."""

    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        self.sel: set[int] = set()
        self.b_used = [0] * len(inst.b_rows)
        self.m_used = [0.0] * len(inst.m_rows)

    def fits(self, i: int) -> bool:
        inst = self.inst
        if i in self.sel:
            return False
        if any(j in self.sel for j in inst.conflicts[i]):
            return False
        b = inst.b_row_of[i]
        if b >= 0 and self.b_used[b] + 1 > inst.b_rows[b][1]:
            return False
        m = inst.m_row_of[i]
        if m >= 0 and self.m_used[m] + inst.m_rows[m].usage[i] > inst.m_rows[m].capacity + 1e-9:
            return False
        return True

    def fits_all(self, cols) -> bool:
        """Joint check for a group of columns (a stereo pair)."""
        cols = list(cols)
        if len(set(cols)) != len(cols):
            return False
        for k, i in enumerate(cols):
            if not self.fits(i):
                return False
            if any(j in self.inst.conflicts[i] for j in cols[k + 1 :]):
                return False
        inst = self.inst
        b_extra: dict[int, int] = defaultdict(int)
        m_extra: dict[int, float] = defaultdict(float)
        for i in cols:
            if inst.b_row_of[i] >= 0:
                b_extra[inst.b_row_of[i]] += 1
            if inst.m_row_of[i] >= 0:
                m_extra[inst.m_row_of[i]] += inst.m_rows[inst.m_row_of[i]].usage[i]
        if any(self.b_used[b] + e > inst.b_rows[b][1] for b, e in b_extra.items()):
            return False
        if any(self.m_used[m] + e > inst.m_rows[m].capacity + 1e-9 for m, e in m_extra.items()):
            return False
        return True

    def add(self, i: int):
        self.sel.add(i)
        if self.inst.b_row_of[i] >= 0:
            self.b_used[self.inst.b_row_of[i]] += 1
        if self.inst.m_row_of[i] >= 0:
            m = self.inst.m_row_of[i]
            self.m_used[m] += self.inst.m_rows[m].usage[i]

    def remove(self, i: int):
        self.sel.discard(i)
        if self.inst.b_row_of[i] >= 0:
            self.b_used[self.inst.b_row_of[i]] -= 1
        if self.inst.m_row_of[i] >= 0:
            m = self.inst.m_row_of[i]
            self.m_used[m] -= self.inst.m_rows[m].usage[i]


def _partner(inst: ProblemInstance, i: int) -> tuple[int | None, bool]:
    """(partner column, is_stereo) for column i; a partnerless stereo column is banned."""
    rows = inst.a_row_of[i]
    if not rows:
        return None, False
    p, m = inst.a_rows[rows[0]]
    if m is None:
        return None, True
    return (m if p == i else p), True


# ------------------------------------------------------------------ greedy


def solve_greedy(inst: ProblemInstance, seed: int = 0) -> Schedule:
    """Random-order construction; unmatched stereo halves are stripped at the end."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    state = _State(inst)
    for i in rng.permutation(inst.n):
        i = int(i)
        partner, stereo = _partner(inst, i)
        if stereo and partner is None:
            continue
        if state.fits(i):
            state.add(i)
    for p, m in inst.a_rows:
        if m is None:
            continue
        if (p in state.sel) != (m in state.sel):
            state.remove(p if p in state.sel else m)
    return _schedule(inst, state.sel, "greedy", t0)


# -------------------------------------------------------------------- ELPA


def _columns_by_satellite(inst: ProblemInstance) -> dict[int, list[int]]:
    by_sat: dict[int, list[int]] = defaultdict(list)
    for i, a in enumerate(inst.columns):
        by_sat[a.satellite].append(i)
    for sat in by_sat:
        by_sat[sat].sort(key=lambda i: (inst.columns[i].t_unix, i))
    return dict(by_sat)


def _conflict_horizon(inst: ProblemInstance, cols: list[int]) -> float:
    """Largest time gap spanned by any conflict among ``cols``."""
    t = {i: inst.columns[i].t_unix for i in cols}
    span = 0.0
    for i in cols:
        for j in inst.conflicts[i]:
            if j in t:
                span = max(span, abs(t[j] - t[i]))
    return span


def longest_path(inst: ProblemInstance, cols: list[int], horizon: float, allowed) -> list[int]:
    """Maximum-weight chain over time-ordered ``cols`` avoiding conflicting pairs.

    Only positive-score columns passing ``allowed`` are used. Predecessors
    older than ``horizon`` seconds cannot conflict and are served by a
    running prefix maximum. Ties go to the lower column index.
    """
    nodes = [i for i in cols if allowed(i) and inst.scores[i] > 0]
    if not nodes:
        return []
    t = [inst.columns[i].t_unix for i in nodes]
    best = [0.0] * len(nodes)
    pred = [-1] * len(nodes)
    prefix: list[tuple[float, int]] = []  # best (value, position) among positions <= k
    far = 0  # positions < far are older than the conflict horizon
    for q, j in enumerate(nodes):
        while far < q and t[far] < t[q] - horizon:
            far += 1
        cand_val, cand_pos = 0.0, -1
        if far > 0:
            cand_val, cand_pos = prefix[far - 1]
        conf = inst.conflicts[j]
        for r in range(far, q):
            i = nodes[r]
            if i in conf:
                continue
            v = best[r]
            if v > cand_val or (v == cand_val and cand_pos >= 0 and i < nodes[cand_pos]):
                cand_val, cand_pos = v, r
        best[q] = float(inst.scores[j]) + cand_val
        pred[q] = cand_pos
        if not prefix:
            prefix.append((best[q], q))
        else:
            pv, pp = prefix[-1]
            if best[q] > pv or (best[q] == pv and j < nodes[pp]):
                prefix.append((best[q], q))
            else:
                prefix.append((pv, pp))
    end_val, end_pos = prefix[-1]
    path = []
    while end_pos >= 0:
        path.append(nodes[end_pos])
        end_pos = pred[end_pos]
    return path[::-1]


def solve_elpa(inst: ProblemInstance, fill: bool = True) -> Schedule:
    """Longest path per satellite, then repair of cap, stereo and memory rows.

    While any row is violated, the lowest-score selected column in a violated
    row (for a stereo row, the selected half) is forbidden and that
    satellite's path recomputed. With ``fill`` the repaired schedule is
    topped up in descending score order with any column (or stereo pair)
    that still fits, then improved by insertion moves that swap out
    lower-valued blockers.
    """
    t0 = time.perf_counter()
    by_sat = _columns_by_satellite(inst)
    horizons = {s: _conflict_horizon(inst, cols) for s, cols in by_sat.items()}
    forbidden: set[int] = set()
    for i in range(inst.n):
        partner, stereo = _partner(inst, i)
        if stereo and partner is None:
            forbidden.add(i)
    allowed = lambda i: i not in forbidden  # noqa: E731
    paths = {s: longest_path(inst, cols, horizons[s], allowed) for s, cols in by_sat.items()}

    while True:
        sel = {i for p in paths.values() for i in p}
        candidates: set[int] = set()
        for v in _row_violations(inst, sel):
            if v.kind == "g":
                candidates.update(i for i in inst.g_rows[v.row] if i in sel)
            elif v.kind == "b":
                candidates.update(i for i in inst.b_rows[v.row][0] if i in sel)
            elif v.kind == "a":
                p, m = inst.a_rows[v.row]
                candidates.update(i for i in (p, m) if i is not None and i in sel)
            else:
                candidates.update(i for i in inst.m_rows[v.row].usage if i in sel)
        if not candidates:
            break
        victim = min(candidates, key=lambda i: (inst.scores[i], -i))
        forbidden.add(victim)
        sat = inst.columns[victim].satellite
        paths[sat] = longest_path(inst, by_sat[sat], horizons[sat], allowed)

    state = _State(inst)
    for i in sel:
        state.add(i)
    if fill:
        _fill(inst, state)
        _improve(inst, state)
    return _schedule(inst, state.sel, "elpa", t0)


def _blockers(inst: ProblemInstance, state: _State, cols: tuple[int, ...]) -> set[int] | None:
    """Selected columns that must leave so ``cols`` fit; None if no removal set exists."""
    sel = state.sel
    out: set[int] = set()
    for i in cols:
        out.update(j for j in inst.conflicts[i] if j in sel)
    if len(cols) == 2 and cols[1] in inst.conflicts[cols[0]]:
        return None

    def close(s: set[int]) -> set[int]:
        # a stereo half never leaves alone
        for j in list(s):
            partner, stereo = _partner(inst, j)
            if stereo and partner is not None and partner in sel:
                s.add(partner)
        return s

    out = close(out)
    for b in {inst.b_row_of[i] for i in cols if inst.b_row_of[i] >= 0}:
        idx, cap = inst.b_rows[b]
        need = sum(1 for i in cols if inst.b_row_of[i] == b)
        held = sorted((j for j in idx if j in sel and j not in out), key=lambda j: (inst.scores[j], -j))
        over = len(held) + need - cap
        if over > len(held):
            return None
        out = close(out | set(held[: max(over, 0)]))
    for m in {inst.m_row_of[i] for i in cols if inst.m_row_of[i] >= 0}:
        row = inst.m_rows[m]
        need = sum(row.usage[i] for i in cols if inst.m_row_of[i] == m)
        held = sorted((j for j in row.usage if j in sel and j not in out), key=lambda j: inst.scores[j] / max(row.usage[j], 1e-12))
        load = sum(row.usage[j] for j in row.usage if j in sel and j not in out)
        for j in held:
            if load + need <= row.capacity + 1e-9:
                break
            out.add(j)
            load -= row.usage[j]
        if load + need > row.capacity + 1e-9:
            return None
        out = close(out)
    return out


def _improve(inst: ProblemInstance, state: _State, max_rounds: int = 20) -> None:
    """Insertion moves: add an unselected item, drop what blocks it, refill.

    A move is kept only if the refilled selection scores strictly higher.
    """
    items = []
    for i in range(inst.n):
        if inst.scores[i] <= 0:
            continue
        partner, stereo = _partner(inst, i)
        if not stereo:
            items.append((i,))
        elif partner is not None and i < partner:
            items.append((i, partner))
    items.sort(key=lambda c: (-sum(inst.scores[i] for i in c), c))
    for _ in range(max_rounds):
        moved = False
        for cols in items:
            if any(i in state.sel for i in cols):
                continue
            drop = _blockers(inst, state, cols)
            if drop is None:
                continue
            before = set(state.sel)
            freed = _freed(inst, state, drop)
            for j in drop:
                state.remove(j)
            if not state.fits_all(cols):  # defensive; _blockers should make room
                for j in drop:
                    state.add(j)
                continue
            for i in cols:
                state.add(i)
            _fill(inst, state, freed)
            gain = sum(inst.scores[i] for i in state.sel - before) - sum(inst.scores[j] for j in before - state.sel)
            if gain > 1e-12:
                moved = True
                continue
            for j in state.sel - before:
                state.remove(j)
            for j in before - state.sel:
                state.add(j)
        if not moved:
            break


def _freed(inst: ProblemInstance, state: _State, drop) -> set[int]:
    """Unselected columns that removing ``drop`` could let back in.

    Everything else stays blocked, so refilling only these matches a full
    refill. Memory rows count only when some column of the row is over budget.
    """
    out: set[int] = set()
    for j in drop:
        out.update(inst.conflicts[j])
        if inst.b_row_of[j] >= 0:
            out.update(inst.b_rows[inst.b_row_of[j]][0])
        m = inst.m_row_of[j]
        if m >= 0:
            row = inst.m_rows[m]
            room = row.capacity - state.m_used[m]
            if any(mb > room + 1e-9 for i, mb in row.usage.items() if i not in state.sel):
                out.update(row.usage)
    for j in list(out):
        partner, stereo = _partner(inst, j)
        if partner is not None:
            out.add(partner)
    return out - state.sel


def _fill(inst: ProblemInstance, state: _State, candidates=None) -> None:
    pool = range(inst.n) if candidates is None else candidates
    order = sorted(pool, key=lambda i: (-inst.scores[i], i))
    for i in order:
        if i in state.sel or inst.scores[i] <= 0:
            continue
        partner, stereo = _partner(inst, i)
        if not stereo:
            if state.fits(i):
                state.add(i)
        elif partner is not None and partner not in state.sel and state.fits_all((i, partner)):
            state.add(i)
            state.add(partner)


# ------------------------------------------------------------------- exact


class _Item(NamedTuple):
    cols: tuple[int, ...]
    value: float


def _items(inst: ProblemInstance) -> list[_Item]:
    """Decision units: single columns, or stereo pairs taken together."""
    seen: set[int] = set()
    items = []
    for i in range(inst.n):
        if i in seen:
            continue
        partner, stereo = _partner(inst, i)
        if stereo:
            if partner is None:
                seen.add(i)
                continue
            cols = tuple(sorted((i, partner)))
        else:
            cols = (i,)
        seen.update(cols)
        if len(cols) == 2 and cols[1] in inst.conflicts[cols[0]]:
            continue
        value = float(sum(inst.scores[c] for c in cols))
        if value > 0:
            items.append(_Item(cols, value))
    return items


def _components(inst: ProblemInstance, items: list[_Item], binding_m: set[int]) -> list[list[int]]:
    parent = list(range(len(items)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner = {}
    for k, it in enumerate(items):
        for c in it.cols:
            owner[c] = k
    links: dict[tuple, list[int]] = defaultdict(list)
    for k, it in enumerate(items):
        for c in it.cols:
            links[("b", inst.b_row_of[c])].append(k)
            if inst.m_row_of[c] in binding_m:
                links[("m", inst.m_row_of[c])].append(k)
            for j in inst.conflicts[c]:
                if j in owner:
                    ra, rb = find(k), find(owner[j])
                    if ra != rb:
                        parent[rb] = ra
    for ks in links.values():
        for k in ks[1:]:
            ra, rb = find(ks[0]), find(k)
            if ra != rb:
                parent[rb] = ra
    comps: dict[int, list[int]] = defaultdict(list)
    for k in range(len(items)):
        comps[find(k)].append(k)
    return sorted(comps.values(), key=lambda ks: min(items[k].cols))


class _Timeout(Exception):
    pass


def _branch_and_bound(inst, items: list[_Item], deadline: float, stats: dict, warm: set[int] = frozenset()) -> tuple[set[int], float, bool]:
    order = sorted(range(len(items)), key=lambda k: (-items[k].value, items[k].cols))
    its = [items[k] for k in order]
    state = _State(inst)
    n = len(its)
    b_of = [inst.b_row_of[it.cols[0]] for it in its]
    # suffix lists of remaining item values per request row, already value-sorted
    by_row: dict[int, list[int]] = defaultdict(list)
    for k in range(n):
        by_row[b_of[k]].append(k)

    best_sel: set[int] = set()
    best_val = 0.0
    # incumbent: take items greedily in branching order
    for it in its:
        if state.fits_all(it.cols):
            for c in it.cols:
                state.add(c)
    best_sel, best_val = set(state.sel), _objective(inst, state.sel)
    for c in list(state.sel):
        state.remove(c)
    mine = {c for it in its for c in it.cols} & set(warm)
    if _objective(inst, mine) > best_val:
        best_sel, best_val = mine, _objective(inst, mine)

    def bound(k: int) -> float:
        total = 0.0
        for row, ks in by_row.items():
            room = inst.b_rows[row][1] - state.b_used[row]
            for kk in ks:
                if room <= 0:
                    break
                if kk >= k:
                    total += its[kk].value
                    room -= 1
        return total

    cur = [0.0]

    def dfs(k: int):
        nonlocal best_sel, best_val
        stats["nodes"] += 1
        if stats["nodes"] % 2048 == 0 and time.perf_counter() > deadline:
            raise _Timeout
        if cur[0] > best_val:
            best_val, best_sel = cur[0], set(state.sel)
        if k == n or cur[0] + bound(k) <= best_val:
            return
        it = its[k]
        if state.fits_all(it.cols):
            for c in it.cols:
                state.add(c)
            cur[0] += it.value
            dfs(k + 1)
            cur[0] -= it.value
            for c in it.cols:
                state.remove(c)
        dfs(k + 1)

    try:
        dfs(0)
        complete = True
    except _Timeout:
        complete = False
    return best_sel, best_val, complete


def solve_exact(inst: ProblemInstance, time_limit: float = 60.0) -> Schedule:
    """Branch and bound over items (columns, or stereo pairs as one unit).

    Independent blocks of the constraint graph are solved separately;
    memory rows that cannot bind are dropped first. The bound adds, per
    request row, the best remaining item values that still fit its cap.
    The incumbent starts from the better of a greedy pass and the ELPA
    schedule. ``optimal`` is False when the time limit interrupted the search.
    """
    if inst.simplify:
        raise ValueError("the exact engine needs pairwise maneuver rows (simplify=False)")
    t0 = time.perf_counter()
    deadline = t0 + time_limit
    items = _items(inst)
    warm = set(solve_elpa(inst).selected)
    binding_m = {k for k, row in enumerate(inst.m_rows) if sum(row.usage.values()) > row.capacity + 1e-9}
    chosen: set[int] = set()
    optimal = True
    stats = {"nodes": 0}
    for comp in _components(inst, items, binding_m):
        sel, _, complete = _branch_and_bound(inst, [items[k] for k in comp], deadline, stats, warm)
        chosen |= sel
        optimal &= complete
    log.debug("branch and bound explored %d nodes", stats["nodes"])
    return _schedule(inst, chosen, "exact", t0, optimal=optimal)


# ---------------------------------------------------------------------- IO


def export_lp(inst: ProblemInstance, path: str | os.PathLike) -> None:
    write_lp(inst, path)


def solve(inst: ProblemInstance, method: str, *, seed: int = 0, time_limit: float = 60.0) -> Schedule:
    if method == "greedy":
        return solve_greedy(inst, seed)
    if method == "elpa":
        return solve_elpa(inst)
    if method == "exact":
        return solve_exact(inst, time_limit)
    raise ValueError(f"unknown solver {method!r}; choose from greedy, elpa, exact")


def schedule_from_selection(inst: ProblemInstance, selected, method: str = "external") -> Schedule:
    """Wrap a selection produced elsewhere (e.g. an external MILP run on the LP file)."""
    sel = tuple(sorted(int(i) for i in selected))
    feas = check_feasible(inst, sel)
    return Schedule(sel, _objective(inst, sel), method, 0.0, feas.ok, None)


def write_solution(schedule: Schedule, path: str | os.PathLike, bundle_id: str | None = None, reproducible: bool = False) -> None:
    d = schedule.to_dict(reproducible)
    d["bundle_id"] = bundle_id
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(d, sort_keys=True, indent=1) + "\n")
    tmp.replace(path)


def read_solution(path: str | os.PathLike) -> tuple[Schedule, str | None]:
    d = json.loads(Path(path).read_text())
    sched = Schedule(
        selected=tuple(int(i) for i in d["selected"]),
        objective=float(d["objective"]),
        method=d["method"],
        runtime=float(d["runtime_s"] or 0.0),
        feasible=bool(d["feasible"]),
        optimal=d.get("optimal"),
    )
    return sched, d.get("bundle_id")
