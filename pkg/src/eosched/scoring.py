"""Per-attempt scores from the eight quality criteria.

Criterion order: area, off-nadir, sun elevation, cloud cover, priority,
price, age, uncertainty. Cloud cover enters the criteria matrix in percent
so that thresholds can be written in the same units as the other inputs.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .problem import ProblemInstance
from .scenario import CRITERIA, PerformanceTable

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
DEFAULT_DIRECTIONS = (MAXIMIZE, MINIMIZE, MAXIMIZE, MINIMIZE, MINIMIZE, MAXIMIZE, MAXIMIZE, MINIMIZE)
DEFAULT_WEIGHTS = (0.05, 0.1, 0.1, 0.2, 0.2, 0.1, 0.2, 0.05)
DEFAULT_Q = (0.0,) * 8
DEFAULT_P = (30.0, 2.0, 10.0, 2.0, 1.0, 100.0, 4.0, 0.5)
DEFAULT_V = (1000.0, 40.0, 40.0, 15.0, 4.0, 20000.0, 10.0, 1.0)
METHODS = ("wsa", "topsis", "electre3")


class ScoringError(ValueError):
    pass


@dataclass(frozen=True)
class PreferenceModel:
    weights: tuple[float, ...] = DEFAULT_WEIGHTS
    q: tuple[float, ...] = DEFAULT_Q
    p: tuple[float, ...] = DEFAULT_P
    v: tuple[float, ...] = DEFAULT_V
    directions: tuple[str, ...] = DEFAULT_DIRECTIONS

    def __post_init__(self):
        k = len(self.weights)
        for name in ("q", "p", "v", "directions"):
            if len(getattr(self, name)) != k:
                raise ScoringError(f"{name} has {len(getattr(self, name))} entries, expected {k}")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ScoringError("weights must be non-negative and sum to 1")
        for j, (q, p, v) in enumerate(zip(self.q, self.p, self.v)):
            if not 0.0 <= q <= p <= v:
                raise ScoringError(f"criterion {j}: need 0 <= q <= p <= v, got {q}, {p}, {v}")
        bad = set(self.directions) - {MAXIMIZE, MINIMIZE}
        if bad:
            raise ScoringError(f"unknown directions {sorted(bad)}")

    @classmethod
    def normalized(cls, weights, **kw) -> "PreferenceModel":
        w = np.asarray(weights, dtype=float)
        return cls(weights=tuple(float(x) for x in w / w.sum()), **kw)

    @property
    def sign(self) -> np.ndarray:
        return np.array([1.0 if d == MAXIMIZE else -1.0 for d in self.directions])

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "q": list(self.q),
            "p": list(self.p),
            "v": list(self.v),
            "directions": list(self.directions),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreferenceModel":
        base = cls()
        return cls(
            weights=tuple(float(x) for x in d.get("weights", base.weights)),
            q=tuple(float(x) for x in d.get("q", base.q)),
            p=tuple(float(x) for x in d.get("p", base.p)),
            v=tuple(float(x) for x in d.get("v", base.v)),
            directions=tuple(d.get("directions", base.directions)),
        )


def load_preferences(path: str | os.PathLike) -> PreferenceModel:
    return PreferenceModel.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ScoreVector:
    method: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ScoringError(f"unknown method {self.method!r}")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ScoringError("scores must be finite and non-negative")


def criteria_matrix(table: PerformanceTable) -> np.ndarray:
    m = np.array([a.criteria for a in table.attempts], dtype=float).reshape(-1, len(CRITERIA))
    m[:, CRITERIA.index("cloud_cover")] *= 100.0
    return m


def _check(x, prefs: PreferenceModel) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != len(prefs.weights):
        raise ScoringError(f"criteria matrix must be n x {len(prefs.weights)}, got {x.shape}")
    if x.shape[0] < 1:
        raise ScoringError("need at least one attempt")
    if not np.all(np.isfinite(x)):
        raise ScoringError("criteria contain non-finite values")
    return x


def score_wsa(x, prefs: PreferenceModel) -> ScoreVector:
    """Min-max normalised weighted sum; constant columns score 0.5."""
    x = _check(x, prefs)
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    norm = np.where(span > 0, (x - lo) / safe, 0.5)
    norm = np.where(prefs.sign > 0, norm, np.where(span > 0, 1.0 - norm, 0.5))
    return ScoreVector("wsa", norm @ np.asarray(prefs.weights))


def score_topsis(x, prefs: PreferenceModel) -> ScoreVector:
    x = _check(x, prefs)
    norms = np.linalg.norm(x, axis=0)
    if not np.any(norms > 0):
        raise ScoringError("every criterion column is zero")
    r = np.where(norms > 0, x / np.where(norms > 0, norms, 1.0), 0.0)
    vw = r * np.asarray(prefs.weights)
    best = np.where(prefs.sign > 0, vw.max(axis=0), vw.min(axis=0))
    worst = np.where(prefs.sign > 0, vw.min(axis=0), vw.max(axis=0))
    d_pos = np.sqrt(((vw - best) ** 2).sum(axis=1))
    d_neg = np.sqrt(((vw - worst) ** 2).sum(axis=1))
    total = d_pos + d_neg
    return ScoreVector("topsis", np.where(total > 0, d_neg / np.where(total > 0, total, 1.0), 0.5))


def partial_concordance(delta, q, p):
    """1 at or above -q, 0 below -p, linear in between (step when p == q)."""
    delta = np.asarray(delta, dtype=float)
    if p > q:
        return np.clip((p + delta) / (p - q), 0.0, 1.0)
    return (delta >= -q).astype(float)


def partial_discordance(delta, p, v):
    """0 at or above -p, 1 at or below -v, linear in between (step when v == p)."""
    delta = np.asarray(delta, dtype=float)
    if v > p:
        return np.clip((-delta - p) / (v - p), 0.0, 1.0)
    return (delta < -p).astype(float)


def credibility(delta, prefs: PreferenceModel) -> np.ndarray:
    """Outranking credibility for rows of oriented differences (positive favours the first)."""
    delta = np.atleast_2d(np.asarray(delta, dtype=float))
    w = np.asarray(prefs.weights)
    c = np.column_stack([partial_concordance(delta[:, j], prefs.q[j], prefs.p[j]) for j in range(delta.shape[1])])
    d = np.column_stack([partial_discordance(delta[:, j], prefs.p[j], prefs.v[j]) for j in range(delta.shape[1])])
    big_c = np.clip(c @ w, 0.0, 1.0)[:, None]
    weak = d > big_c  # only possible where C < 1
    with np.errstate(divide="ignore", invalid="ignore"):
        factors = np.where(weak, (1.0 - d) / (1.0 - big_c), 1.0)
    return np.clip(big_c[:, 0] * factors.prod(axis=1), 0.0, 1.0)


def score_electre3(x, prefs: PreferenceModel) -> ScoreVector:
    """Outranking against two reference profiles instead of all pairs.

    Score = sigma(attempt S ideal) - sigma(anti-ideal S attempt) + 1, in [0, 2].
    The ideal outranks everything (and everything outranks the anti-ideal)
    with credibility 1, so only these two directions carry information.
    """
    x = _check(x, prefs)
    sign = prefs.sign
    ideal = np.where(sign > 0, x.max(axis=0), x.min(axis=0))
    anti = np.where(sign > 0, x.min(axis=0), x.max(axis=0))
    near_ideal = credibility((x - ideal) * sign, prefs)
    anti_beats = credibility((anti - x) * sign, prefs)
    return ScoreVector("electre3", near_ideal - anti_beats + 1.0)


SCORERS = {"wsa": score_wsa, "topsis": score_topsis, "electre3": score_electre3}


def score(table: PerformanceTable, method: str, prefs: PreferenceModel | None = None) -> ScoreVector:
    prefs = prefs or PreferenceModel()
    if method not in SCORERS:
        raise ScoringError(f"unknown scoring method {method!r}; choose from {METHODS}")
    if not table.attempts:
        return ScoreVector(method, np.zeros(0))
    return SCORERS[method](criteria_matrix(table), prefs)


def attach_scores(instance: ProblemInstance, sv: ScoreVector) -> ProblemInstance:
    """Install scores; copy columns inherit their original's value."""
    n_orig = instance.n - len(instance.copy_map)
    if sv.values.shape != (n_orig,):
        raise ScoringError(f"score vector has {sv.values.size} entries, instance has {n_orig} attempts")
    full = np.empty(instance.n)
    full[:n_orig] = sv.values
    for c, o in instance.copy_map.items():
        full[c] = sv.values[o]
    return instance.with_scores(full)
