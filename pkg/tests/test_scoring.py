from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from eosched.problem import assemble
from eosched.scoring import (
    MAXIMIZE,
    MINIMIZE,
    PreferenceModel,
    ScoreVector,
    ScoringError,
    attach_scores,
    credibility,
    criteria_matrix,
    load_preferences,
    score,
    score_electre3,
    score_topsis,
    score_wsa,
)
from eosched.solve import solve_exact

from instances import random_table

TWO_MAX = PreferenceModel(weights=(0.5, 0.5), q=(0.0, 0.0), p=(1.0, 1.0), v=(2.0, 2.0), directions=(MAXIMIZE, MAXIMIZE))


# ------------------------------------------------------------- scalar oracles


def _electre_sigma(delta, w, q, p, v) -> float:
    """Credibility of 'a outranks b' from oriented differences, written out per criterion."""
    c, d = [], []
    for dj, qj, pj, vj in zip(delta, q, p, v):
        if dj >= -qj:
            c.append(1.0)
        elif dj < -pj:
            c.append(0.0)
        else:
            c.append((pj + dj) / (pj - qj))
        if dj >= -pj:
            d.append(0.0)
        elif dj <= -vj:
            d.append(1.0)
        else:
            d.append((-dj - pj) / (vj - pj))
    big_c = sum(wj * cj for wj, cj in zip(w, c))
    sigma = big_c
    for dj in d:
        if dj > big_c:
            sigma *= (1.0 - dj) / (1.0 - big_c)
    return sigma


def _electre_oracle(x, prefs, literal=False):
    x = np.asarray(x, float)
    s = prefs.sign
    ideal = [max(col) if sj > 0 else min(col) for col, sj in zip(x.T, s)]
    anti = [min(col) if sj > 0 else max(col) for col, sj in zip(x.T, s)]
    args = (prefs.weights, prefs.q, prefs.p, prefs.v)
    out = []
    for row in x:
        if literal:
            beats_anti = _electre_sigma([(r - a) * sj for r, a, sj in zip(row, anti, s)], *args)
            ideal_beats = _electre_sigma([(i - r) * sj for r, i, sj in zip(row, ideal, s)], *args)
            out.append(beats_anti - ideal_beats + 1)
        else:
            near_ideal = _electre_sigma([(r - i) * sj for r, i, sj in zip(row, ideal, s)], *args)
            anti_beats = _electre_sigma([(a - r) * sj for r, a, sj in zip(row, anti, s)], *args)
            out.append(near_ideal - anti_beats + 1)
    return np.array(out)


# ----------------------------------------------------------------------- WSA


def test_wsa_single_attempt():
    x = np.array([[100.0, 10.0, 40.0, 20.0, 2.0, 900.0, 3.0, 0.5]])
    assert score_wsa(x, PreferenceModel()).values[0] == pytest.approx(0.5, abs=1e-12)


def test_wsa_cloud_difference():
    a = [100.0, 10.0, 40.0, 0.0, 2.0, 900.0, 3.0, 0.5]
    b = [100.0, 10.0, 40.0, 60.0, 2.0, 900.0, 3.0, 0.5]
    v = score_wsa(np.array([a, b]), PreferenceModel()).values
    assert v[0] - v[1] == pytest.approx(0.2, abs=1e-12)


def test_wsa_worked_example():
    x = np.array([[3.0, 4.0], [4.0, 3.0], [0.0, 5.0]])
    prefs = PreferenceModel(weights=(0.5, 0.5), q=(0, 0), p=(1, 1), v=(2, 2), directions=(MAXIMIZE, MINIMIZE))
    # column 1 -> (3/4, 1, 0); column 2 flipped -> (1/2, 1, 0)
    expected = [0.5 * 0.75 + 0.5 * 0.5, 0.5 * 1 + 0.5 * 1, 0.0]
    np.testing.assert_allclose(score_wsa(x, prefs).values, expected, rtol=0, atol=1e-12)


def test_wsa_weight_scale_invariance():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 100, (20, 8))
    w = rng.uniform(0.1, 1, 8)
    a = score_wsa(x, PreferenceModel.normalized(w)).values
    b = score_wsa(x, PreferenceModel.normalized(2 * w)).values
    np.testing.assert_allclose(a, b, atol=1e-15)


# -------------------------------------------------------------------- TOPSIS


def test_topsis_worked_example():
    x = np.array([[3.0, 4.0], [4.0, 3.0], [0.0, 5.0]])
    n1, n2 = 5.0, math.sqrt(50.0)
    vw = [[0.5 * r[0] / n1, 0.5 * r[1] / n2] for r in x]
    best = (0.5 * 4 / n1, 0.5 * 5 / n2)
    worst = (0.0, 0.5 * 3 / n2)
    expected = []
    for a, b in vw:
        dp = math.sqrt((a - best[0]) ** 2 + (b - best[1]) ** 2)
        dn = math.sqrt((a - worst[0]) ** 2 + (b - worst[1]) ** 2)
        expected.append(dn / (dp + dn))
    np.testing.assert_allclose(score_topsis(x, TWO_MAX).values, expected, rtol=0, atol=1e-12)


def test_topsis_ideal_and_anti_ideal():
    x = np.array([[5.0, 5.0], [1.0, 1.0], [3.0, 2.0]])
    v = score_topsis(x, TWO_MAX).values
    assert v[0] == pytest.approx(1.0, abs=1e-12)
    assert v[1] == pytest.approx(0.0, abs=1e-12)


def test_topsis_degenerate_inputs():
    with pytest.raises(ScoringError):
        score_topsis(np.zeros((3, 2)), TWO_MAX)
    np.testing.assert_allclose(score_topsis(np.ones((3, 2)), TWO_MAX).values, 0.5)


# ---------------------------------------------------------------- ELECTRE-III


def test_electre_step_thresholds_hand_case():
    prefs = PreferenceModel(weights=(0.5, 0.5), q=(0, 0), p=(0, 0), v=(0, 0), directions=(MAXIMIZE, MAXIMIZE))
    x = np.array([[3.0, 3.0], [2.0, 2.0], [1.0, 1.0]])
    # only (3,3) weakly dominates the ideal; only (1,1) is weakly dominated by the anti-ideal
    np.testing.assert_allclose(score_electre3(x, prefs).values, [2.0, 1.0, 0.0])
    x = np.array([[3.0, 1.0], [1.0, 3.0], [2.0, 2.0]])
    np.testing.assert_allclose(score_electre3(x, prefs).values, [1.0, 1.0, 1.0])


def test_electre_identical_attempts():
    x = np.tile([100.0, 10.0, 40.0, 20.0, 2.0, 900.0, 3.0, 0.5], (5, 1))
    v = score_electre3(x, PreferenceModel()).values
    assert np.all(v == v[0])


def test_electre_partial_thresholds_hand_case():
    prefs = PreferenceModel(weights=(0.5, 0.5), q=(1, 1), p=(3, 3), v=(5, 5), directions=(MAXIMIZE, MAXIMIZE))
    x = np.array([[10.0, 6.0], [8.0, 10.0], [6.0, 8.0]])
    # ideal (10, 10), anti (6, 6)
    # row 0: vs ideal deltas (0, -4): c=(1, 0), C=0.5, d2=0.5 (not > C) -> 0.5; anti beats: deltas (-4, 0): 0.5
    # row 1: vs ideal (-2, 0): c=(0.5, 1) C=0.75; anti beats (-2, -4): c=(0.5, 0) C=0.25, d2=0.5 -> 0.25*0.5/0.75
    # row 2: vs ideal (-4, -2): c=(0, 0.5) C=0.25, d1=0.5 -> 0.25*0.5/0.75; anti beats (0, -2): C=0.75
    expected = [0.5 - 0.5 + 1, 0.75 - 0.25 * 0.5 / 0.75 + 1, 0.25 * 0.5 / 0.75 - 0.75 + 1]
    np.testing.assert_allclose(score_electre3(x, prefs).values, expected, atol=1e-12)


def test_literal_profile_directions_are_constant():
    rng = np.random.default_rng(4)
    for _ in range(50):
        x = rng.uniform(0, 100, (6, 8))
        np.testing.assert_allclose(_electre_oracle(x, PreferenceModel(), literal=True), 1.0)


def test_electre_matches_scalar_oracle_fuzz():
    rng = np.random.default_rng(7)
    for _ in range(10_000 // 20):
        x = rng.uniform(0, 1, (20, 8)) * np.array([2500, 30, 75, 60, 4, 4000, 10, 1])
        q = rng.uniform(0, 1, 8) * np.array([10, 1, 5, 1, 0.5, 50, 2, 0.2])
        p = q + rng.uniform(0, 1, 8) * np.array([50, 5, 20, 5, 1, 200, 4, 0.5])
        v = p + rng.uniform(0, 1, 8) * np.array([1000, 30, 40, 30, 3, 3000, 8, 1])
        w = rng.uniform(0.01, 1, 8)
        dirs = tuple(rng.choice([MAXIMIZE, MINIMIZE], 8))
        prefs = PreferenceModel.normalized(w, q=tuple(q), p=tuple(p), v=tuple(v), directions=dirs)
        got = score_electre3(x, prefs).values
        np.testing.assert_allclose(got, _electre_oracle(x, prefs), atol=1e-12)
        assert np.all((got >= 0) & (got <= 2))


def test_credibility_bounds_fuzz():
    rng = np.random.default_rng(8)
    prefs = PreferenceModel()
    scale = np.array(prefs.v) * 1.5
    delta = rng.uniform(-1, 1, (10_000, 8)) * scale
    s = credibility(delta, prefs)
    assert s.shape == (10_000,)
    assert s.min() >= 0.0 and s.max() <= 1.0
    assert np.all(credibility(np.zeros((3, 8)), prefs) == 1.0)


def test_credibility_monotone_in_delta_fuzz():
    rng = np.random.default_rng(9)
    prefs = PreferenceModel()
    scale = np.array(prefs.v) * 1.5
    delta = rng.uniform(-1, 1, (10_000, 8)) * scale
    j = rng.integers(0, 8, 10_000)
    better = delta.copy()
    better[np.arange(10_000), j] += rng.uniform(0, 1, 10_000) * scale[j]
    assert np.all(credibility(better, prefs) >= credibility(delta, prefs) - 1e-12)


def test_ideal_attempt_scores_highest():
    rng = np.random.default_rng(10)
    prefs = PreferenceModel()
    for _ in range(200):
        x = rng.uniform(0, 1, (12, 8)) * np.array([2500, 30, 75, 60, 4, 4000, 10, 1])
        ideal = np.where(prefs.sign > 0, x.max(axis=0), x.min(axis=0))
        x[rng.integers(0, 12)] = ideal
        v = score_electre3(x, prefs).values
        assert v.max() == v[np.all(x == ideal, axis=1)][0]


# -------------------------------------------------------------- properties


METHODS = [score_wsa, score_topsis, score_electre3]
_matrix = st.integers(0, 2**32 - 1).map(
    lambda s: np.random.default_rng(s).uniform(0, 1, (8, 8)) * np.array([2500, 30, 75, 60, 4, 4000, 10, 1]) + np.array([25, 0, 15, 0, 1, 400, 0, 0])
)


def _rank(values, i):
    return int(np.sum(values > values[i] + 1e-12))


@pytest.mark.parametrize("fn", METHODS, ids=["wsa", "topsis", "electre3"])
@settings(max_examples=200, deadline=None)
@given(x=_matrix, i=st.integers(0, 7), j=st.integers(0, 7), step=st.floats(0.01, 2.0))
def test_improving_a_criterion_never_lowers_rank(fn, x, i, j, step):
    prefs = PreferenceModel()
    before = _rank(fn(x, prefs).values, i)
    y = x.copy()
    y[i, j] += prefs.sign[j] * step * (x[:, j].std() + 1.0)
    assume(np.all(y >= 0))
    assert _rank(fn(y, prefs).values, i) <= before


@pytest.mark.parametrize("fn", METHODS, ids=["wsa", "topsis", "electre3"])
@settings(max_examples=100, deadline=None)
@given(x=_matrix, seed=st.integers(0, 2**32 - 1))
def test_permutation_equivariance(fn, x, seed):
    perm = np.random.default_rng(seed).permutation(len(x))
    prefs = PreferenceModel()
    np.testing.assert_allclose(fn(x[perm], prefs).values, fn(x, prefs).values[perm], atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(x=_matrix, j=st.integers(0, 7), a=st.floats(0.1, 100.0), b=st.floats(-100.0, 100.0))
def test_wsa_affine_rank_invariance(x, j, a, b):
    prefs = PreferenceModel()
    y = x.copy()
    y[:, j] = a * y[:, j] + b
    np.testing.assert_allclose(score_wsa(y, prefs).values, score_wsa(x, prefs).values, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(x=_matrix, j=st.integers(0, 7), a=st.floats(0.1, 100.0))
def test_topsis_scale_invariance(x, j, a):
    prefs = PreferenceModel()
    y = x.copy()
    y[:, j] = a * y[:, j]
    np.testing.assert_allclose(score_topsis(y, prefs).values, score_topsis(x, prefs).values, atol=1e-9)


def test_topsis_is_not_shift_invariant():
    # vector normalisation depends on the origin, so only pure rescaling is harmless
    x = np.array([[1.0, 3.0], [2.0, 1.0], [3.0, 2.0]])
    y = x + np.array([10.0, 0.0])
    assert not np.allclose(score_topsis(x, TWO_MAX).values, score_topsis(y, TWO_MAX).values)


# ------------------------------------------------------------------ models


def test_preference_validation():
    with pytest.raises(ScoringError):
        PreferenceModel(weights=(0.5, 0.6), q=(0, 0), p=(1, 1), v=(2, 2), directions=(MAXIMIZE, MAXIMIZE))
    with pytest.raises(ScoringError):
        PreferenceModel(weights=(0.5, 0.5), q=(2, 0), p=(1, 1), v=(2, 2), directions=(MAXIMIZE, MAXIMIZE))
    with pytest.raises(ScoringError):
        PreferenceModel(weights=(0.5, 0.5), q=(0,), p=(1, 1), v=(2, 2), directions=(MAXIMIZE, MAXIMIZE))
    with pytest.raises(ScoringError):
        PreferenceModel(weights=(0.5, 0.5), q=(0, 0), p=(1, 1), v=(2, 2), directions=(MAXIMIZE, "up"))
    with pytest.raises(ScoringError):
        score_wsa(np.array([[np.nan] * 8]), PreferenceModel())
    with pytest.raises(ScoringError):
        score_wsa(np.zeros((0, 8)), PreferenceModel())
    with pytest.raises(ScoringError):
        ScoreVector("wsa", np.array([-1.0]))


def test_preferences_file_round_trip(tmp_path):
    prefs = PreferenceModel.normalized([1, 2, 3, 4, 5, 6, 7, 8])
    path = tmp_path / "prefs.json"
    path.write_text(__import__("json").dumps(prefs.to_dict()))
    assert load_preferences(path) == prefs


def test_criteria_matrix_cloud_in_percent(rng):
    table = random_table(rng, 10)
    m = criteria_matrix(table)
    np.testing.assert_allclose(m[:, 3], [a.criteria[3] * 100 for a in table.attempts])


def test_unknown_method_and_empty_table(rng):
    table = random_table(rng, 5)
    with pytest.raises(ScoringError):
        score(table, "ahp")
    empty = type(table)([], table.horizon, table.satellites)
    assert score(empty, "topsis").values.size == 0


# ----------------------------------------------------------- attach_scores


def test_attach_scores_copy_rule():
    rng = np.random.default_rng(3)
    inst = None
    while inst is None or not inst.copy_map:
        table = random_table(rng, 24, stereo_prob=0.9)
        inst = assemble(table)
    sv = score(table, "electre3")
    out = attach_scores(inst, sv)
    for c, o in inst.copy_map.items():
        assert out.scores[c] == out.scores[o]
    with pytest.raises(ScoringError):
        attach_scores(inst, ScoreVector("wsa", np.ones(3)))


def test_zero_scores_give_zero_objective(rng):
    inst = assemble(random_table(rng, 12))
    inst = attach_scores(inst, ScoreVector("wsa", np.zeros(inst.n - len(inst.copy_map))))
    assert solve_exact(inst).objective == 0.0


def test_permuted_attempts_keep_optimum():
    rng = np.random.default_rng(21)
    for _ in range(10):
        table = random_table(rng, 14)
        inst = attach_scores(assemble(table), score(table, "wsa"))
        perm = rng.permutation(len(table))
        inverse = np.argsort(perm)
        atts = [table.attempts[k] for k in perm]
        atts = [type(a)(**{**a.__dict__, "attempt_id": k}) for k, a in enumerate(atts)]
        pairs = [(int(inverse[a]), int(inverse[b])) for a, b in table.stereo_pairs]
        shuffled = type(table)(atts, table.horizon, table.satellites, table.requests, sorted(pairs), {})
        base = assemble(shuffled)
        scores = np.empty(base.n)
        orig = attach_scores(inst, score(table, "wsa")).scores
        scores[: len(atts)] = orig[perm]
        for c, o in base.copy_map.items():
            scores[c] = scores[o]
        assert solve_exact(base.with_scores(scores)).objective == pytest.approx(solve_exact(inst).objective, abs=1e-9)
