import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftkit.core import IN_DOMAIN, SHIFTED
from shiftkit.errors import EmptyDatasetError, SingleClassError, ValidationError
from shiftkit.retention import (
    Ordering,
    RetentionCurve,
    ScoredSample,
    error_retention_curve,
    f1_at,
    f1_retention_curve,
    r_auc,
    retention_order,
    roc_auc,
    subsample_curve,
)

from . import oracles


def samples(errors, uncertainties, tags=None):
    tags = tags or [IN_DOMAIN] * len(errors)
    return [ScoredSample(f"s{i:04d}", e, u, t) for i, (e, u, t) in enumerate(zip(errors, uncertainties, tags))]


def test_scored_sample_invariants():
    with pytest.raises(ValidationError):
        ScoredSample("a", -1.0, 0.0)
    with pytest.raises(ValidationError):
        ScoredSample("a", 1.0, math.nan)


def test_empty_dataset():
    with pytest.raises(EmptyDatasetError):
        error_retention_curve([])
    with pytest.raises(EmptyDatasetError):
        f1_retention_curve([], 1.0)


@pytest.mark.parametrize("e", [0.0, 1.0, 2.5, 7.0])
@pytest.mark.parametrize("n", [1, 2, 7, 50])
def test_constant_error_closed_form(e, n):
    rng = np.random.default_rng(n)
    c = error_retention_curve(samples([e] * n, rng.normal(size=n)))
    np.testing.assert_allclose(c.value, e * np.arange(n + 1) / n, rtol=0, atol=1e-12)
    assert abs(r_auc(c) - e / 2) <= 1e-12


def test_hand_three_point_curve():
    c = error_retention_curve(samples([0.0, 4.0], [1.0, 2.0]))
    assert c.points == [(0.0, 0.0), (0.5, 0.0), (1.0, 2.0)]
    assert r_auc(c) == 0.5
    direct = RetentionCurve(np.array([0, 0.5, 1.0]), np.array([0, 0, 2.0]))
    assert r_auc(direct) == 0.5


def test_zero_curve():
    c = error_retention_curve(samples([0.0] * 5, range(5)))
    assert not c.value.any() and r_auc(c) == 0.0


def test_orderings():
    s = samples([3.0, 1.0, 2.0], [0.1, 0.9, 0.5])
    assert retention_order(s, "by_uncertainty") == [0, 2, 1]
    assert retention_order(s, "optimal") == [1, 2, 0]
    assert sorted(retention_order(s, "random", seed=3)) == [0, 1, 2]
    assert retention_order(s, "random", seed=3) == retention_order(s, "random", seed=3)


def test_tie_break_by_id():
    s = [ScoredSample("b", 5.0, 1.0), ScoredSample("a", 1.0, 1.0)]
    assert retention_order(s) == [1, 0]
    assert error_retention_curve(s).value.tolist() == [0.0, 0.5, 3.0]


def test_f1_all_acceptable():
    n = 6
    c = f1_retention_curve(samples([0.1] * n, range(n)), threshold=1.0)
    k = np.arange(n + 1)
    np.testing.assert_allclose(c.value, 2 * k / (k + n), atol=1e-15)
    assert c.value[-1] == 1.0


def test_f1_none_acceptable():
    c = f1_retention_curve(samples([5.0] * 4, range(4)), threshold=1.0)
    assert not c.value.any()


def test_f1_half_acceptable_ranked_well():
    c = f1_retention_curve(samples([0.1, 0.2, 3.0, 4.0], [1, 2, 3, 4]), threshold=1.0)
    assert c.value[2] == 1.0


def test_mse_threshold_is_strict():
    c = f1_retention_curve(samples([1.0], [0.0]), threshold=1.0)
    assert c.value.tolist() == [0.0, 0.0]


def test_f1_at_grid():
    c = RetentionCurve(np.arange(21) / 20, np.arange(21) / 100)
    assert f1_at(c, 1.0) == c.value[-1]
    assert f1_at(c, 0.0) == c.value[0]
    assert f1_at(c, 0.95) == c.value[19]
    assert f1_at(c, 0.951) == c.value[20]
    c7 = RetentionCurve(np.arange(8) / 7, np.arange(8.0))
    assert f1_at(c7, 0.95) == 7.0


def test_roc_auc_examples():
    tags = [IN_DOMAIN] * 3 + [SHIFTED] * 3
    assert roc_auc(samples([0] * 6, [1, 2, 3, 4, 5, 6], tags)) == 1.0
    assert roc_auc(samples([0] * 6, [2] * 6, tags)) == 0.5
    tags = [IN_DOMAIN, IN_DOMAIN, SHIFTED, SHIFTED]
    assert roc_auc(samples([0] * 4, [1, 2, 2, 3], tags)) == 0.875
    with pytest.raises(SingleClassError):
        roc_auc(samples([0, 0], [1, 2]))


def test_subsample_keeps_endpoints():
    c = error_retention_curve(samples(list(np.linspace(0, 1, 5000)), range(5000)))
    s = subsample_curve(c, 1000)
    assert len(s) == 1000
    assert s.retention[0] == 0.0 and s.retention[-1] == 1.0
    assert subsample_curve(s, 1000) is s


# -- properties and oracle equivalence


@st.composite
def datasets(draw, max_n=30):
    n = draw(st.integers(1, max_n))
    errs = draw(st.lists(st.floats(0, 10, allow_nan=False), min_size=n, max_size=n))
    # a small value alphabet makes uncertainty ties common
    uncs = draw(st.lists(st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0, -1.0]) | st.floats(-5, 5), min_size=n, max_size=n))
    shifted = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return [ScoredSample(f"id{i:03d}", e, u, SHIFTED if s else IN_DOMAIN) for i, (e, u, s) in enumerate(zip(errs, uncs, shifted))]


def as_tuples(ss):
    return [(s.error, s.uncertainty, s.id) for s in ss]


@settings(max_examples=200)
@given(datasets(), st.floats(0.1, 8))
def test_matches_bruteforce(ss, threshold):
    t = as_tuples(ss)
    xs, ys = oracles.error_retention(t)
    c = error_retention_curve(ss)
    np.testing.assert_allclose(c.retention, xs, atol=0)
    np.testing.assert_allclose(c.value, ys, rtol=0, atol=1e-9)
    assert abs(c.auc - oracles.trapezoid(xs, ys)) <= 1e-9
    xs, ys = oracles.f1_retention(t, threshold)
    f = f1_retention_curve(ss, threshold)
    np.testing.assert_allclose(f.value, ys, rtol=0, atol=1e-9)
    assert abs(f.auc - oracles.trapezoid(xs, ys)) <= 1e-9


@settings(max_examples=200)
@given(datasets())
def test_ordering_laws(ss):
    opt = error_retention_curve(ss, Ordering.OPTIMAL).auc
    unc = error_retention_curve(ss).auc
    assert opt <= unc + 1e-12
    rand = [error_retention_curve(ss, Ordering.RANDOM, seed).auc for seed in range(5)]
    assert min(rand) >= opt - 1e-12


@settings(max_examples=200)
@given(datasets())
def test_error_curve_non_decreasing(ss):
    assert np.all(np.diff(error_retention_curve(ss).value) >= 0)


@settings(max_examples=200)
@given(datasets(), st.floats(0.1, 8))
def test_f1_at_full_retention(ss, threshold):
    a = sum(s.error < threshold for s in ss) / len(ss)
    expected = 2 * a / (a + 1)
    assert f1_retention_curve(ss, threshold).value[-1] == pytest.approx(expected, abs=1e-12)


@settings(max_examples=200)
@given(datasets(max_n=20), st.randoms(use_true_random=False))
def test_invariant_to_input_order(ss, rnd):
    shuffled = list(ss)
    rnd.shuffle(shuffled)
    for ordering in ("by_uncertainty", "optimal"):
        assert error_retention_curve(ss, ordering).value.tolist() == error_retention_curve(shuffled, ordering).value.tolist()
    assert error_retention_curve(ss, "random", 4).value.tolist() == error_retention_curve(shuffled, "random", 4).value.tolist()


@settings(max_examples=200)
@given(datasets())
def test_roc_auc_oracle_and_monotone_invariance(ss):
    ins = [s.uncertainty for s in ss if not s.tag.shifted]
    outs = [s.uncertainty for s in ss if s.tag.shifted]
    if not ins or not outs:
        with pytest.raises(SingleClassError):
            roc_auc(ss)
        return
    auc = roc_auc(ss)
    assert abs(auc - oracles.roc_auc(ins, outs)) <= 1e-9
    # strictly increasing on the observed values: exponential of the dense rank
    levels = {u: math.exp(0.7 * r) for r, u in enumerate(sorted({s.uncertainty for s in ss}))}
    warped = [ScoredSample(s.id, s.error, levels[s.uncertainty], s.tag) for s in ss]
    assert abs(roc_auc(warped) - auc) <= 1e-12
