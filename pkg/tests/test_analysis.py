import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import spearmanr

from oracles import binned_entropy, brute_acf, histogram_mi
from windforest.analysis import (
    LagNotConvergedWarning,
    LagSelector,
    autocorrelation,
    mi_from_joint,
    mi_profile,
    mutual_information,
    select_embedding_lag,
)


def test_acf_lag_zero_is_one():
    x = np.random.default_rng(1).normal(size=50)
    assert autocorrelation(x, 5)[0] == 1.0


def test_acf_constant_series_rejected():
    with pytest.raises(ValueError, match="zero-variance"):
        autocorrelation(np.full(10, 3.0), 2)


def test_acf_max_lag_too_large():
    with pytest.raises(ValueError):
        autocorrelation(np.arange(5.0), 5)


@pytest.mark.parametrize("n", [2, 4, 10, 100])
def test_acf_alternating(n):
    x = [1.0, -1.0] * (n // 2)
    assert brute_acf(x, 1) == pytest.approx(-(n - 1) / n, abs=1e-15)
    assert autocorrelation(x, 1)[1] == pytest.approx(-(n - 1) / n, abs=1e-15)


@settings(max_examples=60)
@given(st.lists(st.floats(-100, 100), min_size=3, max_size=40).filter(lambda v: np.ptp(v) > 1e-3))
def test_acf_matches_brute_force_bounded_and_reversible(values):
    k = len(values) - 1
    acf = autocorrelation(values, k)
    rev = autocorrelation(values[::-1], k)
    for lag in range(k + 1):
        assert acf[lag] == pytest.approx(brute_acf(values, lag), abs=1e-12)
        assert acf[lag] == pytest.approx(rev[lag], abs=1e-12)
    assert np.all(np.abs(acf) <= 1 + 1e-12)


def test_mi_eight_point_hand_example():
    x = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]
    # pairs (t, t+1) binned to {0,1}: (0,1),(1,0),(0,1),(1,1),(1,0),(0,0),(0,1)
    # joint counts: 00:1 01:3 10:2 11:1, n=7; px: 0->4, 1->3; py: 0->3, 1->4
    hand = (
        1 / 7 * math.log2((1 / 7) / (4 / 7 * 3 / 7))
        + 3 / 7 * math.log2((3 / 7) / (4 / 7 * 4 / 7))
        + 2 / 7 * math.log2((2 / 7) / (3 / 7 * 3 / 7))
        + 1 / 7 * math.log2((1 / 7) / (3 / 7 * 4 / 7))
    )
    assert histogram_mi(x, 1, 2) == pytest.approx(hand, abs=1e-15)
    assert mutual_information(x, 1, 2) == pytest.approx(hand, abs=1e-14)


@settings(max_examples=60)
@given(
    st.lists(st.floats(0, 50), min_size=6, max_size=80).filter(lambda v: np.ptp(v) > 1e-3),
    st.integers(1, 4),
    st.integers(1, 12),
)
def test_mi_matches_pair_enumeration(values, delay, bins):
    est = mutual_information(values, delay, bins)
    assert est >= 0
    assert est == pytest.approx(histogram_mi(values, delay, bins), abs=1e-12)


def test_mi_independent_uniform():
    x = np.random.default_rng(2).uniform(size=10_000)
    assert mutual_information(x, 1, 16) < 0.05


def test_mi_periodic_equals_marginal_entropy():
    pattern = np.random.default_rng(3).uniform(0, 10, 24)
    x = np.tile(pattern, 200)
    h = binned_entropy(x[:-24].tolist(), x.min(), x.max(), 16)
    assert mutual_information(x, 24, 16) == pytest.approx(h, abs=1e-9)


def test_mi_single_bin_is_zero():
    x = np.random.default_rng(4).normal(size=200)
    assert mutual_information(x, 3, 1) == 0.0


def test_mi_errors():
    with pytest.raises(ValueError, match="constant"):
        mutual_information(np.ones(10), 1)
    with pytest.raises(ValueError):
        mutual_information(np.arange(5.0), 4)
    with pytest.raises(ValueError):
        mutual_information(np.arange(5.0), 0)


@given(st.data())
def test_mi_invariant_under_bin_relabeling(data):
    table = np.array(data.draw(st.lists(st.integers(0, 20), min_size=16, max_size=16))).reshape(4, 4)
    if table.sum() == 0:
        table[0, 0] = 1
    rp = data.draw(st.permutations(range(4)))
    cp = data.draw(st.permutations(range(4)))
    assert mi_from_joint(table[np.ix_(rp, cp)]) == pytest.approx(mi_from_joint(table), abs=1e-12)
    assert mi_from_joint(table) >= 0


def test_select_first_crossing():
    assert select_embedding_lag([1.0, 0.5, 0.04, 0.03], 0.05) == 3


def test_select_flat_profile_warns():
    with pytest.warns(LagNotConvergedWarning):
        assert select_embedding_lag([1.0, 1.0, 1.0], 0.05) == 3


def test_select_all_zero_rejected():
    with pytest.raises(ValueError):
        select_embedding_lag([0.0, 0.0])


def test_select_noise_floor():
    assert select_embedding_lag([0.02, 0.019, 0.021], 0.05, noise_floor=0.03) == 1


def test_select_first_minimum_rule():
    assert select_embedding_lag([1.0, 0.6, 0.3, 0.35, 0.1], rule="first_minimum") == 3


def test_select_wind_like_profile_hits_72():
    # exponential decay that reaches 5% of the lag-1 value between delays 71 and 72
    d = np.arange(1, 145)
    rate = math.log(20) / 70.5
    mi = 1.3 * np.exp(-rate * (d - 1)) + 0.0
    assert select_embedding_lag(mi, 0.05) == 72


@given(
    st.lists(st.floats(0, 5), min_size=1, max_size=30),
    st.floats(0.01, 0.98),
    st.floats(0.01, 0.98),
)
def test_select_monotone_in_threshold(tail, a, b):
    mi = [5.0 + 1e-3] + tail
    lo, hi = sorted((a, b))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LagNotConvergedWarning)
        assert select_embedding_lag(mi, hi) <= select_embedding_lag(mi, lo)


def test_profile_iid_noise():
    x = np.random.default_rng(5).uniform(size=10_000)
    prof = mi_profile(x, 10, 16)
    assert np.all(prof.mi_bits < 0.05)
    assert prof.selected_lag == 1
    assert prof.acf[0] == 1.0 and prof.acf.size == 11 and prof.mi_bits.size == 10


def test_profile_ar1_decreasing():
    rng = np.random.default_rng(6)
    x = np.zeros(20_000)
    for t in range(1, x.size):
        x[t] = 0.9 * x[t - 1] + rng.normal()
    prof = mi_profile(x, 20, 16)
    rho = spearmanr(np.arange(1, 21), prof.mi_bits).statistic
    assert rho < -0.95


def test_profile_periodic_peaks_at_period_multiples():
    x = np.tile(np.random.default_rng(7).uniform(0, 10, 12), 300)
    with pytest.warns(LagNotConvergedWarning):
        prof = mi_profile(x, 40, 16)
    assert not prof.converged
    best = prof.mi_bits.max()
    for d in (12, 24, 36):
        assert prof.mi_bits[d - 1] == pytest.approx(best, abs=1e-9)


def test_lag_selector_estimator():
    x = np.random.default_rng(8).uniform(size=5000)
    sel = LagSelector(max_delay=5).fit(x)
    assert sel.selected_lag_ == 1
    assert sel.get_params()["max_delay"] == 5
