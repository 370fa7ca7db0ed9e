import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from myohand import features_td as td
from myohand.signal_io import Window
from oracles import bf_kurtosis, bf_mad, bf_variance, bf_waveform_length

pytestmark = pytest.mark.usefixtures("backend")

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
samples = arrays(np.float64, st.integers(2, 200), elements=finite)


def test_mean_examples():
    assert td.mean([1, 2, 3, 4]) == 2.5
    assert td.mean([7.25] * 13) == 7.25
    assert td.mean([-1, 1]) == 0
    with pytest.raises(ValueError):
        td.mean([])


def test_variance_examples():
    assert td.variance([1, 2, 3, 4]) == pytest.approx(5 / 3, rel=1e-15)
    assert td.variance([3.0] * 10) == 0
    assert td.variance(np.array([1, 2, 3, 4]) + 100) == pytest.approx(5 / 3, rel=1e-12)
    with pytest.raises(ValueError):
        td.variance([1.0])


def test_std_examples():
    assert td.std_dev([1, 2, 3, 4]) == pytest.approx(math.sqrt(5 / 3), rel=1e-15)
    assert td.std_dev([2.0, 2.0]) == 0
    assert td.std_dev(-3 * np.array([1, 2, 3, 4])) == pytest.approx(3 * math.sqrt(5 / 3), rel=1e-14)


@pytest.mark.parametrize("n, expected", [(4, 0.5625), (128, 0.98443603515625)])
def test_kurtosis_alternating(n, expected):
    # mu = 0, fourth moment 1, variance n/(n-1): kurt = ((n-1)/n)^2
    x = [(-1) ** i for i in range(n)]
    assert td.kurtosis(x) == pytest.approx(expected, rel=1e-14)
    assert bf_kurtosis(x) == pytest.approx(expected, rel=1e-14)


def test_kurtosis_constant_is_degenerate():
    with pytest.raises(td.DegenerateDistributionError, match="degenerate distribution"):
        td.kurtosis([5.0] * 8)


def test_kurtosis_gaussian_monte_carlo():
    x = np.random.default_rng(42).standard_normal(100_000)
    assert abs(td.kurtosis(x) - 3.0) < 0.2


def test_waveform_length_examples():
    assert td.waveform_length([0, 1, 0, 1]) == 3
    assert td.waveform_length([4.0] * 5) == 0
    assert td.waveform_length([1, 2, 5, 9, 20]) == 19
    with pytest.raises(ValueError):
        td.waveform_length([1.0])


def test_mad_examples():
    assert td.mad([1, 2, 3, 4]) == 1.0
    assert td.mad([6.0] * 9) == 0
    assert td.mad([3.0]) == 0
    with pytest.raises(ValueError):
        td.mad([])


@settings(max_examples=60, deadline=None)
@given(samples)
def test_matches_brute_force(x):
    r = list(x)
    assert td.variance(x) == pytest.approx(bf_variance(r), rel=1e-9, abs=1e-9)
    assert td.mad(x) == pytest.approx(bf_mad(r), rel=1e-9, abs=1e-9)
    assert td.waveform_length(x) == pytest.approx(bf_waveform_length(r), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(samples)
def test_mad_le_std(x):
    assert td.mad(x) <= td.std_dev(x) * (1 + 1e-12) + 1e-12


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(4, 100), elements=st.floats(-10, 10)), st.floats(-50, 50))
def test_translation_invariance(x, c):
    if np.ptp(x) < 1e-3:
        return
    y = x + c
    for f in (td.variance, td.std_dev, td.kurtosis, td.mad):
        assert f(y) == pytest.approx(f(x), rel=1e-9)
    assert td.waveform_length(y) == pytest.approx(td.waveform_length(x), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(4, 100), elements=st.floats(-10, 10)), st.floats(0.01, 100))
def test_homogeneity(x, k):
    if np.ptp(x) < 1e-3:
        return
    y = k * x
    assert td.variance(y) == pytest.approx(k * k * td.variance(x), rel=1e-9)
    assert td.mad(y) == pytest.approx(k * td.mad(x), rel=1e-9)
    assert td.waveform_length(y) == pytest.approx(k * td.waveform_length(x), rel=1e-9)
    assert td.kurtosis(y) == pytest.approx(td.kurtosis(x), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(samples)
def test_non_negative(x):
    assert td.variance(x) >= 0 and td.mad(x) >= 0 and td.waveform_length(x) >= 0 and td.std_dev(x) >= 0


def test_extract_td_zero_window():
    np.testing.assert_array_equal(td.extract_td(Window(np.zeros((3, 128)))), np.zeros(9))


def test_extract_td_locality():
    w = np.zeros((3, 128))
    w[1] = np.sin(np.arange(128) / 3.0)
    f = td.extract_td(Window(w))
    assert np.all(f[:3] == 0) and np.all(f[6:] == 0)
    assert np.all(f[3:6] > 0)


def test_extract_td_matches_oracle_and_order():
    rng = np.random.default_rng(5)
    w = rng.standard_normal((4, 128))
    f = td.extract_td(Window(w))
    assert f.shape == (12,)
    expected = [fn(list(ch)) for ch in w for fn in (bf_variance, bf_mad, bf_waveform_length)]
    np.testing.assert_allclose(f, expected, rtol=1e-12)


def test_extract_td_batch_equals_single():
    w = np.random.default_rng(6).standard_normal((7, 3, 64))
    batch = td.extract_td_batch(w)
    for i in range(7):
        np.testing.assert_array_equal(batch[i], td.extract_td(Window(w[i])))
