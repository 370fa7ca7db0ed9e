import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from myohand import features_fd as fd
from myohand.signal_io import Window
from oracles import bf_power_spectrum, naive_dft

pytestmark = pytest.mark.usefixtures("backend")


def tone(bin_index, n=128, amp=1.0, phase=0.0):
    t = np.arange(n)
    return amp * np.cos(2 * np.pi * bin_index * t / n + phase)


def test_fft_impulse():
    x = np.zeros(128)
    x[0] = 1
    np.testing.assert_allclose(fd.fft(x), np.ones(128), atol=1e-15)


def test_fft_dc():
    out = fd.fft(np.full(128, 0.75))
    assert out[0] == pytest.approx(96.0)
    assert np.max(np.abs(out[1:])) < 1e-12


def test_fft_random_matches_dft():
    x = np.random.default_rng(0).standard_normal(128)
    ref = np.array(naive_dft(list(x)))
    assert np.max(np.abs(fd.fft(x) - ref)) / np.max(np.abs(ref)) < 1e-9


def test_fft_rejects_bad_length():
    with pytest.raises(ValueError, match="power of two"):
        fd.fft(np.zeros(100))
    with pytest.raises(ValueError):
        fd.fft([1.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_fft_linearity(log_n, a, b, seed):
    n = 2**log_n
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(n), rng.standard_normal(n)
    lhs = fd.fft(a * x + b * y)
    rhs = a * fd.fft(x) + b * fd.fft(y)
    scale = max(np.max(np.abs(rhs)), 1e-12)
    assert np.max(np.abs(lhs - rhs)) / scale < 1e-9


def test_power_spectrum_pure_tone():
    spec = fd.power_spectrum(tone(10))
    assert spec.bins.shape == (64,)
    assert spec.bin_width_hz == 15.625
    assert int(np.argmax(spec.bins)) == 10
    others = np.delete(spec.bins, 10)
    assert np.max(others) <= 1e-9 * spec.bins[10]
    # |X_10| = N/2 for a unit cosine -> power N/4
    assert spec.bins[10] == pytest.approx(32.0, rel=1e-12)


def test_power_spectrum_zero_and_oracle():
    assert np.all(fd.power_spectrum(np.zeros(128)).bins == 0)
    x = np.random.default_rng(1).standard_normal(32)
    np.testing.assert_allclose(fd.power_spectrum(x).bins, bf_power_spectrum(list(x)), rtol=1e-10)


def test_parseval():
    x = np.random.default_rng(2).standard_normal(128)
    X = fd.fft(x)
    assert np.sum(np.abs(X) ** 2) / 128 == pytest.approx(np.sum(x**2), rel=1e-9)


BINS = (3, 7, 12, 20, 25, 33, 40, 55)


def tone_windows(bins=BINS, channels=3):
    return [Window(np.tile(tone(b, amp=1 + 0.1 * i), (channels, 1))) for i, b in enumerate(bins)]


def test_select_bins_recovers_tones():
    sel = fd.select_bins(tone_windows())
    assert sel.indices == (BINS,) * 3


def test_select_bins_tie_break_flat():
    flat = np.zeros((1, 2, 128))
    flat[0, :, 0] = 1.0  # impulse: flat spectrum
    sel = fd.select_bins(flat)
    assert sel.indices == (tuple(range(8)),) * 2


def test_select_bins_single_window_is_its_own_top8():
    w = np.random.default_rng(3).standard_normal((3, 128))
    sel = fd.select_bins([Window(w)])
    for ch in range(3):
        p = fd.power_spectrum(w[ch]).bins
        assert sel.indices[ch] == tuple(sorted(np.argsort(-p)[:8]))


def test_select_bins_empty():
    with pytest.raises(ValueError, match="at least one"):
        fd.select_bins([])


def test_select_bins_permutation_invariant():
    ws = np.random.default_rng(4).standard_normal((12, 3, 128))
    base = fd.select_bins(ws)
    for perm in itertools.islice(itertools.permutations(range(12)), 0, 200, 37):
        assert fd.select_bins(ws[list(perm)]).indices == base.indices


def test_bin_selection_validation():
    with pytest.raises(ValueError):
        fd.BinSelection(((0, 1, 2),))
    with pytest.raises(ValueError):
        fd.BinSelection(((0, 1, 2, 3, 4, 5, 6, 64),))
    with pytest.raises(ValueError):
        fd.BinSelection(((0, 0, 1, 2, 3, 4, 5, 6),))


def test_extract_fd_zero_and_tone():
    sel = fd.select_bins(tone_windows())
    np.testing.assert_array_equal(fd.extract_fd(Window(np.zeros((3, 128))), sel), np.zeros(24))
    f = fd.extract_fd(Window(np.tile(tone(20), (3, 1))), sel)
    for ch in range(3):
        block = f[8 * ch: 8 * ch + 8]
        assert int(np.argmax(block)) == BINS.index(20)
        assert np.sum(block) - block.max() <= 1e-9 * block.max()


def test_extract_fd_matches_composition():
    sel = fd.select_bins(tone_windows())
    w = np.random.default_rng(5).standard_normal((3, 128))
    expected = np.concatenate([np.asarray(bf_power_spectrum(list(w[c])))[list(sel.indices[c])] for c in range(3)])
    np.testing.assert_allclose(fd.extract_fd(Window(w), sel), expected, rtol=1e-10)
    np.testing.assert_allclose(fd.extract_fd_batch(w[None], sel)[0], fd.extract_fd(w, sel), rtol=1e-15)


def test_extract_fd_ignores_unselected_tone():
    sel = fd.select_bins(tone_windows())
    base = np.random.default_rng(6).standard_normal((3, 128))
    extra = np.tile(tone(45, amp=3.0, phase=0.3), (3, 1))
    a = fd.extract_fd(base, sel)
    b = fd.extract_fd(base + extra, sel)
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)


def test_extract_fd_mismatched_selection():
    sel = fd.select_bins(tone_windows(channels=2))
    with pytest.raises(ValueError, match="channels"):
        fd.extract_fd(np.zeros((3, 128)), sel)
    with pytest.raises(ValueError, match="windows"):
        fd.extract_fd(np.zeros((2, 256)), sel)
