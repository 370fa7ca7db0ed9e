"""Time-domain window statistics and the 9-dimensional {variance, MAD, WL} feature vector.

Feature order is channel-major: ``[ch0.var, ch0.mad, ch0.wl, ch1.var, ...]``.
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .signal_io import Window

TD_FEATURE_NAMES = ("var", "mad", "wl")
TD_FEATURE_ORDER = "td:channel-major:var,mad,wl"


class DegenerateDistributionError(ValueError):
    """Kurtosis is undefined for a zero-variance window."""


def _as_row(samples, min_len: int) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < min_len:
        raise ValueError(f"need at least {min_len} sample(s), got {x.size}")
    return x


def _stats(samples, min_len: int = 2) -> np.ndarray:
    x = _as_row(samples, min_len)
    return kernels.window_stats_batch(x[None, :])[0]


def mean(samples) -> float:
    x = _as_row(samples, 1)
    return float(x.sum() / x.size)


def variance(samples) -> float:
    """Sample variance with the ``N - 1`` denominator."""
    return float(_stats(samples)[1])


def std_dev(samples) -> float:
    return math.sqrt(variance(samples))


def kurtosis(samples) -> float:
    """Fourth central moment (``1/N``) over ``sigma**4``, where sigma uses the ``N - 1`` variance.

    The mixed normalization is deliberate; it differs from the textbook
    estimator by ``((N - 1) / N) ** 2``.
    """
    st = _stats(samples)
    var = st[1]
    if var == 0.0:
        raise DegenerateDistributionError("degenerate distribution: zero variance")
    return float(st[4] / (var * var))


def waveform_length(samples) -> float:
    return float(_stats(samples)[3])


def mad(samples) -> float:
    """Mean absolute deviation about the mean."""
    x = _as_row(samples, 1)
    if x.size == 1:
        return 0.0
    return float(_stats(x)[2])


def extract_td(window: Window | np.ndarray) -> np.ndarray:
    samples = window.samples if isinstance(window, Window) else np.atleast_2d(window)
    if samples.shape[-1] < 2:
        raise ValueError("time-domain features need window_len >= 2")
    return kernels.td_features_batch(samples).ravel()


def extract_td_batch(windows: np.ndarray) -> np.ndarray:
    """Features for a ``(n_windows, channels, window_len)`` stack -> ``(n_windows, 3*channels)``."""
    windows = np.asarray(windows, dtype=np.float64)
    n, c, length = windows.shape
    if length < 2:
        raise ValueError("time-domain features need window_len >= 2")
    return kernels.td_features_batch(windows.reshape(n * c, length)).reshape(n, 3 * c)
