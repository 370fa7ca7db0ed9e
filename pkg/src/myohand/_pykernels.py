"""Pure numpy implementations of the window kernels.

Same contracts as the compiled extension; used when it is not built or when
``MYOHAND_BACKEND=python`` is set.
"""
from functools import lru_cache

import numpy as np

NAME = "python"


def _check_batch(x: np.ndarray) -> None:
    if x.ndim != 2:
        raise ValueError("expected a 2-D batch of windows")


def _check_pow2(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise ValueError(f"FFT length must be a power of two >= 2, got {n}")


@lru_cache(maxsize=None)
def _bitrev(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=None)
def _stage_twiddles(m: int) -> np.ndarray:
    k = np.arange(m // 2)
    return np.cos(2.0 * np.pi * k / m) - 1j * np.sin(2.0 * np.pi * k / m)


def fft_batch(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    _check_batch(x)
    rows, n = x.shape
    _check_pow2(n)
    y = x[:, _bitrev(n)]
    m = 2
    while m <= n:
        half = m // 2
        blocks = y.reshape(rows, n // m, m)
        u = blocks[:, :, :half]
        t = blocks[:, :, half:] * _stage_twiddles(m)
        y = np.concatenate((u + t, u - t), axis=2).reshape(rows, n)
        m <<= 1
    return y


def power_spectrum_batch(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    _check_batch(x)
    n = x.shape[1]
    spec = fft_batch(x)[:, : n // 2]
    return (spec.real**2 + spec.imag**2) / n


def window_stats_batch(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    _check_batch(x)
    n = x.shape[1]
    if n < 2:
        raise ValueError("window statistics need at least 2 samples")
    mu = x.sum(axis=1) / n
    d = x - mu[:, None]
    d2 = d * d
    out = np.empty((x.shape[0], 5))
    out[:, 0] = mu
    out[:, 1] = d2.sum(axis=1) / (n - 1)
    out[:, 2] = np.abs(d).sum(axis=1) / n
    out[:, 3] = np.abs(np.diff(x, axis=1)).sum(axis=1)
    out[:, 4] = (d2 * d2).sum(axis=1) / n
    return out


def td_features_batch(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    _check_batch(x)
    n = x.shape[1]
    if n < 2:
        raise ValueError("window statistics need at least 2 samples")
    d = x - (x.sum(axis=1) / n)[:, None]
    out = np.empty((x.shape[0], 3))
    out[:, 0] = (d * d).sum(axis=1) / (n - 1)
    out[:, 1] = np.abs(d).sum(axis=1) / n
    out[:, 2] = np.abs(np.diff(x, axis=1)).sum(axis=1)
    return out
