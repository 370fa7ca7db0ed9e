# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled window kernels: radix-2 FFT, one-sided power spectrum, window statistics.

Every routine works on a batch of windows laid out as a C-contiguous
``(n_windows, window_len)`` array so a single call amortizes interpreter overhead.
"""
import numpy as np
from libc.math cimport fabs

NAME = "cython"

_twiddle_cache = {}


cdef inline bint _is_pow2(Py_ssize_t n):
    return n >= 2 and (n & (n - 1)) == 0


def _twiddles(Py_ssize_t n):
    tw = _twiddle_cache.get(n)
    if tw is None:
        k = np.arange(n // 2, dtype=np.float64)
        tw = (np.cos(2.0 * np.pi * k / n), -np.sin(2.0 * np.pi * k / n))
        _twiddle_cache[n] = tw
    return tw


def _bitrev(Py_ssize_t n):
    cdef Py_ssize_t bits = 0, i, j, v
    while (1 << bits) < n:
        bits += 1
    out = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] rv = out
    for i in range(n):
        v = i
        j = 0
        for _ in range(bits):
            j = (j << 1) | (v & 1)
            v >>= 1
        rv[i] = j
    return out


cdef void _fft_row(double* re, double* im, Py_ssize_t n,
                   const double* wr, const double* wi, const Py_ssize_t* rev) noexcept nogil:
    cdef Py_ssize_t i, j, m, half, start, k, step, a, b
    cdef double tr, ti, ur, ui, cr, ci
    for i in range(n):
        j = rev[i]
        if j > i:
            tr = re[i]; re[i] = re[j]; re[j] = tr
            ti = im[i]; im[i] = im[j]; im[j] = ti
    m = 2
    while m <= n:
        half = m >> 1
        step = n // m
        start = 0
        while start < n:
            for k in range(half):
                cr = wr[k * step]
                ci = wi[k * step]
                a = start + k
                b = a + half
                tr = cr * re[b] - ci * im[b]
                ti = cr * im[b] + ci * re[b]
                ur = re[a]
                ui = im[a]
                re[a] = ur + tr
                im[a] = ui + ti
                re[b] = ur - tr
                im[b] = ui - ti
            start += m
        m <<= 1


def fft_batch(x):
    """Radix-2 decimation-in-time FFT of every row of a complex 2-D array."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 2:
        raise ValueError("expected a 2-D batch of windows")
    cdef Py_ssize_t rows = x.shape[0], n = x.shape[1], r
    if not _is_pow2(n):
        raise ValueError(f"FFT length must be a power of two >= 2, got {n}")
    re_arr = np.ascontiguousarray(x.real)
    im_arr = np.ascontiguousarray(x.imag)
    wr_arr, wi_arr = _twiddles(n)
    rev_arr = _bitrev(n)
    cdef double[:, ::1] re = re_arr
    cdef double[:, ::1] im = im_arr
    cdef const double[::1] wr = wr_arr
    cdef const double[::1] wi = wi_arr
    cdef const Py_ssize_t[::1] rev = rev_arr
    if rows > 0:
        with nogil:
            for r in range(rows):
                _fft_row(&re[r, 0], &im[r, 0], n, &wr[0], &wi[0], &rev[0])
    return re_arr + 1j * im_arr


def power_spectrum_batch(x):
    """One-sided power ``|X_k|^2 / N`` for ``k < N/2`` of every real row."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D batch of windows")
    cdef Py_ssize_t rows = x.shape[0], n = x.shape[1], r, k, half
    if not _is_pow2(n):
        raise ValueError(f"FFT length must be a power of two >= 2, got {n}")
    half = n // 2
    wr_arr, wi_arr = _twiddles(n)
    rev_arr = _bitrev(n)
    out = np.empty((rows, half), dtype=np.float64)
    re_buf = np.empty(n, dtype=np.float64)
    im_buf = np.empty(n, dtype=np.float64)
    cdef const double[:, ::1] src = x
    cdef double[:, ::1] dst = out
    cdef double[::1] re = re_buf
    cdef double[::1] im = im_buf
    cdef const double[::1] wr = wr_arr
    cdef const double[::1] wi = wi_arr
    cdef const Py_ssize_t[::1] rev = rev_arr
    cdef double inv_n = 1.0 / n
    if rows > 0:
        with nogil:
            for r in range(rows):
                for k in range(n):
                    re[k] = src[r, k]
                    im[k] = 0.0
                _fft_row(&re[0], &im[0], n, &wr[0], &wi[0], &rev[0])
                for k in range(half):
                    dst[r, k] = (re[k] * re[k] + im[k] * im[k]) * inv_n
    return out


def window_stats_batch(x):
    """Per-row ``[mean, variance(N-1), mad, waveform_length, fourth central moment(1/N)]``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D batch of windows")
    cdef Py_ssize_t rows = x.shape[0], n = x.shape[1], r, i
    if n < 2:
        raise ValueError("window statistics need at least 2 samples")
    out = np.empty((rows, 5), dtype=np.float64)
    cdef const double[:, ::1] src = x
    cdef double[:, ::1] dst = out
    cdef double s, mu, d, d2, ss, sa, s4, wl
    if rows > 0:
        with nogil:
            for r in range(rows):
                s = 0.0
                for i in range(n):
                    s += src[r, i]
                mu = s / n
                ss = 0.0
                sa = 0.0
                s4 = 0.0
                wl = 0.0
                for i in range(n):
                    d = src[r, i] - mu
                    d2 = d * d
                    ss += d2
                    sa += fabs(d)
                    s4 += d2 * d2
                for i in range(n - 1):
                    wl += fabs(src[r, i + 1] - src[r, i])
                dst[r, 0] = mu
                dst[r, 1] = ss / (n - 1)
                dst[r, 2] = sa / n
                dst[r, 3] = wl
                dst[r, 4] = s4 / n
    return out


def td_features_batch(x):
    """Per-row ``[variance, mad, waveform_length]`` without the fourth-moment pass."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D batch of windows")
    cdef Py_ssize_t rows = x.shape[0], n = x.shape[1], r, i
    if n < 2:
        raise ValueError("window statistics need at least 2 samples")
    out = np.empty((rows, 3), dtype=np.float64)
    cdef const double[:, ::1] src = x
    cdef double[:, ::1] dst = out
    cdef double s, mu, d, ss, sa, wl
    if rows > 0:
        with nogil:
            for r in range(rows):
                s = 0.0
                for i in range(n):
                    s += src[r, i]
                mu = s / n
                ss = 0.0
                sa = 0.0
                wl = 0.0
                for i in range(n):
                    d = src[r, i] - mu
                    ss += d * d
                    sa += fabs(d)
                for i in range(n - 1):
                    wl += fabs(src[r, i + 1] - src[r, i])
                dst[r, 0] = ss / (n - 1)
                dst[r, 1] = sa / n
                dst[r, 2] = wl
    return out
