"""Frequency-domain features: radix-2 FFT power spectra and top-8 bin selection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .signal_io import DEFAULT_RATE_HZ, Window

BINS_PER_CHANNEL = 8
FD_FEATURE_ORDER = "fd:channel-major:selected-bins"


def _is_pow2(n: int) -> bool:
    return n >= 2 and n & (n - 1) == 0


def fft(samples) -> np.ndarray:
    """Radix-2 FFT of a single power-of-two-length sequence."""
    x = np.asarray(samples, dtype=np.complex128).ravel()
    if not _is_pow2(x.size):
        raise ValueError(f"FFT length must be a power of two >= 2, got {x.size}")
    return kernels.fft_batch(x[None, :])[0]


@dataclass(frozen=True)
class Spectrum:
    bins: np.ndarray
    bin_width_hz: float
    channel_index: int = 0


def power_spectrum(samples, sample_rate_hz: float = DEFAULT_RATE_HZ, channel_index: int = 0) -> Spectrum:
    """One-sided power ``|X_k|**2 / N`` for ``k`` in ``[0, N/2)``."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if not _is_pow2(x.size):
        raise ValueError(f"FFT length must be a power of two >= 2, got {x.size}")
    bins = kernels.power_spectrum_batch(x[None, :])[0]
    return Spectrum(bins, sample_rate_hz / x.size, channel_index)


def power_spectra(windows: np.ndarray) -> np.ndarray:
    """Power spectra of a ``(n_windows, channels, window_len)`` stack."""
    windows = np.asarray(windows, dtype=np.float64)
    n, c, length = windows.shape
    if not _is_pow2(length):
        raise ValueError(f"FFT length must be a power of two >= 2, got {length}")
    return kernels.power_spectrum_batch(windows.reshape(n * c, length)).reshape(n, c, length // 2)


@dataclass(frozen=True)
class BinSelection:
    """Per-channel indices of the selected spectrum bins, each row sorted ascending."""

    indices: tuple[tuple[int, ...], ...]
    n_bins: int = 64
    source: str = ""

    def __post_init__(self):
        for ch, row in enumerate(self.indices):
            if len(row) != BINS_PER_CHANNEL:
                raise ValueError(f"channel {ch}: expected {BINS_PER_CHANNEL} bins, got {len(row)}")
            if len(set(row)) != len(row):
                raise ValueError(f"channel {ch}: duplicate bin indices {row}")
            if list(row) != sorted(row):
                raise ValueError(f"channel {ch}: bin indices must be ascending")
            if min(row) < 0 or max(row) >= self.n_bins:
                raise ValueError(f"channel {ch}: bin index out of range [0, {self.n_bins - 1}]")

    @property
    def channel_count(self) -> int:
        return len(self.indices)

    @property
    def window_len(self) -> int:
        return 2 * self.n_bins

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)


def top_bins(mean_power: np.ndarray, k: int = BINS_PER_CHANNEL) -> tuple[int, ...]:
    # stable sort on -power: equal powers keep ascending index order
    order = np.argsort(-np.asarray(mean_power), kind="stable")[:k]
    return tuple(sorted(int(i) for i in order))


def select_bins(windows, source: str = "") -> BinSelection:
    """Pick, per channel, the 8 bins with the highest power averaged over all training windows.

    ``windows`` is a sequence of :class:`Window` or a ``(n, channels, len)`` array.
    Ties resolve toward the lower bin index.
    """
    if isinstance(windows, np.ndarray):
        stack = windows
    else:
        stack = np.stack([w.samples if isinstance(w, Window) else w for w in windows]) if len(windows) else None
    if stack is None or stack.shape[0] == 0:
        raise ValueError("bin selection needs at least one training window")
    mean_power = power_spectra(stack).mean(axis=0)
    n_bins = mean_power.shape[1]
    if n_bins < BINS_PER_CHANNEL:
        raise ValueError(f"window too short: {n_bins} bins < {BINS_PER_CHANNEL}")
    return BinSelection(tuple(top_bins(row) for row in mean_power), n_bins=n_bins, source=source)


def _check_selection(selection: BinSelection, channels: int, window_len: int) -> None:
    if selection.channel_count != channels:
        raise ValueError(
            f"bin selection covers {selection.channel_count} channels, window has {channels}"
        )
    if window_len // 2 != selection.n_bins:
        raise ValueError(
            f"bin selection made for {selection.window_len}-sample windows, got {window_len}"
        )
    idx = selection.as_array()
    if idx.min() < 0 or idx.max() >= selection.n_bins:
        raise ValueError("corrupt bin selection: index out of range")


def extract_fd(window: Window | np.ndarray, selection: BinSelection) -> np.ndarray:
    samples = window.samples if isinstance(window, Window) else np.atleast_2d(window)
    c, length = samples.shape
    _check_selection(selection, c, length)
    spec = kernels.power_spectrum_batch(samples)
    return np.take_along_axis(spec, selection.as_array(), axis=1).ravel()


def extract_fd_batch(windows: np.ndarray, selection: BinSelection) -> np.ndarray:
    windows = np.asarray(windows, dtype=np.float64)
    n, c, length = windows.shape
    _check_selection(selection, c, length)
    spec = power_spectra(windows)
    return spec[:, np.arange(c)[:, None], selection.as_array()].reshape(n, c * BINS_PER_CHANNEL)
