"""Pipeline glue: synthetic corpora, the preprocessing chain, and labeled window stacks."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .features_fd import BinSelection, extract_fd_batch, select_bins
from .features_td import extract_td_batch
from .signal_io import (
    DEFAULT_WINDOW,
    AdcConfig,
    GestureClass,
    Recording,
    SynthProfile,
    default_profile,
    load_recording,
    notch_filter,
    quantize,
    save_recording,
    synthesize_emg,
    window_array,
)

DEFAULT_GAIN = 100.0


def preprocess(rec: Recording, adc: AdcConfig | None = None, notch_hz: float | None = 50.0,
               quality: float = 10.0) -> Recording:
    """ADC quantization followed by the mains notch."""
    rec = quantize(rec, adc or AdcConfig(sample_rate_hz=rec.sample_rate_hz))
    if notch_hz:
        rec = notch_filter(rec, notch_hz, quality)
    return rec


def synthetic_corpus(
    recordings_per_class: int = 4,
    duration_s: float = 8.0,
    seed: int = 0,
    adc: AdcConfig | None = None,
    profile: SynthProfile | None = None,
    classes: Sequence[GestureClass] = tuple(GestureClass),
) -> list[Recording]:
    """Amplified synthetic recordings, ``recordings_per_class`` per gesture, seeds derived from ``seed``."""
    adc = adc or AdcConfig()
    profile = profile or default_profile(gain=DEFAULT_GAIN)
    out = []
    for g in classes:
        for i in range(recordings_per_class):
            out.append(synthesize_emg(g, duration_s, adc, seed=seed * 1000 + i, profile=profile))
    return out


@dataclass
class WindowSet:
    windows: np.ndarray  # (n, channels, window_len)
    labels: np.ndarray

    def __len__(self) -> int:
        return self.labels.size


def labeled_windows(recordings: Sequence[Recording], window_len: int = DEFAULT_WINDOW,
                    stride: int | None = None) -> WindowSet:
    stacks, labels = [], []
    for rec in recordings:
        if rec.label is None:
            raise ValueError("recording has no 'label' header; cannot build a labeled set")
        w = window_array(rec, window_len, stride)
        stacks.append(w)
        labels.append(np.full(w.shape[0], int(rec.label), dtype=np.intp))
    if not stacks:
        raise ValueError("no recordings given")
    return WindowSet(np.concatenate(stacks), np.concatenate(labels))


def feature_matrix(windows: np.ndarray, feature_path: str, selection: BinSelection | None = None):
    """Feature rows for a window stack; fits a bin selection when ``fd`` and none given."""
    if feature_path == "td":
        return extract_td_batch(windows), None
    if feature_path == "fd":
        if selection is None:
            selection = select_bins(windows, source="training-windows")
        return extract_fd_batch(windows, selection), selection
    raise ValueError(f"unknown feature path {feature_path!r}")


def load_recordings(path: str | Path) -> list[Recording]:
    """A single CSV file, or every ``*.csv`` in a directory (sorted by name)."""
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.csv"))
        if not files:
            raise FileNotFoundError(f"no .csv recordings in {path}")
        return [load_recording(f) for f in files]
    if not path.exists():
        raise FileNotFoundError(f"no such file or directory: {path}")
    return [load_recording(path)]


def save_recordings(recordings: Sequence[Recording], directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, rec in enumerate(recordings):
        tag = rec.metadata.get("label", "unlabeled")
        p = directory / f"{i:04d}_{tag}.csv"
        save_recording(rec, p)
        paths.append(p)
    return paths
