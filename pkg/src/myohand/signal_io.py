"""EMG recordings: CSV ingestion, synthesis, notch filtering, quantization, windowing."""
from __future__ import annotations

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy import signal as sps

log = logging.getLogger(__name__)

DEFAULT_RATE_HZ = 2000.0
DEFAULT_WINDOW = 128
EMG_BAND_HZ = (6.0, 500.0)
EMG_PEAK_V = 5000e-6


class SignalFormatError(ValueError):
    """Malformed recording file; message carries the row/column position."""


class GestureClass(enum.IntEnum):
    REST = 0
    OPEN = 1
    GRASP = 2
    ROTATE_CW = 3
    ROTATE_CCW = 4

    @property
    def tag(self) -> str:
        return _TAGS[self]

    @classmethod
    def from_tag(cls, tag: str) -> "GestureClass":
        for g, t in _TAGS.items():
            if t.lower() == tag.strip().lower():
                return g
        raise ValueError(f"unknown gesture {tag!r}; expected one of {list(_TAGS.values())}")


_TAGS = {
    GestureClass.REST: "Rest",
    GestureClass.OPEN: "Open",
    GestureClass.GRASP: "Grasp",
    GestureClass.ROTATE_CW: "RotateCW",
    GestureClass.ROTATE_CCW: "RotateCCW",
}
CLASS_NAMES = tuple(_TAGS[g] for g in GestureClass)


@dataclass
class Recording:
    """Multi-channel sampled signal, shape ``(channel_count, n_samples)``, in volts."""

    channels: np.ndarray
    sample_rate_hz: float = DEFAULT_RATE_HZ
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.float64)
        if ch.ndim == 1:
            ch = ch[None, :]
        if ch.ndim != 2 or ch.shape[0] < 1:
            raise ValueError("a recording needs at least one channel of equal-length samples")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        self.channels = ch

    @property
    def channel_count(self) -> int:
        return self.channels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def label(self) -> GestureClass | None:
        tag = self.metadata.get("label")
        return GestureClass.from_tag(tag) if tag else None

    def replace(self, channels: np.ndarray) -> "Recording":
        return Recording(channels, self.sample_rate_hz, dict(self.metadata))


@dataclass
class Window:
    samples: np.ndarray
    label: GestureClass | None = None

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))

    @property
    def window_len(self) -> int:
        return self.samples.shape[1]

    @property
    def channel_count(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class AdcConfig:
    """Sampling and converter settings. Defaults: 2 kHz, 10-bit, +/-2.5 V."""

    sample_rate_hz: float = DEFAULT_RATE_HZ
    resolution_bits: int = 10
    full_scale_volts: float = 2.5

    def __post_init__(self):
        if self.sample_rate_hz < 2 * EMG_BAND_HZ[1]:
            raise ValueError(
                f"sample_rate_hz must be >= {2 * EMG_BAND_HZ[1]:g} to avoid aliasing EMG content, "
                f"got {self.sample_rate_hz}"
            )
        if self.resolution_bits < 1:
            raise ValueError("resolution_bits must be >= 1")
        if not self.full_scale_volts > 0:
            raise ValueError("full_scale_volts must be positive")


# ---------------------------------------------------------------- CSV I/O


def _parse_header(line: str, lineno: int, meta: dict[str, str]) -> None:
    body = line.lstrip("#").strip()
    if not body:
        return
    for item in body.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise SignalFormatError(f"row {lineno}: malformed header entry {item!r}, expected key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        if not key:
            raise SignalFormatError(f"row {lineno}: header entry with empty key")
        meta[key] = value


def parse_recording(text: str, source: str = "<string>") -> Recording:
    meta: dict[str, str] = {}
    rows: list[list[float]] = []
    width = None
    for lineno, raw in enumerate(io.StringIO(text, newline=None), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.lstrip().startswith("#"):
            if rows:
                raise SignalFormatError(f"{source}: row {lineno}: header line after data")
            _parse_header(line, lineno, meta)
            continue
        cells = next(csv.reader([line]))
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise SignalFormatError(
                f"{source}: row {lineno}: expected {width} cells, found {len(cells)}"
            )
        values = []
        for col, cell in enumerate(cells, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise SignalFormatError(
                    f"{source}: row {lineno}, column {col}: non-numeric cell {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise SignalFormatError(f"{source}: row {lineno}, column {col}: non-finite value")
            values.append(v)
        rows.append(values)

    if "sample_rate_hz" not in meta:
        raise SignalFormatError(f"{source}: row 1: missing required header 'sample_rate_hz'")
    try:
        rate = float(meta["sample_rate_hz"])
    except ValueError:
        raise SignalFormatError(f"{source}: malformed sample_rate_hz {meta['sample_rate_hz']!r}") from None
    if not rate > 0:
        raise SignalFormatError(f"{source}: sample_rate_hz must be positive")
    if not rows:
        raise SignalFormatError(f"{source}: no samples")
    if width == 0:
        raise SignalFormatError(f"{source}: zero channels")
    del meta["sample_rate_hz"]
    return Recording(np.array(rows, dtype=np.float64).T, rate, meta)


def load_recording(path: str | Path) -> Recording:
    """Read a recording CSV (``#`` key=value headers, one column per channel)."""
    path = Path(path)
    return parse_recording(path.read_text(encoding="utf-8"), source=str(path))


def format_recording(rec: Recording) -> str:
    out = io.StringIO()
    out.write(f"# sample_rate_hz={rec.sample_rate_hz:.17g}\n")
    for k, v in sorted(rec.metadata.items()):
        out.write(f"# {k}={v}\n")
    for row in rec.channels.T:
        out.write(",".join(repr(float(v)) for v in row))
        out.write("\n")
    return out.getvalue()


def save_recording(rec: Recording, path: str | Path) -> None:
    Path(path).write_text(format_recording(rec), encoding="utf-8")


# ---------------------------------------------------------------- synthesis

# Band edges (Hz) used by the synthetic spectral profiles.
SYNTH_BANDS = ((6.0, 60.0), (60.0, 120.0), (120.0, 200.0), (200.0, 300.0), (300.0, 500.0))


@dataclass(frozen=True)
class ClassProfile:
    """Per-channel RMS level (volts, before gain) and relative band powers."""

    rms_v: tuple[float, ...]
    band_weights: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class SynthProfile:
    """Parameters of the band-limited noise generator.

    ``level_jitter`` scales each recording's amplitude by a factor drawn from
    ``[1 - j, 1 + j]``; ``envelope_depth`` adds a slow multiplicative modulation.
    """

    classes: dict[GestureClass, ClassProfile]
    gain: float = 1.0
    level_jitter: float = 0.15
    envelope_depth: float = 0.2
    envelope_hz: float = 1.5
    mains_v: float = 0.0
    mains_hz: float = 50.0

    @property
    def channel_count(self) -> int:
        return len(next(iter(self.classes.values())).rms_v)


def default_profile(gain: float = 1.0, mains_v: float = 0.0) -> SynthProfile:
    """Three-channel profile with distinct per-class amplitude patterns and spectra."""
    low = (1.0, 0.8, 0.4, 0.2, 0.05)
    mid = (0.3, 0.8, 1.0, 0.6, 0.2)
    high = (0.1, 0.3, 0.6, 1.0, 0.6)
    classes = {
        GestureClass.REST: ClassProfile((40e-6, 40e-6, 40e-6), (mid, mid, mid)),
        GestureClass.OPEN: ClassProfile((200e-6, 900e-6, 300e-6), (mid, high, mid)),
        GestureClass.GRASP: ClassProfile((900e-6, 220e-6, 300e-6), (low, mid, mid)),
        GestureClass.ROTATE_CW: ClassProfile((300e-6, 300e-6, 900e-6), (mid, mid, high)),
        GestureClass.ROTATE_CCW: ClassProfile((750e-6, 750e-6, 150e-6), (high, low, mid)),
    }
    return SynthProfile(classes=classes, gain=gain, mains_v=mains_v)


def _band_mask(n: int, rate: float, weights: Sequence[float]) -> np.ndarray:
    freqs = np.fft.rfftfreq(n, d=1.0 / rate)
    amp = np.zeros_like(freqs)
    for (lo, hi), w in zip(SYNTH_BANDS, weights):
        sel = (freqs >= lo) & (freqs < hi) if hi < EMG_BAND_HZ[1] else (freqs >= lo) & (freqs <= hi)
        amp[sel] = math.sqrt(w)
    return amp


def synthesize_emg(
    gesture: GestureClass,
    duration_s: float,
    config: AdcConfig | None = None,
    seed: int = 0,
    profile: SynthProfile | None = None,
    window_len: int = DEFAULT_WINDOW,
) -> Recording:
    """Generate a labeled recording of band-limited (6-500 Hz) noise for ``gesture``.

    Each channel is white Gaussian noise shaped in the frequency domain by the
    class's band weights, scaled to its RMS level and modulated by a slow
    envelope. Peaks are held within +/-5000 uV before ``profile.gain``.
    """
    config = config or AdcConfig()
    profile = profile or default_profile()
    gesture = GestureClass(gesture)
    if not duration_s > 0:
        raise ValueError("duration_s must be positive")
    rate = config.sample_rate_hz
    n = int(round(duration_s * rate))
    if n < window_len:
        raise ValueError(
            f"duration {duration_s} s gives {n} samples, fewer than one {window_len}-sample window"
        )
    cp = profile.classes[gesture]
    rng = np.random.default_rng(np.random.SeedSequence([seed, int(gesture)]))
    level = 1.0 + profile.level_jitter * rng.uniform(-1.0, 1.0)
    t = np.arange(n) / rate
    out = np.zeros((len(cp.rms_v), n))
    for ch, (rms, weights) in enumerate(zip(cp.rms_v, cp.band_weights)):
        white = rng.standard_normal(n)
        phase = rng.uniform(0, 2 * np.pi)
        if rms == 0 or not any(weights):
            continue
        # modulate before shaping so the band limit holds exactly
        white *= 1.0 + profile.envelope_depth * np.sin(2 * np.pi * profile.envelope_hz * t + phase)
        shaped = np.fft.irfft(np.fft.rfft(white) * _band_mask(n, rate, weights), n)
        cur = np.sqrt(np.mean(shaped**2))
        if cur == 0:
            continue
        x = shaped * (rms * level / cur)
        peak = np.max(np.abs(x))
        if peak > EMG_PEAK_V:
            x *= EMG_PEAK_V / peak
        out[ch] = x
    if profile.mains_v:
        out += profile.mains_v * np.sin(2 * np.pi * profile.mains_hz * t)
    out *= profile.gain
    meta = {"label": gesture.tag, "seed": str(seed), "gain": f"{profile.gain:g}"}
    return Recording(out, rate, meta)


# ---------------------------------------------------------------- preprocessing


def notch_coefficients(notch_hz: float, quality: float, sample_rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    nyq = sample_rate_hz / 2.0
    if not 0 < notch_hz < nyq:
        raise ValueError(f"notch frequency must lie in (0, {nyq:g}) Hz, got {notch_hz}")
    if not quality > 0:
        raise ValueError("quality must be positive")
    return sps.iirnotch(notch_hz, quality, fs=sample_rate_hz)


def notch_filter(rec: Recording, notch_hz: float = 50.0, quality: float = 10.0) -> Recording:
    """Second-order IIR notch applied causally along each channel (zero initial state)."""
    b, a = notch_coefficients(notch_hz, quality, rec.sample_rate_hz)
    return rec.replace(sps.lfilter(b, a, rec.channels, axis=1))


def quantize(rec: Recording, config: AdcConfig | None = None) -> Recording:
    """Mid-rise uniform quantizer with ``2**bits`` levels spanning +/-full scale, clamped."""
    config = config or AdcConfig()
    levels = 2**config.resolution_bits
    step = 2.0 * config.full_scale_volts / levels
    code = np.floor(rec.channels / step)
    code = np.clip(code, -levels // 2, levels // 2 - 1)
    return rec.replace((code + 0.5) * step)


# ---------------------------------------------------------------- windowing


def window_count(n_samples: int, window_len: int, stride: int) -> int:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if window_len < 1:
        raise ValueError("window_len must be >= 1")
    if window_len > n_samples:
        return 0
    return (n_samples - window_len) // stride + 1


def window_array(rec: Recording, window_len: int = DEFAULT_WINDOW, stride: int | None = None) -> np.ndarray:
    """All full windows as an array of shape ``(n_windows, channels, window_len)``."""
    stride = window_len if stride is None else stride
    count = window_count(rec.n_samples, window_len, stride)
    if count == 0:
        log.warning(
            "recording has %d samples, shorter than window_len=%d; no windows produced",
            rec.n_samples, window_len,
        )
        return np.empty((0, rec.channel_count, window_len))
    starts = np.arange(count) * stride
    idx = starts[:, None] + np.arange(window_len)[None, :]
    return np.ascontiguousarray(rec.channels[:, idx].transpose(1, 0, 2))


def window_stream(
    rec: Recording, window_len: int = DEFAULT_WINDOW, stride: int | None = None
) -> Iterator[Window]:
    label = rec.label
    for w in window_array(rec, window_len, stride):
        yield Window(w, label)
