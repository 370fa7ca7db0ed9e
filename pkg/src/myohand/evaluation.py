"""Confusion matrices, accuracy, and the head-to-head benchmark of the two feature paths."""
from __future__ import annotations

import io
import json
import platform
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .classifier import Network, TrainConfig, predict, train
from .dataset import feature_matrix, labeled_windows
from .features_fd import BinSelection, extract_fd_batch, select_bins
from .features_td import extract_td_batch
from .signal_io import CLASS_NAMES, DEFAULT_WINDOW, Recording, window_array


@dataclass
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    counts: np.ndarray
    class_names: tuple[str, ...] = CLASS_NAMES

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.class_names)
        if self.counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}")
        if np.any(self.counts < 0):
            raise ValueError("negative count")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("true\\predicted," + ",".join(self.class_names) + "\n")
        for name, row in zip(self.class_names, self.counts):
            out.write(name + "," + ",".join(str(int(v)) for v in row) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ConfusionMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        names = tuple(lines[0].split(",")[1:])
        counts = [[int(v) for v in ln.split(",")[1:]] for ln in lines[1:]]
        return cls(np.array(counts), names)


def accuracy(cm: ConfusionMatrix) -> float:
    """Correct classifications over total classifications."""
    total = cm.total
    if total == 0:
        raise ValueError("accuracy of an empty confusion matrix is undefined")
    return float(np.trace(cm.counts)) / total


def confusion_from_labels(y_true, y_pred, class_names: Sequence[str] = CLASS_NAMES) -> ConfusionMatrix:
    k = len(class_names)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (np.asarray(y_true, dtype=np.intp), np.asarray(y_pred, dtype=np.intp)), 1)
    return ConfusionMatrix(counts, tuple(class_names))


def evaluate(net: Network, x: np.ndarray, y: np.ndarray) -> ConfusionMatrix:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.intp)
    if y.size == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    return confusion_from_labels(y, predict(net, x), net.class_names)


# ---------------------------------------------------------------- benchmarking


@dataclass
class PathResult:
    accuracy: float | None
    extraction_ms_per_window: float
    training_epochs: int | None
    training_time_s: float | None


@dataclass
class BenchReport:
    td: PathResult
    fd: PathResult
    n_windows: int
    window_len: int
    trials: int
    backend: str
    machine: dict = field(default_factory=dict)
    complexity_slopes: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        def fmt(v, spec):
            return "n/a" if v is None else format(v, spec)

        rows = [
            ("Parameter", "Frequency Domain", "Time Domain"),
            ("Test Accuracy (%)", fmt(None if self.fd.accuracy is None else 100 * self.fd.accuracy, ".2f"),
             fmt(None if self.td.accuracy is None else 100 * self.td.accuracy, ".2f")),
            ("Algorithm Complexity", "O(nlogn)", "O(n)"),
            ("Feature Extraction Time/Window (ms)", fmt(self.fd.extraction_ms_per_window, ".5f"),
             fmt(self.td.extraction_ms_per_window, ".5f")),
            ("Training Epochs", fmt(self.fd.training_epochs, "d"), fmt(self.td.training_epochs, "d")),
            ("Training Time (Seconds)", fmt(self.fd.training_time_s, ".3f"), fmt(self.td.training_time_s, ".3f")),
        ]
        if self.complexity_slopes:
            rows.append(("Log-log time slope", f"{self.complexity_slopes['fd']:.3f}",
                         f"{self.complexity_slopes['td']:.3f}"))
        w = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = [" | ".join(c.ljust(w[i]) for i, c in enumerate(r)) for r in rows]
        lines.insert(1, "-+-".join("-" * x for x in w))
        footer = f"{self.n_windows} windows of {self.window_len} samples, median of {self.trials} trials, backend={self.backend}"
        return "\n".join(lines + [footer])


def machine_descriptor() -> dict:
    return {
        "python": platform.python_version(),
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "kernel_backend": kernels.BACKEND,
    }


def _median_time(fn, trials: int) -> float:
    fn()  # warm caches
    times = []
    for _ in range(trials):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def time_extraction(windows: np.ndarray, selection: BinSelection, trials: int = 5) -> dict[str, float]:
    """Median seconds per window for each path over the same window stack."""
    n = windows.shape[0]
    return {
        "td": _median_time(lambda: extract_td_batch(windows), trials) / n,
        "fd": _median_time(lambda: extract_fd_batch(windows, selection), trials) / n,
    }


def complexity_slopes(
    window_sizes: Sequence[int] = (128, 256, 512, 1024, 2048, 4096),
    total_samples: int = 2**18,
    channels: int = 3,
    trials: int = 5,
    seed: int = 0,
) -> dict:
    """Least-squares slope of log(time per window) vs log(window_len) for both paths.

    Each size processes the same total number of samples so per-call overhead
    is amortized equally.
    """
    rng = np.random.default_rng(seed)
    td, fd = [], []
    for n in window_sizes:
        count = max(total_samples // (n * channels), 1)
        w = rng.standard_normal((count, channels, n))
        sel = select_bins(w[: min(count, 16)])
        t = time_extraction(w, sel, trials)
        td.append(t["td"])
        fd.append(t["fd"])
    logn = np.log(np.asarray(window_sizes, dtype=float))
    return {
        "td": float(np.polyfit(logn, np.log(td), 1)[0]),
        "fd": float(np.polyfit(logn, np.log(fd), 1)[0]),
        "window_sizes": list(window_sizes),
        "td_s_per_window": td,
        "fd_s_per_window": fd,
    }


def benchmark(
    recordings: Sequence[Recording],
    trials: int = 5,
    window_len: int = DEFAULT_WINDOW,
    stride: int | None = None,
    train_config: TrainConfig | None = None,
    train_models: bool = True,
    slopes: bool = False,
) -> BenchReport:
    """Time both feature paths on identical windows and optionally train one network per path."""
    if trials < 3:
        raise ValueError("benchmark needs trials >= 3")
    ws = labeled_windows(recordings, window_len, stride) if train_models else None
    if ws is None:
        stacks = [window_array(r, window_len, stride) for r in recordings]
        windows = np.concatenate(stacks) if stacks else np.empty((0, 1, window_len))
    else:
        windows = ws.windows
    if windows.shape[0] == 0:
        raise ValueError(f"insufficient data: no full {window_len}-sample window")

    selection = select_bins(windows, source="benchmark-windows")
    times = time_extraction(windows, selection, trials)

    results = {}
    for path in ("td", "fd"):
        acc = epochs = wall = None
        if train_models:
            x, sel = feature_matrix(ws.windows, path, selection if path == "fd" else None)
            _, rep = train(x, ws.labels, train_config, feature_path=path, bin_selection=sel)
            acc, epochs, wall = rep.test_accuracy, rep.epochs, rep.wall_time_s
        results[path] = PathResult(acc, 1e3 * times[path], epochs, wall)

    return BenchReport(
        td=results["td"],
        fd=results["fd"],
        n_windows=int(windows.shape[0]),
        window_len=window_len,
        trials=trials,
        backend=kernels.BACKEND,
        machine=machine_descriptor(),
        complexity_slopes=complexity_slopes(trials=trials) if slopes else None,
    )
