"""Two-layer feedforward gesture classifier: tanh hidden layer, softmax output.

Training is full-batch gradient descent on mean cross-entropy with early
stopping on validation loss. Inputs are standardized with statistics fitted
on the training split and stored in the network.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .features_fd import BinSelection, FD_FEATURE_ORDER, extract_fd
from .features_td import TD_FEATURE_ORDER, extract_td
from .signal_io import CLASS_NAMES, GestureClass, Window

log = logging.getLogger(__name__)

HIDDEN_UNITS = 10


class DimensionError(ValueError):
    pass


class TrainingError(RuntimeError):
    pass


@dataclass
class Network:
    """Weights ``w1 (hidden, in)``, ``w2 (classes, hidden)`` plus frozen preprocessing."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    norm_mean: np.ndarray
    norm_scale: np.ndarray
    feature_path: str = "td"
    feature_order: str = TD_FEATURE_ORDER
    class_names: tuple[str, ...] = CLASS_NAMES
    bin_selection: BinSelection | None = None

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2", "norm_mean", "norm_scale"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        h, d = self.w1.shape
        k = self.w2.shape[0]
        if self.b1.shape != (h,) or self.w2.shape != (k, h) or self.b2.shape != (k,):
            raise DimensionError("inconsistent layer shapes")
        if self.norm_mean.shape != (d,) or self.norm_scale.shape != (d,):
            raise DimensionError("normalization parameters do not match input_dim")
        if len(self.class_names) != k:
            raise DimensionError("class table size does not match output layer")
        if self.feature_path not in ("td", "fd"):
            raise ValueError(f"feature_path must be 'td' or 'fd', got {self.feature_path!r}")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def n_classes(self) -> int:
        return self.w2.shape[0]

    def params(self) -> tuple[np.ndarray, ...]:
        return self.w1, self.b1, self.w2, self.b2

    def copy(self) -> "Network":
        return replace(self, w1=self.w1.copy(), b1=self.b1.copy(), w2=self.w2.copy(),
                       b2=self.b2.copy(), norm_mean=self.norm_mean.copy(),
                       norm_scale=self.norm_scale.copy())

    @classmethod
    def initialize(
        cls,
        input_dim: int,
        n_classes: int = len(CLASS_NAMES),
        hidden: int = HIDDEN_UNITS,
        seed: int = 0,
        **kwargs,
    ) -> "Network":
        """Uniform ``[-0.5, 0.5] / sqrt(fan_in)`` weights, zero biases, identity normalization."""
        rng = np.random.default_rng(seed)
        w1 = rng.uniform(-0.5, 0.5, (hidden, input_dim)) / np.sqrt(input_dim)
        w2 = rng.uniform(-0.5, 0.5, (n_classes, hidden)) / np.sqrt(hidden)
        kwargs.setdefault("class_names", tuple(CLASS_NAMES[:n_classes]) if n_classes <= len(CLASS_NAMES)
                          else tuple(f"class{i}" for i in range(n_classes)))
        return cls(w1, np.zeros(hidden), w2, np.zeros(n_classes),
                   np.zeros(input_dim), np.ones(input_dim), **kwargs)


@dataclass(frozen=True)
class Prediction:
    probabilities: np.ndarray
    label: int
    confidence: float
    latency_s: float = 0.0

    @property
    def gesture(self) -> GestureClass:
        return GestureClass(self.label)


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def tansig(z):
    return np.tanh(z)


def _forward_cache(net: Network, x: np.ndarray):
    xn = (x - net.norm_mean) / net.norm_scale
    a1 = np.tanh(xn @ net.w1.T + net.b1)
    p = softmax(a1 @ net.w2.T + net.b2)
    return xn, a1, p


def _check_input(net: Network, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != net.input_dim:
        raise DimensionError(
            f"feature dimension {x.shape[-1]} does not match network input_dim {net.input_dim}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature value")
    return x


def predict_proba(net: Network, features: np.ndarray) -> np.ndarray:
    """Class probabilities for one vector ``(d,)`` or a batch ``(n, d)``."""
    x = _check_input(net, features)
    return _forward_cache(net, np.atleast_2d(x))[2].reshape(x.shape[:-1] + (net.n_classes,))


def forward(net: Network, features) -> Prediction:
    p = predict_proba(net, np.asarray(features, dtype=np.float64).ravel())
    k = int(np.argmax(p))  # first maximum on ties
    return Prediction(p, k, float(p[k]))


def predict(net: Network, features: np.ndarray) -> np.ndarray:
    return np.argmax(predict_proba(net, np.atleast_2d(features)), axis=1)


@dataclass
class Gradient:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def arrays(self) -> tuple[np.ndarray, ...]:
        return self.w1, self.b1, self.w2, self.b2


def _one_hot(y: np.ndarray, k: int) -> np.ndarray:
    t = np.zeros((y.size, k))
    t[np.arange(y.size), y] = 1.0
    return t


def loss(net: Network, x: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy over the batch."""
    p = _forward_cache(net, _check_input(net, np.atleast_2d(x)))[2]
    y = np.asarray(y, dtype=np.intp)
    return float(-np.mean(np.log(np.maximum(p[np.arange(y.size), y], 1e-300))))


def gradient(net: Network, x: np.ndarray, y: np.ndarray) -> tuple[float, Gradient]:
    """Loss and exact backprop gradient of mean cross-entropy w.r.t. every weight and bias."""
    x = _check_input(net, np.atleast_2d(x))
    y = np.asarray(y, dtype=np.intp)
    n = x.shape[0]
    xn, a1, p = _forward_cache(net, x)
    value = float(-np.mean(np.log(np.maximum(p[np.arange(n), y], 1e-300))))
    dz2 = (p - _one_hot(y, net.n_classes)) / n
    dz1 = (dz2 @ net.w2) * (1.0 - a1 * a1)
    return value, Gradient(dz1.T @ xn, dz1.sum(axis=0), dz2.T @ a1, dz2.sum(axis=0))


# ---------------------------------------------------------------- training


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 3000
    learning_rate: float = 0.5
    validation_fraction: float = 0.15
    test_fraction: float = 0.15
    patience: int = 100
    seed: int = 0
    shuffle: bool = True
    hidden_units: int = HIDDEN_UNITS

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        for name in ("validation_fraction", "test_fraction"):
            v = getattr(self, name)
            if not 0 <= v < 1:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.validation_fraction + self.test_fraction >= 1:
            raise ValueError("validation_fraction + test_fraction must be < 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass
class TrainReport:
    train_accuracy: float
    validation_accuracy: float | None
    test_accuracy: float | None
    epochs: int
    best_epoch: int
    wall_time_s: float
    loss_history: list[float] = field(default_factory=list)
    val_loss_history: list[float] = field(default_factory=list)
    split_sizes: dict[str, int] = field(default_factory=dict)
    test_indices: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "train_accuracy": self.train_accuracy,
            "validation_accuracy": self.validation_accuracy,
            "test_accuracy": self.test_accuracy,
            "epochs": self.epochs,
            "best_epoch": self.best_epoch,
            "wall_time_s": self.wall_time_s,
            "final_train_loss": self.loss_history[-1] if self.loss_history else None,
            "split_sizes": self.split_sizes,
        }


def stratified_split(
    y: np.ndarray, validation_fraction: float, test_fraction: float, seed: int, shuffle: bool = True
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index arrays (train, val, test), split per class so each keeps the class proportions."""
    rng = np.random.default_rng(seed)
    tr, va, te = [], [], []
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        if shuffle:
            idx = rng.permutation(idx)
        n_te = int(round(test_fraction * idx.size))
        n_va = int(round(validation_fraction * idx.size))
        if n_te + n_va >= idx.size:
            n_te = min(n_te, max(idx.size - 1, 0))
            n_va = min(n_va, max(idx.size - 1 - n_te, 0))
        te.append(idx[:n_te])
        va.append(idx[n_te:n_te + n_va])
        tr.append(idx[n_te + n_va:])
    return tuple(np.sort(np.concatenate(part)).astype(np.intp) for part in (tr, va, te))


def _accuracy(net: Network, x: np.ndarray, y: np.ndarray) -> float | None:
    if y.size == 0:
        return None
    return float(np.mean(predict(net, x) == y))


def train(
    x: np.ndarray,
    y: np.ndarray,
    config: TrainConfig | None = None,
    n_classes: int = len(CLASS_NAMES),
    feature_path: str = "td",
    feature_order: str | None = None,
    bin_selection: BinSelection | None = None,
    class_names: Sequence[str] | None = None,
) -> tuple[Network, TrainReport]:
    config = config or TrainConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise DimensionError("x must be (n_examples, n_features) with one label per row")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature value in training data")
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")

    tr, va, te = stratified_split(y, config.validation_fraction, config.test_fraction,
                                  config.seed, config.shuffle)
    missing = sorted(set(range(n_classes)) - set(np.unique(y[tr]).tolist()))
    if missing:
        raise TrainingError(f"classes absent from training split: {missing}")

    if feature_order is None:
        feature_order = TD_FEATURE_ORDER if feature_path == "td" else FD_FEATURE_ORDER
    kwargs = dict(feature_path=feature_path, feature_order=feature_order, bin_selection=bin_selection)
    if class_names is not None:
        kwargs["class_names"] = tuple(class_names)
    net = Network.initialize(x.shape[1], n_classes, config.hidden_units, config.seed, **kwargs)
    mu = x[tr].mean(axis=0)
    sd = x[tr].std(axis=0)
    net.norm_mean = mu
    net.norm_scale = np.where(sd > 0, sd, 1.0)

    xtr, ytr, xva, yva = x[tr], y[tr], x[va], y[va]
    start = time.perf_counter()
    best = net.copy()
    best_val = np.inf
    best_epoch = 0
    since_best = 0
    history, val_history = [], []
    epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        value, g = gradient(net, xtr, ytr)
        if not np.isfinite(value):
            raise TrainingError(f"loss diverged (non-finite) at epoch {epoch}; lower the learning rate")
        history.append(value)
        with np.errstate(over="ignore", invalid="ignore"):
            for p, dp in zip(net.params(), g.arrays()):
                p -= config.learning_rate * dp
        if not all(np.all(np.isfinite(p)) for p in net.params()):
            raise TrainingError(f"weights diverged (non-finite) at epoch {epoch}; lower the learning rate")
        if yva.size:
            v = loss(net, xva, yva)
            val_history.append(v)
            if v < best_val - 1e-12:
                best_val, best, best_epoch, since_best = v, net.copy(), epoch, 0
            else:
                since_best += 1
                if since_best >= config.patience:
                    break
        else:
            best, best_epoch = net, epoch
    wall = time.perf_counter() - start

    report = TrainReport(
        train_accuracy=_accuracy(best, xtr, ytr),
        validation_accuracy=_accuracy(best, xva, yva),
        test_accuracy=_accuracy(best, x[te], y[te]),
        epochs=epoch,
        best_epoch=best_epoch,
        wall_time_s=wall,
        loss_history=history,
        val_loss_history=val_history,
        split_sizes={"train": int(tr.size), "validation": int(va.size), "test": int(te.size)},
        test_indices=te,
    )
    log.info("trained %s network: %d epochs, test accuracy %s", feature_path, epoch, report.test_accuracy)
    return best, report


# ---------------------------------------------------------------- streaming inference


def extract_features(window: Window | np.ndarray, feature_path: str, selection: BinSelection | None = None):
    if feature_path == "td":
        return extract_td(window)
    if feature_path == "fd":
        if selection is None:
            raise ValueError("frequency-domain features need a bin selection")
        return extract_fd(window, selection)
    raise ValueError(f"unknown feature path {feature_path!r}")


def classify_stream(net: Network, windows: Iterable[Window], feature_path: str | None = None):
    """Yield one :class:`Prediction` per window, with feature+forward latency in ``latency_s``."""
    path = feature_path or net.feature_path
    if path != net.feature_path:
        raise DimensionError(
            f"network expects {net.feature_path!r} features (input_dim {net.input_dim}), "
            f"requested {path!r}"
        )
    for w in windows:
        t0 = time.perf_counter()
        f = extract_features(w, path, net.bin_selection)
        pred = forward(net, f)
        yield replace(pred, latency_s=time.perf_counter() - t0)
