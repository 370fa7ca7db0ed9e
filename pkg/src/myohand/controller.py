"""Simulated prosthetic hand: gesture-driven movement state machine and FSR tactile feedback.

Servo convention: 0 deg is fully open, 180 deg fully closed. The wrist spans
0..180 deg; clockwise rotation increases ``wrist_deg``.
"""
from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .classifier import Network, classify_stream
from .signal_io import DEFAULT_WINDOW, GestureClass, Recording, window_stream

ANGLE_MIN = 0.0
ANGLE_MAX = 180.0
VIBRATION_MAX_V = 2.5
FINGERTIPS = ("thumb", "index", "middle", "ring", "little")


class Movement(enum.Enum):
    IDLE = "Idle"
    OPENING = "Opening"
    GRASPING = "Grasping"
    ROTATING_CW = "RotatingCW"
    ROTATING_CCW = "RotatingCCW"


_STARTS = {
    GestureClass.OPEN: Movement.OPENING,
    GestureClass.GRASP: Movement.GRASPING,
    GestureClass.ROTATE_CW: Movement.ROTATING_CW,
    GestureClass.ROTATE_CCW: Movement.ROTATING_CCW,
}


@dataclass(frozen=True)
class HandState:
    thumb_servo_deg: float = ANGLE_MIN
    finger_servo_deg: float = ANGLE_MIN
    wrist_deg: float = 90.0
    movement: Movement = Movement.IDLE
    vibration_v: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def as_row(self) -> dict:
        return {
            "thumb_servo_deg": self.thumb_servo_deg,
            "finger_servo_deg": self.finger_servo_deg,
            "wrist_deg": self.wrist_deg,
            "movement": self.movement.value,
            "vibration_1_v": self.vibration_v[0],
            "vibration_2_v": self.vibration_v[1],
            "vibration_3_v": self.vibration_v[2],
        }


@dataclass(frozen=True)
class GestureEvent:
    gesture: GestureClass
    timestamp: float = 0.0


@dataclass(frozen=True)
class ControllerConfig:
    grip_rate_deg_s: float = 180.0
    wrist_rate_deg_s: float = 180.0


def _clamp(v: float) -> float:
    return min(max(v, ANGLE_MIN), ANGLE_MAX)


def handle_event(movement: Movement, gesture: GestureClass) -> Movement:
    """Toggle/preempt rule: the gesture that started a movement stops it; another movement gesture replaces it."""
    target = _STARTS.get(GestureClass(gesture))
    if target is None:  # Rest
        return movement
    if movement is target:
        return Movement.IDLE
    return target


def step(
    state: HandState,
    event: GestureEvent | None,
    dt: float,
    config: ControllerConfig = ControllerConfig(),
) -> HandState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    movement = state.movement if event is None else handle_event(state.movement, event.gesture)
    thumb, finger, wrist = state.thumb_servo_deg, state.finger_servo_deg, state.wrist_deg

    if movement in (Movement.OPENING, Movement.GRASPING):
        delta = config.grip_rate_deg_s * dt * (-1 if movement is Movement.OPENING else 1)
        thumb, finger = _clamp(thumb + delta), _clamp(finger + delta)
        limit = ANGLE_MIN if movement is Movement.OPENING else ANGLE_MAX
        if thumb == limit and finger == limit:
            movement = Movement.IDLE
    elif movement in (Movement.ROTATING_CW, Movement.ROTATING_CCW):
        sign = 1 if movement is Movement.ROTATING_CW else -1
        wrist = _clamp(wrist + sign * config.wrist_rate_deg_s * dt)
        if wrist == (ANGLE_MAX if sign > 0 else ANGLE_MIN):
            movement = Movement.IDLE

    return replace(state, thumb_servo_deg=thumb, finger_servo_deg=finger, wrist_deg=wrist,
                   movement=movement)


# ---------------------------------------------------------------- tactile feedback


@dataclass(frozen=True)
class FsrModel:
    """Inverse-law FSRs (``R = k / F``) in voltage dividers, grouped into three vibration regions."""

    k_ohm_newton: tuple[float, ...] = (1e5,) * 5
    divider_ohm: float = 10e3
    supply_v: float = 5.0
    regions: tuple[int, ...] = (0, 1, 1, 2, 2)
    saturation_n: float = 10.0

    def __post_init__(self):
        if len(self.k_ohm_newton) != len(FINGERTIPS) or len(self.regions) != len(FINGERTIPS):
            raise ValueError("FsrModel needs one k and one region per fingertip (5)")
        if any(r not in (0, 1, 2) for r in self.regions):
            raise ValueError("each fingertip must map to region 0, 1 or 2")
        if min(self.k_ohm_newton) <= 0 or self.divider_ohm <= 0 or self.supply_v <= 0:
            raise ValueError("k, divider resistance and supply must be positive")
        if self.saturation_n <= 0:
            raise ValueError("saturation threshold must be positive")

    def resistance(self, finger: int, force_n: float) -> float:
        return np.inf if force_n <= 0 else self.k_ohm_newton[finger] / force_n

    def divider_voltage(self, finger: int, force_n: float) -> float:
        if force_n <= 0:
            return 0.0  # open circuit
        k = self.k_ohm_newton[finger]
        return self.supply_v * self.divider_ohm * force_n / (k + self.divider_ohm * force_n)


def fingertip_drive(model: FsrModel, finger: int, force_n: float) -> float:
    """Vibration voltage a single fingertip would command on its own."""
    if force_n >= model.saturation_n:
        return VIBRATION_MAX_V
    v = model.divider_voltage(finger, force_n)
    v_sat = model.divider_voltage(finger, model.saturation_n)
    return min(VIBRATION_MAX_V, VIBRATION_MAX_V * v / v_sat)


def feedback(model: FsrModel, forces: Sequence[float]) -> tuple[float, float, float]:
    """Region vibration voltages: each region follows its most-loaded fingertip."""
    forces = [float(f) for f in forces]
    if len(forces) != len(FINGERTIPS):
        raise ValueError(f"expected {len(FINGERTIPS)} fingertip forces, got {len(forces)}")
    if any(not np.isfinite(f) or f < 0 for f in forces):
        raise ValueError("fingertip forces must be finite and non-negative")
    out = [0.0, 0.0, 0.0]
    for finger, f in enumerate(forces):
        r = model.regions[finger]
        out[r] = max(out[r], fingertip_drive(model, finger, f))
    return tuple(out)


# ---------------------------------------------------------------- force scripts and traces


@dataclass
class ForceScript:
    """Piecewise-constant fingertip forces: row ``i`` holds from ``times[i]`` until the next row."""

    times: np.ndarray
    forces: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.forces = np.asarray(self.forces, dtype=float).reshape(-1, len(FINGERTIPS))
        if self.times.size != self.forces.shape[0]:
            raise ValueError("force script needs one force row per time")
        if np.any(np.diff(self.times) < 0):
            raise ValueError("force script times must be non-decreasing")

    def at(self, t: float) -> np.ndarray:
        i = np.searchsorted(self.times, t, side="right") - 1
        if i < 0:
            return np.zeros(len(FINGERTIPS))
        return self.forces[i]

    @classmethod
    def constant(cls, forces: Sequence[float] = (0.0,) * 5) -> "ForceScript":
        return cls([0.0], [forces])


def load_force_script(path: str | Path) -> ForceScript:
    """CSV with columns ``time_s,f1,f2,f3,f4,f5``; a header row is optional."""
    times, rows = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                if lineno == 1 or not times:
                    continue  # header
                raise ValueError(f"{path}: row {lineno}: non-numeric cell") from None
            if len(vals) != 1 + len(FINGERTIPS):
                raise ValueError(f"{path}: row {lineno}: expected 6 columns (time_s,f1..f5), got {len(vals)}")
            times.append(vals[0])
            rows.append(vals[1:])
    if not times:
        raise ValueError(f"{path}: force script has no rows")
    return ForceScript(times, rows)


@dataclass
class TraceEntry:
    time_s: float
    gesture: str
    event: str | None
    state: HandState


@dataclass
class SimulationTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def rows(self) -> list[dict]:
        return [{"time_s": e.time_s, "gesture": e.gesture, "event": e.event or "", **e.state.as_row()}
                for e in self.entries]

    def to_csv(self) -> str:
        out = io.StringIO()
        cols = ["time_s", "gesture", "event", "thumb_servo_deg", "finger_servo_deg", "wrist_deg",
                "movement", "vibration_1_v", "vibration_2_v", "vibration_3_v"]
        w = csv.DictWriter(out, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        return out.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.rows(), indent=1)


def gesture_events(labels: Iterable[int], times: Iterable[float], confirm: int = 2):
    """Edge-triggered events: emit when a new class has held for ``confirm`` consecutive windows."""
    current = None
    candidate, run = None, 0
    for label, t in zip(labels, times):
        if label == candidate:
            run += 1
        else:
            candidate, run = label, 1
        if run == confirm and candidate != current:
            current = candidate
            yield t, GestureEvent(GestureClass(candidate), t)
        else:
            yield t, None


def run_simulation(
    net: Network,
    recording: Recording,
    fsr: FsrModel | None = None,
    script: ForceScript | None = None,
    window_len: int = DEFAULT_WINDOW,
    stride: int | None = None,
    config: ControllerConfig = ControllerConfig(),
    confirm_windows: int = 2,
    initial: HandState | None = None,
) -> SimulationTrace:
    """Classify each window, feed gesture changes to the state machine, and apply force feedback."""
    fsr = fsr or FsrModel()
    script = script or ForceScript.constant()
    stride = window_len if stride is None else stride
    dt = stride / recording.sample_rate_hz
    preds = list(classify_stream(net, window_stream(recording, window_len, stride)))
    labels = [p.label for p in preds]
    times = [(window_len + i * stride) / recording.sample_rate_hz for i in range(len(preds))]

    state = initial or HandState()
    trace = SimulationTrace()
    for (t, event), label in zip(gesture_events(labels, times, confirm_windows), labels):
        state = step(state, event, dt, config)
        state = replace(state, vibration_v=feedback(fsr, script.at(t)))
        trace.entries.append(TraceEntry(t, net.class_names[label],
                                        None if event is None else event.gesture.tag, state))
    return trace
