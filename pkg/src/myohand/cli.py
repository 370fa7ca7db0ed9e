"""``myohand`` command line: synth, features, train, classify, eval, bench, simulate.

Errors go to stderr as one JSON object ``{"error": <kind>, "message": <text>}``
with a nonzero exit code (2 for usage errors, 1 for everything else).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import DimensionError, TrainConfig, TrainingError, classify_stream, train
from .controller import FsrModel, ForceScript, load_force_script, run_simulation
from .dataset import (
    DEFAULT_GAIN,
    feature_matrix,
    labeled_windows,
    load_recordings,
    preprocess,
    save_recordings,
    synthetic_corpus,
)
from .evaluation import accuracy, benchmark, evaluate
from .features_td import TD_FEATURE_NAMES
from .modelfile import ModelFormatError, load_model, save_model
from .signal_io import AdcConfig, GestureClass, SignalFormatError, default_profile, window_stream

log = logging.getLogger("myohand")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _window_len(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("must be >= 2")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="myohand", description="Simulated myoelectric prosthetic-hand pipeline.")
    p.add_argument("--version", action="version", version=f"myohand {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, window=True, seed=False):
        if window:
            sp.add_argument("--window", type=_window_len, default=128, help="samples per window (default 128)")
            sp.add_argument("--stride", type=_positive_int, default=None,
                            help="samples between window starts (default: --window)")
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="seed for all randomized work (default 0)")

    def preprocessing(sp):
        sp.add_argument("--preprocess", action="store_true",
                        help="quantize (--bits, +/-2.5 V) and 50 Hz notch the input before windowing")
        sp.add_argument("--bits", type=_positive_int, default=10, help="ADC resolution for --preprocess (default 10)")

    sp = sub.add_parser("synth", help="write synthetic labeled recordings (one CSV per recording)")
    sp.add_argument("--output", required=True, help="output directory")
    sp.add_argument("--rate", type=float, default=2000.0, help="sample rate in Hz (default 2000)")
    sp.add_argument("--duration", type=_positive_float, default=8.0, help="seconds per recording (default 8)")
    sp.add_argument("--per-class", type=_positive_int, default=4, help="recordings per gesture (default 4)")
    sp.add_argument("--classes", default=None,
                    help="comma-separated gesture names to generate (default: all five)")
    sp.add_argument("--gain", type=float, default=DEFAULT_GAIN, help="amplifier gain (default 100)")
    sp.add_argument("--mains", type=float, default=0.0, help="50 Hz interference amplitude in volts before gain")
    sp.add_argument("--raw", action="store_true", help="skip ADC quantization and notch filtering")
    sp.add_argument("--bits", type=_positive_int, default=10, help="ADC resolution (default 10)")
    common(sp, window=False, seed=True)

    sp = sub.add_parser("features", help="write a per-window feature table (CSV)")
    sp.add_argument("--input", required=True, help="recording CSV or directory of them")
    sp.add_argument("--output", required=True, help="feature table CSV")
    sp.add_argument("--features", choices=("td", "fd"), default="td", help="feature path (default td)")
    sp.add_argument("--model", default=None, help="fd only: take the bin selection from this model")
    common(sp)
    preprocessing(sp)

    sp = sub.add_parser("train", help="train a network and write the model file plus a JSON report")
    sp.add_argument("--input", required=True, help="directory of labeled recordings")
    sp.add_argument("--output", required=True, help="model file to write")
    sp.add_argument("--report", default=None, help="TrainReport JSON path (default: <output>.report.json)")
    sp.add_argument("--features", choices=("td", "fd"), default="td", help="feature path (default td)")
    sp.add_argument("--epochs", type=_positive_int, default=TrainConfig.max_epochs, help="maximum epochs (default 3000)")
    sp.add_argument("--lr", type=_positive_float, default=TrainConfig.learning_rate, help="learning rate (default 0.5)")
    sp.add_argument("--patience", type=_positive_int, default=TrainConfig.patience,
                    help="early-stopping patience in epochs")
    sp.add_argument("--val-fraction", type=float, default=TrainConfig.validation_fraction,
                    help="stratified validation share (default 0.15)")
    sp.add_argument("--test-fraction", type=float, default=TrainConfig.test_fraction,
                    help="stratified test share (default 0.15)")
    common(sp, seed=True)
    preprocessing(sp)

    sp = sub.add_parser("classify", help="stream per-window predictions as JSON lines")
    sp.add_argument("--model", required=True, help="model file written by train")
    sp.add_argument("--input", required=True, help="recording CSV or directory of them")
    sp.add_argument("--output", default=None, help="JSON-lines file (default: stdout)")
    sp.add_argument("--features", choices=("td", "fd"), default=None,
                    help="feature path; must match the model (default: the model's)")
    common(sp)
    preprocessing(sp)

    sp = sub.add_parser("eval", help="confusion matrix (CSV) and accuracy (JSON) on labeled recordings")
    sp.add_argument("--model", required=True, help="model file written by train")
    sp.add_argument("--input", required=True, help="directory of labeled recordings")
    sp.add_argument("--output", required=True, help="output directory for confusion.csv and metrics.json")
    sp.add_argument("--features", choices=("td", "fd"), default=None,
                    help="feature path; must match the model (default: the model's)")
    common(sp)
    preprocessing(sp)

    sp = sub.add_parser("bench", help="time both feature paths on identical windows and train both")
    sp.add_argument("--input", required=True, help="directory of labeled recordings")
    sp.add_argument("--output", default=None, help="JSON report path (table always goes to stdout)")
    sp.add_argument("--trials", type=int, default=5, help="timing trials, median reported (>= 3)")
    sp.add_argument("--epochs", type=_positive_int, default=TrainConfig.max_epochs, help="maximum epochs (default 3000)")
    sp.add_argument("--lr", type=_positive_float, default=TrainConfig.learning_rate, help="learning rate (default 0.5)")
    sp.add_argument("--no-train", action="store_true", help="timing only")
    sp.add_argument("--slopes", action="store_true", help="also fit log-log complexity slopes over 128..4096")
    common(sp, seed=True)
    preprocessing(sp)

    sp = sub.add_parser("simulate", help="drive the simulated hand from a recording; write a state trace")
    sp.add_argument("--model", required=True, help="model file written by train")
    sp.add_argument("--input", required=True, help="recording CSV")
    sp.add_argument("--script", default=None, help="force timeline CSV (time_s,f1..f5)")
    sp.add_argument("--output", required=True, help="trace file (.json for JSON, otherwise CSV)")
    sp.add_argument("--confirm", type=_positive_int, default=2,
                    help="windows a new gesture must persist before it triggers an event (default 2)")
    common(sp)
    preprocessing(sp)
    return p


def _windows_ok(args, feature_path):
    if feature_path == "fd" and args.window & (args.window - 1):
        raise UsageError(f"--window {args.window} must be a power of two for --features fd")


def _recordings(args):
    recs = load_recordings(args.input)
    if getattr(args, "preprocess", False):
        recs = [preprocess(r, AdcConfig(r.sample_rate_hz, args.bits)) for r in recs]
    return recs


def cmd_synth(args):
    classes = tuple(GestureClass) if not args.classes else tuple(
        GestureClass.from_tag(c) for c in args.classes.split(","))
    adc = AdcConfig(args.rate, args.bits)
    recs = synthetic_corpus(args.per_class, args.duration, args.seed, adc,
                            default_profile(gain=args.gain, mains_v=args.mains), classes)
    if not args.raw:
        recs = [preprocess(r, adc) for r in recs]
    paths = save_recordings(recs, args.output)
    print(json.dumps({"recordings": len(paths), "output": str(args.output)}))


def cmd_features(args):
    _windows_ok(args, args.features)
    recs = _recordings(args)
    ws = labeled_windows(recs, args.window, args.stride) if all(r.label is not None for r in recs) else None
    windows = ws.windows if ws else np.concatenate(
        [np.stack([w.samples for w in window_stream(r, args.window, args.stride)]) for r in recs])
    selection = None
    if args.features == "fd" and args.model:
        selection = load_model(args.model).bin_selection
    x, selection = feature_matrix(windows, args.features, selection)
    channels = windows.shape[1]
    if args.features == "td":
        names = [f"ch{c}.{n}" for c in range(channels) for n in TD_FEATURE_NAMES]
    else:
        names = [f"ch{c}.bin{b}" for c in range(channels) for b in selection.indices[c]]
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("label," + ",".join(names) + "\n")
        labels = ws.labels if ws else [None] * x.shape[0]
        for lab, row in zip(labels, x):
            tag = "" if lab is None else GestureClass(int(lab)).tag
            fh.write(tag + "," + ",".join(repr(float(v)) for v in row) + "\n")
    print(json.dumps({"windows": int(x.shape[0]), "dim": int(x.shape[1]), "output": str(args.output)}))


def cmd_train(args):
    _windows_ok(args, args.features)
    cfg = TrainConfig(max_epochs=args.epochs, learning_rate=args.lr, patience=args.patience,
                      validation_fraction=args.val_fraction, test_fraction=args.test_fraction,
                      seed=args.seed)
    ws = labeled_windows(_recordings(args), args.window, args.stride)
    x, sel = feature_matrix(ws.windows, args.features)
    net, report = train(x, ws.labels, cfg, feature_path=args.features, bin_selection=sel)
    save_model(net, args.output)
    report_path = Path(args.report) if args.report else Path(str(args.output) + ".report.json")
    report_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    print(json.dumps({"model": str(args.output), "report": str(report_path), **report.to_dict()}))


def cmd_classify(args):
    net = load_model(args.model)
    path = args.features or net.feature_path
    if path != net.feature_path:
        raise DimensionError(
            f"dimension mismatch: model {args.model} takes {net.feature_path} features "
            f"(input_dim {net.input_dim}), requested --features {path}"
        )
    _windows_ok(args, path)
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for rec in _recordings(args):
            for i, pred in enumerate(classify_stream(net, window_stream(rec, args.window, args.stride), path)):
                out.write(json.dumps({
                    "window": i,
                    "class": net.class_names[pred.label],
                    "confidence": pred.confidence,
                    "probabilities": [float(v) for v in pred.probabilities],
                    "latency_ms": 1e3 * pred.latency_s,
                }) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_eval(args):
    net = load_model(args.model)
    path = args.features or net.feature_path
    if path != net.feature_path:
        raise DimensionError(f"dimension mismatch: model takes {net.feature_path} features, requested {path}")
    ws = labeled_windows(_recordings(args), args.window, args.stride)
    x, _ = feature_matrix(ws.windows, path, net.bin_selection)
    cm = evaluate(net, x, ws.labels)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "confusion.csv").write_text(cm.to_csv())
    metrics = {"accuracy": accuracy(cm), "n": cm.total, "feature_path": path}
    (outdir / "metrics.json").write_text(json.dumps(metrics, indent=2) + "\n")
    print(json.dumps(metrics))


def cmd_bench(args):
    if args.trials < 3:
        raise UsageError("--trials must be >= 3")
    cfg = TrainConfig(max_epochs=args.epochs, learning_rate=args.lr, seed=args.seed)
    report = benchmark(_recordings(args), trials=args.trials, window_len=args.window, stride=args.stride,
                       train_config=cfg, train_models=not args.no_train, slopes=args.slopes)
    print(report.table())
    if args.output:
        Path(args.output).write_text(report.to_json() + "\n")


def cmd_simulate(args):
    net = load_model(args.model)
    _windows_ok(args, net.feature_path)
    recs = _recordings(args)
    if len(recs) != 1:
        raise UsageError("simulate takes a single recording file as --input")
    script = load_force_script(args.script) if args.script else ForceScript.constant()
    trace = run_simulation(net, recs[0], FsrModel(), script, args.window, args.stride,
                           confirm_windows=args.confirm)
    text = trace.to_json() if str(args.output).endswith(".json") else trace.to_csv()
    Path(args.output).write_text(text)
    print(json.dumps({"ticks": len(trace), "output": str(args.output)}))


COMMANDS = {
    "synth": cmd_synth,
    "features": cmd_features,
    "train": cmd_train,
    "classify": cmd_classify,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "simulate": cmd_simulate,
}


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except FileNotFoundError as exc:
        return _fail("missing_file", str(exc), 1)
    except DimensionError as exc:
        return _fail("dimension_mismatch", str(exc), 1)
    except (SignalFormatError, ModelFormatError) as exc:
        return _fail("bad_file", str(exc), 1)
    except TrainingError as exc:
        return _fail("training", str(exc), 1)
    except ValueError as exc:
        return _fail("invalid_value", str(exc), 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
