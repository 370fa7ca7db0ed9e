"""Compare the compiled and numpy kernel backends across window sizes.

    python benchmarks/bench_backends.py [--total 262144] [--trials 7] [--json out.json]
"""
import argparse
import json
import statistics
import time

import numpy as np

from myohand import kernels

SIZES = (128, 256, 512, 1024, 2048, 4096)
KERNELS = ("td_features_batch", "power_spectrum_batch", "window_stats_batch", "fft_batch")


def median_time(fn, x, trials):
    fn(x)
    ts = []
    for _ in range(trials):
        t0 = time.perf_counter()
        fn(x)
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--total", type=int, default=2**18, help="samples per timed call")
    ap.add_argument("--trials", type=int, default=7)
    ap.add_argument("--json", default=None, help="write raw timings here")
    args = ap.parse_args()

    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    rows = []
    for name in KERNELS:
        for n in SIZES:
            x = rng.standard_normal((args.total // n, n))
            if name == "fft_batch":
                x = x + 0j
            per = {b: 1e6 * median_time(getattr(mod, name), x, args.trials) / x.shape[0]
                   for b, mod in backends.items()}
            rows.append({"kernel": name, "window_len": n, "us_per_window": per})

    names = sorted(backends)
    print(f"{'kernel':22s} {'n':>5s} " + " ".join(f"{b + ' us':>12s}" for b in names)
          + ("   speedup" if len(names) > 1 else ""))
    for r in rows:
        line = f"{r['kernel']:22s} {r['window_len']:5d} " + " ".join(
            f"{r['us_per_window'][b]:12.3f}" for b in names)
        if "cython" in names:
            line += f"   {r['us_per_window']['python'] / r['us_per_window']['cython']:7.1f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
