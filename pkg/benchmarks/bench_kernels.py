"""Compare the compiled kernel backend against the numpy fallback.

Runs every shared kernel on working-resolution inputs and reports per-call
time for each available backend plus the speedup.  Usage::

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from limbpose.kernels import available_backends


def _time_call(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=30, help="timing repeats per kernel")
    parser.add_argument("--height", type=int, default=96)
    parser.add_argument("--width", type=int, default=128)
    args = parser.parse_args()

    h, w = args.height, args.width
    rng = np.random.default_rng(0)
    conf_map = rng.uniform(size=(h, w))
    cases = [
        ("disk_mask", (h, w, 61.3, 40.2, 6.0)),
        ("gaussian_disk", (h, w, 61.3, 40.2, 6.0, 18.0)),
        ("segment_mask", (h, w, 20.0, 30.0, 90.0, 70.0, 6.0)),
        ("gaussian_segment", (h, w, 20.0, 30.0, 90.0, 70.0, 6.0, 18.0)),
        ("local_maxima_mask", (conf_map, 5, 0.3)),
        ("line_integral", (conf_map, 20.0, 30.0, 90.0, 70.0, 32)),
    ]

    backends = available_backends()
    names = list(backends)
    print(f"kernel benchmark at {w}x{h}, best of {args.repeats} runs")
    header = f"{'kernel':<20}" + "".join(f"{n + ' (us)':>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kernel, call_args in cases:
        times = {}
        for name, module in backends.items():
            times[name] = _time_call(getattr(module, kernel), call_args, args.repeats)
        row = f"{kernel:<20}" + "".join(f"{times[n] * 1e6:>14.1f}" for n in names)
        if len(names) == 2:
            row += f"{times['numpy'] / times['native']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
