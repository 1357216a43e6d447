"""Timing comparison of the compiled kernels against their numpy twins.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]

Each kernel runs on representative shapes from the loss pipeline; the
compiled variant gets one warm-up call so compilation time never lands
in a measurement.  Results agree to ~1e-12, checked on every run.
"""

import argparse
import sys
import time

import numpy as np

from csfp import kernels
from csfp.accel import HAVE_NUMBA


def timed(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    x = rng.standard_normal((8, 96, 96))
    w = rng.standard_normal((12, 8, 3, 3)) * 0.2
    b = rng.standard_normal(12) * 0.05
    feats = rng.standard_normal((4096, 12))
    feats_b = rng.standard_normal((4096, 12))
    img = rng.standard_normal((256, 256))
    k = np.exp(-0.5 * (np.arange(-6, 7) / 2.0) ** 2)
    k /= k.sum()
    return [
        ("conv2d 8x96x96 -> 12ch 3x3", "conv2d", (x, w, b, 1, 1)),
        ("maxpool2 12x96x96", "maxpool2", (rng.standard_normal((12, 96, 96)),)),
        ("dot_matrix 4096x12 @ 4096x12", "dot_matrix", (feats, feats_b)),
        ("pairwise_l2 4096x12", "pairwise_l2", (feats[:1024], feats_b[:1024])),
        ("correlate1d_reflect 256x256 k13", "correlate1d_reflect", (img, k)),
        ("correlate1d_valid 256x256 k11", "correlate1d_valid", (img, k[1:12])),
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (default 5)")
    args = parser.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1
    rng = np.random.default_rng(0)
    rows = []
    for label, name, call_args in cases(rng):
        fn_np = getattr(kernels, f"{name}_numpy")
        fn_jit = getattr(kernels, f"{name}_jit")
        ref = fn_np(*call_args)
        got = fn_jit(*call_args)  # warm-up doubles as the agreement check
        err = float(np.abs(np.asarray(ref) - np.asarray(got)).max())
        if err > 1e-9:
            print(f"MISMATCH {name}: {err:.3e}", file=sys.stderr)
            return 1
        t_np = timed(fn_np, call_args, args.repeats)
        t_jit = timed(fn_jit, call_args, args.repeats)
        rows.append((label, t_np, t_jit, t_np / t_jit, err))
    print(f"{'case':36} {'numpy':>10} {'numba':>10} {'speedup':>8} {'max|diff|':>10}")
    for label, t_np, t_jit, speed, err in rows:
        print(f"{label:36} {t_np * 1e3:9.2f}ms {t_jit * 1e3:9.2f}ms {speed:7.1f}x {err:10.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
