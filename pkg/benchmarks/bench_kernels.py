"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from pdmsqueeze import _kernels_py

try:
    from pdmsqueeze import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def cases():
    n = np.arange(513, dtype=np.float64)
    sqrt_e = np.sqrt(n * (0.05 * n + 1.1012492197250394))
    s = np.sin(np.linspace(-1.5, 1.5, 2048))
    w0 = np.cos(np.arcsin(s)) ** 10.5
    return {
        "ladder_recurrence_scaled n=512": lambda k: k.ladder_recurrence_scaled(0.8, 0.3, 0.2, sqrt_e),
        "hermite_scaled n=512": lambda k: k.hermite_scaled(512, 1.3, -0.4),
        "hyp2f1_neumaier n=60": lambda k: k.hyp2f1_neumaier(60, 10.5, -0.7, 23.0, 2.0),
        "gegenbauer_table 64x2048": lambda k: k.gegenbauer_table(64, 10.5, s),
        "orthonormal_gegenbauer_table 64x2048": lambda k: k.orthonormal_gegenbauer_table(64, 10.5, s, w0),
    }


def best_time(fn, kernels, repeat):
    number = 1
    while timeit.timeit(lambda: fn(kernels), number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(lambda: fn(kernels), number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels_c is None:
        print("compiled extension not available; timing the fallback only")
    print(f"{'kernel':40s} {'python [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for name, fn in cases().items():
        t_py = best_time(fn, _kernels_py, args.repeat)
        if _kernels_c is None:
            print(f"{name:40s} {t_py * 1e6:12.1f} {'-':>12s} {'-':>8s}")
            continue
        t_c = best_time(fn, _kernels_c, args.repeat)
        print(f"{name:40s} {t_py * 1e6:12.1f} {t_c * 1e6:12.1f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
