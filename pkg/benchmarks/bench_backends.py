#!/usr/bin/env python3
"""Benchmark the compiled evaluation core against the numpy fallback.

The two hot kernels are arbitrary-point trig-polynomial evaluation (the
solver's Newton refinements and certificate scans) and spike spectra (the
forward map). Uniform-grid scans go through the FFT in both configurations
and are not benchmarked here.

Run:  python benchmarks/bench_backends.py [--repeats 7]
"""

import argparse
import time

import numpy as np

from spikesolve import _accel
from spikesolve._accel import fallback

try:
    from spikesolve._accel import _evalcore
except ImportError:
    _evalcore = None


def best_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"selected backend: {_accel.BACKEND}")
    if _evalcore is None:
        print("compiled core not built; showing fallback timings only")

    print("\ntrig_eval: degree M, P points")
    print(f"{'M':>6} {'P':>8} {'numpy (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}")
    for M, P in [(64, 64), (128, 256), (128, 4096), (512, 4096), (1024, 16384)]:
        coeffs = rng.normal(size=2 * M + 1) + 1j * rng.normal(size=2 * M + 1)
        xs = rng.uniform(0, 1, P)
        t_py = best_time(lambda: fallback.trig_eval(coeffs, xs), args.repeats)
        if _evalcore is not None:
            cc = np.ascontiguousarray(coeffs, dtype=np.complex128)
            cx = np.ascontiguousarray(xs)
            t_c = best_time(lambda: _evalcore.trig_eval(cc, cx), args.repeats)
            print(f"{M:>6} {P:>8} {t_py * 1e3:>12.3f} {t_c * 1e3:>14.3f} {t_py / t_c:>8.1f}x")
        else:
            print(f"{M:>6} {P:>8} {t_py * 1e3:>12.3f} {'-':>14} {'-':>8}")

    print("\nspike_spectrum: J spikes, degree M")
    print(f"{'J':>6} {'M':>8} {'numpy (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}")
    for J, M in [(4, 128), (16, 128), (16, 512), (64, 512), (128, 1024)]:
        pos = rng.uniform(0, 1, J)
        amp = rng.normal(size=J) + 1j * rng.normal(size=J)
        t_py = best_time(lambda: fallback.spike_spectrum(pos, amp, M), args.repeats)
        if _evalcore is not None:
            cp = np.ascontiguousarray(pos)
            ca = np.ascontiguousarray(amp, dtype=np.complex128)
            t_c = best_time(lambda: _evalcore.spike_spectrum(cp, ca, M), args.repeats)
            print(f"{J:>6} {M:>8} {t_py * 1e3:>12.3f} {t_c * 1e3:>14.3f} {t_py / t_c:>8.1f}x")
        else:
            print(f"{J:>6} {M:>8} {t_py * 1e3:>12.3f} {'-':>14} {'-':>8}")


if __name__ == "__main__":
    main()
