"""Compare the compiled path kernel with the numpy fallback.

Both backends walk the same paths.  Exit times agree bit for bit for the
direct walkers; the conformal clock may differ in the last ulp because
numpy's vectorized exp is not libm's.

    python3 benchmarks/bench_kernels.py --n 2000
"""

import argparse
import math
import time

import numpy as np

from ptau import _backend
from ptau.domain import Annulus, Disk, HalfDisk, Strip, isosceles_triangle
from ptau.geometry import ConformalMapSpec
from ptau.sampler import SimConfig, conformal_exit_times, exit_times

CASES = [
    ("disk center", lambda n, b: exit_times(Disk(), (0.0, 0.0), n, threads=1, backend=b)),
    ("annulus |z|=1.4", lambda n, b: exit_times(Annulus(1.0, 2.0), (1.4, 0.0), n, threads=1, backend=b)),
    ("half disk (0,0.45)", lambda n, b: exit_times(HalfDisk(1.0), (0.0, 0.45), n, threads=1, backend=b)),
    ("triangle pi/4", lambda n, b: exit_times(isosceles_triangle(math.pi / 4), (0.0, 0.3), n,
                                               threads=1, backend=b)),
    ("exp time change", lambda n, b: conformal_exit_times(
        Strip(0.0, math.log(2.0)), ConformalMapSpec.exponential(), (math.log(1.4), 0.0), n,
        threads=1, backend=b)),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000, help="paths per case")
    args = ap.parse_args()
    if "compiled" not in _backend.available():
        print("compiled kernel not built; only the fallback is available")
        return
    print(f"{'case':<22}{'compiled/s':>14}{'python/s':>14}{'speedup':>10}  max rel diff")
    for name, run in CASES:
        rates, outs = {}, {}
        for b in ("compiled", "python"):
            t0 = time.perf_counter()
            outs[b] = run(args.n, b)
            rates[b] = args.n / (time.perf_counter() - t0)
        a, b = outs["compiled"]["time"], outs["python"]["time"]
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        print(f"{name:<22}{rates['compiled']:>14.0f}{rates['python']:>14.0f}"
              f"{rates['compiled'] / rates['python']:>10.1f}  {diff:.1e}")


if __name__ == "__main__":
    main()
