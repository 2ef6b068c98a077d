"""Time the hot kernels under both backends.

    python benchmarks/bench_kernels.py            # numba vs numpy, default sizes
    python benchmarks/bench_kernels.py --quick

Each backend runs in its own interpreter (the backend is fixed at import).
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
import dftlab
from dftlab.distributions import SymmetricPareto, sample
from dftlab.diagnostics import hunt_young_ratio
from dftlab.monte_carlo import estimate_exceedance
from dftlab.oracle import DiscreteLaw, exact_prefix_max_distribution
from dftlab.sequence_engine import dft_prefix_scan

quick = sys.argv[1] == "1"
P = SymmetricPareto(1.8)
n_scan = 10**6 if quick else 10**7
xs = sample(P, 1, n_scan)


def best(fn, repeat=3):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


res = {"backend": dftlab.BACKEND}
res["scan"] = (n_scan, best(lambda: dft_prefix_scan(xs, 1.0)))
reps, n = (500, 4096) if quick else (2000, 16384)
res["monte_carlo"] = (reps * n, best(lambda: estimate_exceedance(P, 0.9, n, 1e9, reps, 2), 1))
hn = 1024 if quick else 4096
ys = sample(P, 3, hn)
res["hunt_young"] = (hn * 2 * hn, best(lambda: hunt_young_ratio(ys, hn ** (1 / 1.2), hn, 2 * hn)))
en = 16 if quick else 20
res["enumeration"] = (2**en, best(lambda: exact_prefix_max_distribution(DiscreteLaw.rademacher(), 1.0, en), 1))
print(json.dumps(res))
"""


def run_backend(backend: str, quick: bool) -> dict:
    env = dict(os.environ, DFTLAB_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", CHILD, "1" if quick else "0"], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)
    results = {b: run_backend(b, args.quick) for b in ("numba", "numpy")}
    print(f"{'kernel':<12} {'work':>12} {'numba s':>10} {'numpy s':>10} {'ns/unit numba':>14} {'speedup':>8}")
    for key in ("scan", "monte_carlo", "hunt_young", "enumeration"):
        work, tn = results["numba"][key]
        _, tv = results["numpy"][key]
        print(f"{key:<12} {work:>12d} {tn:>10.4f} {tv:>10.4f} {1e9 * tn / work:>14.2f} {tv / tn:>8.1f}x")


if __name__ == "__main__":
    main()
