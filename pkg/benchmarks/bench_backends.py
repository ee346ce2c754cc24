"""Compare the numba-compiled kernels against the pure-Python fallback.

The shift kernels dominate sweep runtime, so this times each grid kernel
over a large deviation grid under both backends.  Backends are selected by
the OPINIONSHIFT_NO_NUMBA environment variable at import time, so the
script re-invokes itself in two subprocesses and prints a comparison.

    python benchmarks/bench_backends.py [--n 200000]
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time


def run_kernels(n: int) -> dict:
    import numpy as np

    from opinionshift import backend_name
    from opinionshift.posterior import (
        _gc_shift_grid,
        _gl_ratio_grid,
        _lc_shift_grid,
        _ll_unequal_shift_grid,
    )

    x0 = np.linspace(-40.0, 40.0, n)
    kernels = {
        "gaussian-cauchy": lambda: _gc_shift_grid(x0, 1.0),
        "laplace-cauchy": lambda: _lc_shift_grid(x0, 1.0),
        "gaussian-laplace": lambda: _gl_ratio_grid(x0 / math.sqrt(2.0), math.sqrt(2.0)),
        "laplace-laplace": lambda: _ll_unequal_shift_grid(x0, 1.0, 2.0),
    }
    timings = {}
    checksum = 0.0
    for name, fn in kernels.items():
        fn()  # warmup (includes JIT compilation on the numba path)
        best = math.inf
        for _ in range(3):
            t0 = time.perf_counter()
            out = fn()
            best = min(best, time.perf_counter() - t0)
        checksum += float(out[n // 3])
        timings[name] = best
    return {"backend": backend_name(), "n": n, "timings": timings, "checksum": checksum}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200_000, help="grid points per kernel")
    parser.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.inner:
        print(json.dumps(run_kernels(args.n)))
        return 0

    results = {}
    for label, disable in (("numba", "0"), ("python", "1")):
        env = dict(os.environ, OPINIONSHIFT_NO_NUMBA=disable)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--inner", "--n", str(args.n)],
            env=env, capture_output=True, text=True, check=True,
        )
        results[label] = json.loads(proc.stdout.strip().splitlines()[-1])

    if not math.isclose(
        results["numba"]["checksum"], results["python"]["checksum"],
        rel_tol=1e-12,
    ):
        print("warning: backends disagree on kernel outputs", file=sys.stderr)

    n = results["numba"]["n"]
    print(f"\nshift-kernel grid timings, n = {n} points per kernel (best of 3)\n")
    print(f"{'kernel':<18} {'numba':>12} {'python':>12} {'speedup':>9}")
    for name in results["numba"]["timings"]:
        tn = results["numba"]["timings"][name]
        tp = results["python"]["timings"][name]
        print(f"{name:<18} {tn * 1e3:>10.2f}ms {tp * 1e3:>10.2f}ms {tp / tn:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
