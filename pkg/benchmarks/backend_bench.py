"""Compare the numba and pure-numpy backends on the two hot kernel families.

Each backend runs in its own subprocess because the backend is chosen at
import time from JUMPLMI_BACKEND. The worker times the Jacobi eigensolver on
full-LMI-sized symmetric matrices and the per-trial trajectory kernels
through run_method, then prints one JSON line the parent collects.

Usage: python benchmarks/backend_bench.py [--repeats 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def worker(repeats):
    import numpy as np
    from jumplmi import _backend, linalg, simulate
    from jumplmi.functions import convex_smooth, strongly_convex

    rng = np.random.default_rng(0)
    mats = []
    for _ in range(40):
        raw = rng.normal(size=(102, 102))
        mats.append(linalg.SymMatrix(0.5 * (raw + raw.T)))
    sc = strongly_convex(0.1, 1.0)
    problems = {
        "saga": simulate.generate_problem("saga", sc, 0.1, 1.0, 50, 8, seed=0),
        "finito": simulate.generate_problem("finito", sc, 0.1, 1.0, 50, 8,
                                            seed=0),
        # sdca's strong convexity lives in the regularizer, not the components
        "sdca": simulate.generate_problem("sdca", convex_smooth(1.0), 0.1,
                                          1.0, 50, 8, seed=0),
    }

    def eig_batch():
        for mat in mats:
            linalg.eigenvalues_sym(mat)

    def traj(method):
        simulate.run_method(method, problems[method], 0.01, 1000, 0, 40)

    # first calls pay any jit compilation; time the steady state
    eig_batch()
    for method in problems:
        traj(method)

    results = {"backend": _backend.BACKEND,
               "jacobi_102dim_x40": _time(eig_batch, repeats)}
    for method in problems:
        results["%s_40trials_x1000" % method] = _time(
            lambda m=method: traj(m), repeats)
    print(json.dumps(results))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.repeats)
        return 0

    rows = {}
    for backend in ("numba", "numpy"):
        env = {**os.environ, "JUMPLMI_BACKEND": backend}
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker",
             "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True, check=True)
        rows[backend] = json.loads(out.stdout.strip().splitlines()[-1])
        if rows[backend]["backend"] != backend:
            print("warning: requested %s, got %s (numba missing?)"
                  % (backend, rows[backend]["backend"]), file=sys.stderr)

    keys = [k for k in rows["numba"] if k != "backend"]
    width = max(len(k) for k in keys)
    print("%-*s  %12s  %12s  %8s" % (width, "kernel", "numba [s]",
                                     "numpy [s]", "speedup"))
    for key in keys:
        tb, tp = rows["numba"][key], rows["numpy"][key]
        print("%-*s  %12.4f  %12.4f  %7.1fx" % (width, key, tb, tp, tp / tb))
    return 0


if __name__ == "__main__":
    sys.exit(main())
