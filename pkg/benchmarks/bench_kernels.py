"""Benchmark the compiled kernels against the pure-NumPy fallback.

Times the individual accumulation kernels and the end-to-end pipeline on
both backends. Run from the repository root after installing:

    python benchmarks/bench_kernels.py [--n 1000] [--p 2] [--repeat 200]
"""

import argparse
import time

import numpy as np

from gals import _kernels_py

try:
    from gals import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeat):
    # warm up, then best-of-3 averages
    fn()
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_kernels(n, p, repeat):
    rng = np.random.default_rng(0)
    X = np.ascontiguousarray(rng.standard_normal((n, p)))
    y = rng.standard_normal(n)
    resid = rng.standard_normal(n)
    iv = rng.uniform(0.2, 5.0, n)
    w = rng.uniform(0.1, 3.0, n)
    x1 = np.ascontiguousarray(X[:, 0])

    cases = [
        ("chebyshev_basis(K=4)", lambda impl: impl.chebyshev_basis(x1, 4)),
        ("weighted_gram", lambda impl: impl.weighted_gram(X, w)),
        ("weighted_xty", lambda impl: impl.weighted_xty(X, w, y)),
        ("moment_blocks", lambda impl: impl.moment_blocks(X, y, resid, iv)),
    ]
    print(f"kernels at n={n}, p={p} (mean seconds per call, best of 3)")
    header = f"{'kernel':<22}{'python':>12}{'compiled':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        t_py = _time(lambda: call(_kernels_py), repeat)
        if _kernels is not None:
            t_c = _time(lambda: call(_kernels), repeat)
            print(f"{name:<22}{t_py:>12.3e}{t_c:>12.3e}{t_py / t_c:>8.1f}x")
        else:
            print(f"{name:<22}{t_py:>12.3e}{'n/a':>12}{'':>9}")
    print()


def bench_pipeline(n, repeat):
    import subprocess
    import sys

    code = (
        "import time, numpy as np\n"
        "import gals\n"
        "rng = np.random.default_rng(1)\n"
        f"n = {n}\n"
        "x = rng.standard_normal(n)\n"
        "y = 1 + 2 * x + np.exp(0.25 * x) * rng.standard_normal(n)\n"
        "d = gals.build_dataset(y, x.reshape(-1, 1))\n"
        "gals.fit_all(d)\n"  # warm-up
        "t0 = time.perf_counter()\n"
        f"for _ in range({repeat}):\n"
        "    gals.fit_all(d)\n"
        f"print((time.perf_counter() - t0) / {repeat})\n"
    )

    def run(backend):
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True, text=True,
            env={"GALS_BACKEND": backend, "PATH": "/usr/bin:/bin"},
        )
        if out.returncode != 0:
            return None
        return float(out.stdout.strip())

    t_py = run("python")
    t_c = run("compiled")
    print(f"end-to-end three-estimator fit at n={n} (seconds per call)")
    if t_py is not None:
        print(f"{'python':<22}{t_py:>12.3e}")
    if t_c is not None:
        print(f"{'compiled':<22}{t_c:>12.3e}")
    if t_py is not None and t_c is not None:
        print(f"{'speedup':<22}{t_py / t_c:>11.1f}x")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    if _kernels is None:
        print("note: compiled extension not built; timing the fallback only\n")
    bench_kernels(args.n, args.p, args.repeat)
    bench_pipeline(args.n, args.repeat)


if __name__ == "__main__":
    main()
