"""Time the hot kernels under numba and under the pure-numpy fallback.

Each backend runs in its own subprocess because the backend is chosen at
import time from ``O2EST_DISABLE_NUMBA``.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = "--worker"


def _worker(repeat: int) -> dict:
    import numpy as np

    from o2est import _accel
    from o2est.linalg import haar_unitary

    rng = np.random.default_rng(0)
    n = 625
    ydiag = np.exp(2j * np.pi * np.arange(n) / n)
    x0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    images = np.stack([np.stack([haar_unitary(6, rng) for _ in range(2)]) for _ in range(33)])
    path = np.stack([haar_unitary(8, rng) for _ in range(257)])

    cases = {
        "abc_operator_norm": lambda: _accel.abc_operator_norm(1.0, 0.5, 0.3, ydiag, 25, x0, tol=1e-13, maxiter=2000),
        "pairwise_sectional": lambda: _accel.pairwise_sectional(images),
        "finite_difference_sup": lambda: _accel.finite_difference_sup(path, 1 / 256),
    }
    out = {"backend": _accel.backend(), "timings": {}}
    for name, fn in cases.items():
        t0 = time.perf_counter()
        fn()  # includes compilation (or cache load) for numba
        first = time.perf_counter() - t0
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out["timings"][name] = {"first_s": first, "best_s": best}
    return out


def _spawn(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    if disable:
        env["O2EST_DISABLE_NUMBA"] = "1"
    else:
        env.pop("O2EST_DISABLE_NUMBA", None)
    proc = subprocess.run([sys.executable, __file__, WORKER, str(repeat)], env=env, check=True,
                          capture_output=True, text=True)
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    if argv is None and len(sys.argv) > 2 and sys.argv[1] == WORKER:
        print(json.dumps(_worker(int(sys.argv[2]))))
        return 0
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", default=None, help="also write the raw timings here")
    args = p.parse_args(argv)

    results = [_spawn(False, args.repeat), _spawn(True, args.repeat)]
    nb, npy = results
    print(f"{'kernel':<24}{'numba best':>12}{'numpy best':>12}{'speedup':>10}{'numba first':>13}")
    for name in nb["timings"]:
        a, b = nb["timings"][name], npy["timings"][name]
        print(f"{name:<24}{a['best_s']:>11.4f}s{b['best_s']:>11.4f}s{b['best_s'] / a['best_s']:>9.1f}x"
              f"{a['first_s']:>12.3f}s")
    if nb["backend"] != "numba":
        print("note: numba was not importable, both columns use the numpy fallback")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
