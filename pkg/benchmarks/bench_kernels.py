"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is warmed up once (numba compiles on first call), then timed as
the best of ``--repeat`` runs. Results from both paths are checked equal.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from emgcombo import _kernels as K


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not K.USING_NUMBA:
        print("numba disabled (EMGCOMBO_DISABLE_NUMBA set or numba missing); nothing to compare")
        return 0

    rng = np.random.default_rng(0)
    Xt = rng.normal(size=(2000, 16))
    yt = rng.integers(0, 5, size=2000)
    Xd = rng.normal(size=(1500, 16))
    A, B = rng.normal(size=(800, 16)), rng.normal(size=(900, 16))
    act = rng.normal(size=(5000, 64))

    cases = [
        ("build_tree (2000x16, unlimited depth)", lambda: K.build_tree_np(Xt, yt, 5, 4, -1, 2, 1), lambda: K.build_tree_nb(Xt, yt, 5, 4, -1, 2, 1)),
        ("pairwise_sq_dists (1500x16)", lambda: K.pairwise_sq_dists_np(Xd), lambda: K.pairwise_sq_dists_nb(Xd)),
        ("mean_rbf (800x900x16)", lambda: K.mean_rbf_np(A, B, 0.05), lambda: K.mean_rbf_nb(A, B, 0.05)),
        ("leaky_relu (5000x64)", lambda: K.leaky_relu_np(act, 0.01), lambda: K.leaky_relu_nb(act, 0.01)),
    ]
    print(f"{'kernel':40s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}  equal")
    for name, f_np, f_nb in cases:
        t_np, t_nb = best_of(f_np, args.repeat), best_of(f_nb, args.repeat)
        r_np, r_nb = f_np(), f_nb()
        if isinstance(r_np, tuple):
            same = all(np.allclose(a, b, rtol=1e-12, atol=1e-12) for a, b in zip(r_np, r_nb))
        else:
            same = bool(np.allclose(r_np, r_nb, rtol=1e-12, atol=1e-12))
        print(f"{name:40s} {1e3 * t_np:10.2f} {1e3 * t_nb:10.2f} {t_np / t_nb:8.2f}  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
