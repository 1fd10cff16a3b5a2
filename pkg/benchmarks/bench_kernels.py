"""Time each hot kernel under numba and pure numpy.

    python benchmarks/bench_kernels.py [--repeat N]

Numba timings exclude the first (compiling) call.
"""
import argparse
import time

import numpy as np

from semmap import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    H, W, C, n = 500, 500, 5, 700_000
    rows, cols = rng.integers(0, H, n), rng.integers(0, W, n)
    z = rng.integers(0, C, n)
    logM = np.log(rng.dirichlet(np.ones(C), size=C))
    boost = rng.random(n) < 0.1

    def acc(fn):
        lp = np.zeros((H, W, C))
        ob = np.zeros((H, W), dtype=bool)
        return lambda: fn(lp, ob, rows, cols, z, logM, boost, 0.5, 2)

    raster = rng.choice(np.array([0, 1, 2, 3, 4, 255], dtype=np.uint8), size=(1000, 1000))

    def fill(fn):
        return lambda: fn(raster, 3, 3, 5, np.uint8(255))

    m = 640 * 480
    origins = np.tile([10.0, 0.0, 3.5], (m, 1))
    az = rng.uniform(-0.6, 0.6, m)
    el = rng.uniform(-0.5, -0.05, m)
    dirs = np.column_stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])

    def hill(fn):
        return lambda: fn(origins, dirs, _kernels.SURFACE_HILL, 2.0, 40.0, 200.0, 0.25, 1e-5, 64)

    return [
        (f"accumulate ({n:,} points)", acc, "accumulate"),
        ("fill_holes (1000x1000)", fill, "fill_holes"),
        (f"intersect hill ({m:,} rays)", hill, "intersect_surface"),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for title, make, name in cases(rng):
        nb = make(getattr(_kernels, name + "_numba"))
        nb()  # compile
        t_nb = best_of(nb, args.repeat)
        t_np = best_of(make(getattr(_kernels, name + "_numpy")), args.repeat)
        print(f"{title:34s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
