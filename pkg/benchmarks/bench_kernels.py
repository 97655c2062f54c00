"""Benchmark the jitted kernels against their pure-numpy bodies.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Requires the numba backend (the default); the pure-numpy path is reached
through each dispatcher's .py_func so both run in one process on identical
inputs. HOTBOX_KERNELS=numpy selects the numpy path package-wide at import
time instead.
"""

import argparse
import time

import numpy as np

from hotbox.kinematics import _kernels, builtin_chain


def time_fn(fn, *args, repeat):
    fn(*args)  # warm (JIT compile or first-touch)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=2000)
    parser.add_argument("--cloud-points", type=int, default=100_000)
    args = parser.parse_args()

    if _kernels.BACKEND != "numba":
        raise SystemExit(
            "numba backend inactive (HOTBOX_KERNELS=numpy or numba missing); "
            "nothing to compare"
        )

    chain = builtin_chain("hotbox7")
    rng = np.random.default_rng(1)
    q = rng.uniform(chain.q_min, chain.q_max)
    frames = _kernels.dh_frames(chain.dh, q, chain.base)
    J = _kernels.jacobian_from_frames(frames)
    v = rng.normal(size=6)

    pts = rng.uniform(-1, 1, size=(args.cloud_points, 3))
    keys = np.floor(pts / 0.05).astype(np.int64)
    order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0])).astype(np.int64)
    cols = np.zeros((0, 3))

    cases = [
        ("dh_frames (7 dof)", _kernels.dh_frames, (chain.dh, q, chain.base), args.repeat),
        ("jacobian_from_frames", _kernels.jacobian_from_frames, (frames,), args.repeat),
        ("dls_qdot (6x7)", _kernels.dls_qdot, (J, v, 0.05), args.repeat),
        (
            f"voxel_accumulate ({args.cloud_points} pts)",
            _kernels.voxel_accumulate,
            (order, keys, pts, cols, False),
            max(1, args.repeat // 100),
        ),
    ]

    print(f"{'kernel':<34} {'numba':>12} {'numpy':>12} {'speedup':>9}")
    for name, fn, fargs, repeat in cases:
        jit_t = time_fn(fn, *fargs, repeat=repeat)
        py_t = time_fn(fn.py_func, *fargs, repeat=repeat)
        print(f"{name:<34} {jit_t * 1e6:>10.1f}us {py_t * 1e6:>10.1f}us {py_t / jit_t:>8.1f}x")


if __name__ == "__main__":
    main()
