"""Hot numeric kernels for the arm simulator.

Each kernel is a plain numpy function compiled with numba @njit when the
backend is active. Set HOTBOX_KERNELS=numpy to force the pure-numpy path
(also taken automatically when numba is not importable); HOTBOX_KERNELS=numba
requires numba and fails loudly if missing. Jitted kernels keep their
original Python body on `.py_func`, which the benchmark uses to compare
both paths in one process.
"""

import os

import numpy as np

_FLAG = os.environ.get("HOTBOX_KERNELS", "auto").strip().lower()
if _FLAG not in ("", "auto", "numba", "numpy"):
    raise RuntimeError(f"HOTBOX_KERNELS must be auto|numba|numpy, got {_FLAG!r}")

if _FLAG == "numpy":
    _use_numba = False
else:
    try:
        from numba import njit

        _use_numba = True
    except ImportError:
        if _FLAG == "numba":
            raise
        _use_numba = False

BACKEND = "numba" if _use_numba else "numpy"


def _jit(fn):
    if _use_numba:
        return njit(cache=True)(fn)
    return fn


@_jit
def dh_frames(dh, q, base):
    """Chain standard DH link transforms onto a 4x4 base transform.

    dh is (n, 4): columns a, alpha, d, theta_offset. Returns (n+1, 4, 4)
    where row 0 is the base and row n the end-effector frame.
    """
    n = q.shape[0]
    frames = np.empty((n + 1, 4, 4))
    frames[0] = base
    A = np.empty((4, 4))
    for i in range(n):
        a = dh[i, 0]
        alpha = dh[i, 1]
        d = dh[i, 2]
        th = q[i] + dh[i, 3]
        ct = np.cos(th)
        st = np.sin(th)
        ca = np.cos(alpha)
        sa = np.sin(alpha)
        A[0, 0] = ct
        A[0, 1] = -st * ca
        A[0, 2] = st * sa
        A[0, 3] = a * ct
        A[1, 0] = st
        A[1, 1] = ct * ca
        A[1, 2] = -ct * sa
        A[1, 3] = a * st
        A[2, 0] = 0.0
        A[2, 1] = sa
        A[2, 2] = ca
        A[2, 3] = d
        A[3, 0] = 0.0
        A[3, 1] = 0.0
        A[3, 2] = 0.0
        A[3, 3] = 1.0
        frames[i + 1] = frames[i] @ A
    return frames


@_jit
def jacobian_from_frames(frames):
    """Geometric Jacobian at the end effector from precomputed DH frames.

    Column i is (z_i x (p_ee - p_i), z_i) for revolute joint i, where z_i and
    p_i come from frame i (the frame the joint rotates in).
    """
    n = frames.shape[0] - 1
    J = np.empty((6, n))
    pe = frames[n, :3, 3]
    for i in range(n):
        zx = frames[i, 0, 2]
        zy = frames[i, 1, 2]
        zz = frames[i, 2, 2]
        rx = pe[0] - frames[i, 0, 3]
        ry = pe[1] - frames[i, 1, 3]
        rz = pe[2] - frames[i, 2, 3]
        J[0, i] = zy * rz - zz * ry
        J[1, i] = zz * rx - zx * rz
        J[2, i] = zx * ry - zy * rx
        J[3, i] = zx
        J[4, i] = zy
        J[5, i] = zz
    return J


@_jit
def dls_qdot(J, v, lam):
    """Damped-least-squares twist resolution: J^T (J J^T + lam^2 I)^-1 v."""
    m = J.shape[0]
    A = J @ J.T + (lam * lam) * np.eye(m)
    b = v.copy().reshape(m, 1)
    y = np.linalg.solve(A, b)
    out = J.T @ y
    return out[:, 0].copy()


@_jit
def voxel_accumulate(order, keys, pts, cols, has_cols):
    """Centroid accumulation over voxel groups.

    order is an argsort of keys by (kx, ky, kz); keys is (n, 3) int64. Returns
    (centroids, color_means, counts) with one row per occupied voxel, in the
    sorted key order.
    """
    n = order.shape[0]
    groups = 0
    for idx in range(n):
        if idx == 0:
            groups += 1
        else:
            i = order[idx]
            j = order[idx - 1]
            if keys[i, 0] != keys[j, 0] or keys[i, 1] != keys[j, 1] or keys[i, 2] != keys[j, 2]:
                groups += 1
    cent = np.zeros((groups, 3))
    cmean = np.zeros((groups, 3))
    counts = np.zeros(groups, np.int64)
    g = -1
    for idx in range(n):
        i = order[idx]
        fresh = idx == 0
        if not fresh:
            j = order[idx - 1]
            fresh = keys[i, 0] != keys[j, 0] or keys[i, 1] != keys[j, 1] or keys[i, 2] != keys[j, 2]
        if fresh:
            g += 1
        cent[g, 0] += pts[i, 0]
        cent[g, 1] += pts[i, 1]
        cent[g, 2] += pts[i, 2]
        if has_cols:
            cmean[g, 0] += cols[i, 0]
            cmean[g, 1] += cols[i, 1]
            cmean[g, 2] += cols[i, 2]
        counts[g] += 1
    for k in range(groups):
        c = counts[k]
        cent[k, 0] /= c
        cent[k, 1] /= c
        cent[k, 2] /= c
        if has_cols:
            cmean[k, 0] /= c
            cmean[k, 1] /= c
            cmean[k, 2] /= c
    return cent, cmean, counts


KERNELS = (dh_frames, jacobian_from_frames, dls_qdot, voxel_accumulate)


def warmup():
    """Trigger JIT compilation (or no-op on the numpy path)."""
    dh = np.array([[1.0, 0.0, 0.0, 0.0]])
    q = np.zeros(1)
    base = np.eye(4)
    frames = dh_frames(dh, q, base)
    J = jacobian_from_frames(frames)
    dls_qdot(J, np.zeros(6), 0.05)
    pts = np.zeros((2, 3))
    keys = np.zeros((2, 3), np.int64)
    order = np.arange(2, dtype=np.int64)
    voxel_accumulate(order, keys, pts, pts, False)
