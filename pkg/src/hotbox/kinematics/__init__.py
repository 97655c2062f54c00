"""Serial-chain arm model: forward kinematics, geometric Jacobian,
damped-least-squares twist resolution, and fixed-step integration.

Chain geometry uses standard DH rows (a, alpha, d, theta_offset), revolute
joints only, composed onto a base pose. Two chains ship built in: `planar2`,
a two-link unit-length test chain, and `hotbox7`, a 7-DOF arm mounted
top-down inside the work cell.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from hotbox.messages import IDENTITY_QUAT, Pose, TwistCommand, UnitQuaternion, Vec3
from hotbox.kinematics import _kernels
from hotbox.kinematics._kernels import BACKEND

SINGULARITY_TOL = 1e-10
DEFAULT_DAMPING = 0.05
DEFAULT_DT = 0.01


class DimensionError(ValueError):
    pass


class SolveError(RuntimeError):
    """Raised when an undamped solve meets a singular configuration."""

    def __init__(self, reason="singular"):
        self.reason = reason
        super().__init__(reason)


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class DHRow:
    a: float
    alpha: float
    d: float
    theta_offset: float = 0.0
    joint: str = "revolute"
    limits: tuple = (-math.pi, math.pi)
    vel_limit: float = 1.5

    def __post_init__(self):
        if self.joint != "revolute":
            raise ChainError(f"unsupported joint type {self.joint!r}")
        lo, hi = self.limits
        if not lo < hi:
            raise ChainError(f"joint limits must satisfy min < max, got {self.limits}")
        if not self.vel_limit > 0:
            raise ChainError("vel_limit must be positive")


class KinematicChain:
    """Immutable serial-manipulator description with cached numpy blocks."""

    def __init__(self, name: str, rows: Sequence[DHRow], base_pose: Pose = Pose()):
        if not rows:
            raise ChainError("a chain needs at least one row")
        if abs(base_pose.orientation.norm() - 1.0) > 1e-9:
            raise ChainError("base orientation must be unit-norm")
        self.name = name
        self.rows = tuple(rows)
        self.base_pose = base_pose
        self.dh = np.array([[r.a, r.alpha, r.d, r.theta_offset] for r in rows], dtype=np.float64)
        self.q_min = np.array([r.limits[0] for r in rows], dtype=np.float64)
        self.q_max = np.array([r.limits[1] for r in rows], dtype=np.float64)
        self.vel_limits = np.array([r.vel_limit for r in rows], dtype=np.float64)
        self.base = np.eye(4)
        self.base[:3, :3] = np.array(base_pose.orientation.to_matrix())
        self.base[:3, 3] = base_pose.position.as_tuple()

    @property
    def dof(self) -> int:
        return len(self.rows)

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.q_min, self.q_max)

    def to_payload(self):
        return {
            "name": self.name,
            "base_pose": self.base_pose.to_payload(),
            "rows": [
                {
                    "a": r.a,
                    "alpha": r.alpha,
                    "d": r.d,
                    "theta_offset": r.theta_offset,
                    "joint": r.joint,
                    "limits": list(r.limits),
                    "vel_limit": r.vel_limit,
                }
                for r in self.rows
            ],
        }

    @classmethod
    def from_payload(cls, payload) -> "KinematicChain":
        try:
            name = payload["name"]
            base = Pose.from_payload(payload["base_pose"]) if "base_pose" in payload else Pose()
            rows = [
                DHRow(
                    a=float(r["a"]),
                    alpha=float(r["alpha"]),
                    d=float(r["d"]),
                    theta_offset=float(r.get("theta_offset", 0.0)),
                    joint=r.get("joint", "revolute"),
                    limits=tuple(r.get("limits", (-math.pi, math.pi))),
                    vel_limit=float(r.get("vel_limit", 1.5)),
                )
                for r in payload["rows"]
            ]
        except (KeyError, TypeError, ValueError) as e:
            raise ChainError(f"bad chain definition: {e}") from None
        return cls(name, rows, base)

    def with_base(self, base_pose: Pose) -> "KinematicChain":
        return KinematicChain(self.name, self.rows, base_pose)


def load_chain(path) -> KinematicChain:
    with open(path, "r", encoding="utf-8") as f:
        try:
            payload = json.load(f)
        except ValueError as e:
            raise ChainError(f"chain file {path}: {e}") from None
    return KinematicChain.from_payload(payload)


def save_chain(chain: KinematicChain, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(chain.to_payload(), f, sort_keys=True, indent=2)
        f.write("\n")


# ---------------------------------------------------------------------------
# Built-in chains
# ---------------------------------------------------------------------------

TOP_DOWN_MOUNT = UnitQuaternion(0.0, 1.0, 0.0, 0.0)  # 180 degrees about x


def _planar2() -> KinematicChain:
    rows = [
        DHRow(a=1.0, alpha=0.0, d=0.0, limits=(-10.0, 10.0), vel_limit=10.0),
        DHRow(a=1.0, alpha=0.0, d=0.0, limits=(-10.0, 10.0), vel_limit=10.0),
    ]
    return KinematicChain("planar2", rows)


def _hotbox7(base_x: float = 0.0) -> KinematicChain:
    half_pi = math.pi / 2
    rows = [
        DHRow(a=0.0, alpha=half_pi, d=0.28, limits=(-3.0, 3.0), vel_limit=1.5),
        DHRow(a=0.0, alpha=-half_pi, d=0.01, limits=(-2.2, 2.2), vel_limit=1.5),
        DHRow(a=0.0, alpha=half_pi, d=0.42, limits=(-3.0, 3.0), vel_limit=1.5),
        DHRow(a=0.0, alpha=-half_pi, d=0.01, limits=(-2.2, 2.2), vel_limit=1.5),
        DHRow(a=0.0, alpha=half_pi, d=0.31, limits=(-3.0, 3.0), vel_limit=2.0),
        DHRow(a=0.0, alpha=-half_pi, d=0.0, limits=(-2.2, 2.2), vel_limit=2.0),
        DHRow(a=0.0, alpha=0.0, d=0.17, limits=(-3.0, 3.0), vel_limit=2.0),
    ]
    base = Pose(Vec3(base_x, 0.0, 0.8), TOP_DOWN_MOUNT)
    return KinematicChain("hotbox7", rows, base)


def builtin_chain(name: str) -> KinematicChain:
    if name == "planar2":
        return _planar2()
    if name == "hotbox7":
        return _hotbox7()
    raise ChainError(f"unknown built-in chain {name!r}")


BUILTIN_CHAINS = ("planar2", "hotbox7")

# Home configuration keeps the arm well away from the straight-out singularity.
HOME_Q = {
    "planar2": (0.3, 0.6),
    "hotbox7": (0.0, 0.5, 0.0, 1.3, 0.0, 0.7, 0.0),
}


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def _as_q(chain: KinematicChain, q) -> np.ndarray:
    arr = np.asarray(q, dtype=np.float64)
    if arr.shape != (chain.dof,):
        raise DimensionError(f"expected {chain.dof} joint values, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def fk_frames(chain: KinematicChain, q) -> np.ndarray:
    return _kernels.dh_frames(chain.dh, _as_q(chain, q), chain.base)


def fk(chain: KinematicChain, q) -> Pose:
    """End-effector pose in the world frame."""
    T = fk_frames(chain, q)[-1]
    quat = UnitQuaternion.from_matrix(tuple(tuple(row) for row in T[:3, :3]))
    return Pose(Vec3(T[0, 3], T[1, 3], T[2, 3]), quat)


def jacobian(chain: KinematicChain, q) -> np.ndarray:
    """6xN geometric Jacobian (linear rows first, then angular) at the ee."""
    return _kernels.jacobian_from_frames(fk_frames(chain, q))


def dls(J: np.ndarray, v, lam: float = DEFAULT_DAMPING, vel_limits=None) -> np.ndarray:
    """Resolve a twist to joint velocities via damped least squares.

    qdot = J^T (J J^T + lam^2 I)^-1 v, then scaled by a single factor <= 1 so
    no component exceeds its velocity limit (uniform scaling preserves the
    commanded twist direction). lam == 0 raises SolveError at singular J.
    """
    J = np.asarray(J, dtype=np.float64)
    if J.ndim != 2:
        raise DimensionError("J must be a 2-D matrix")
    if isinstance(v, TwistCommand):
        v = np.array(
            [v.linear.x, v.linear.y, v.linear.z, v.angular.x, v.angular.y, v.angular.z]
        )
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (J.shape[0],):
        raise DimensionError(f"twist length {v.shape} does not match J rows {J.shape[0]}")
    if lam < 0:
        raise ValueError("damping must be >= 0")
    if not np.all(np.isfinite(J)):
        raise ValueError("J must be finite")
    if lam == 0.0:
        A = J @ J.T
        s = np.linalg.svd(A, compute_uv=False)
        if s.size == 0 or s[-1] <= SINGULARITY_TOL:
            raise SolveError("singular")
    qdot = _kernels.dls_qdot(np.ascontiguousarray(J), np.ascontiguousarray(v), float(lam))
    if vel_limits is not None:
        limits = np.asarray(vel_limits, dtype=np.float64)
        if limits.shape != qdot.shape:
            raise DimensionError("vel_limits length does not match joint count")
        mags = np.abs(qdot)
        over = mags > limits
        if np.any(over):
            qdot = qdot * np.min(limits[over] / mags[over])
    return qdot


@dataclass
class ArmState:
    """Joint configuration plus cached end-effector pose.

    The ee cache is recomputed on every mutation; treat instances as owned by
    a single tick context.
    """

    q: np.ndarray
    qdot: np.ndarray
    ee: Pose

    @classmethod
    def at(cls, chain: KinematicChain, q) -> "ArmState":
        q = chain.clamp(_as_q(chain, q))
        return cls(q=q, qdot=np.zeros(chain.dof), ee=fk(chain, q))


def step(chain: KinematicChain, state: ArmState, qdot, dt: float) -> ArmState:
    """Explicit Euler step with joint-limit clamping.

    Joints that hit a limit report achieved velocity 0 in that component.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    qdot = _as_q(chain, qdot)
    raw = state.q + qdot * dt
    clamped = chain.clamp(raw)
    hit = raw != clamped
    achieved = np.where(hit, 0.0, qdot)
    if np.array_equal(clamped, state.q) and np.array_equal(achieved, state.qdot):
        return ArmState(q=state.q, qdot=state.qdot, ee=state.ee)
    return ArmState(q=clamped, qdot=achieved, ee=fk(chain, clamped))
