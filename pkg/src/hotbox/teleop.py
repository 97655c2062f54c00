"""Clutched pose-to-twist teleoperation controller.

One controller per arm. A grab latches the current hand and end-effector
poses; while engaged, hand displacement from the latch (scaled) moves a
virtual target that the controller servos toward with proportional gains,
deadbands, and hard norm clamps on the emitted twist. Anything else --
released clutch, stale hand stream -- commands exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from hotbox.messages import (
    Pose,
    StampedPose,
    TwistCommand,
    Vec3,
    ZERO_TWIST,
    quat_error,
    quat_mul,
)

SCALE_MAX = 10.0


@dataclass
class ControllerConfig:
    kp_lin: float = 2.0  # 1/s
    kp_ang: float = 2.0  # 1/s
    max_lin: float = 0.25  # m/s
    max_ang: float = 1.0  # rad/s
    deadband_lin: float = 0.005  # m
    deadband_ang: float = 0.02  # rad
    scale: float = 1.0
    stale_timeout: float = 0.25  # s

    def __post_init__(self):
        for name in ("kp_lin", "kp_ang", "max_lin", "max_ang", "deadband_lin", "deadband_ang", "stale_timeout"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite")
        if not (math.isfinite(self.scale) and 0 < self.scale <= SCALE_MAX):
            raise ValueError(f"scale must lie in (0, {SCALE_MAX}]")

    @classmethod
    def from_payload(cls, payload: dict) -> "ControllerConfig":
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - allowed
        if unknown:
            raise ValueError(f"unknown controller fields: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in payload.items()})


@dataclass
class ClutchState:
    engaged: bool = False
    hand_latch: Optional[Pose] = None
    ee_latch: Optional[Pose] = None
    last_hand: Optional[StampedPose] = None
    last_rx: Optional[float] = None


class TeleopController:
    """Per-arm clutch state machine emitting bounded twist commands."""

    def __init__(self, config: Optional[ControllerConfig] = None):
        self.config = config or ControllerConfig()
        self.state = ClutchState()

    @property
    def engaged(self) -> bool:
        return self.state.engaged

    def on_grab(self, grabbed: bool, hand: Optional[Pose] = None, ee: Optional[Pose] = None):
        """Engage (latching hand and ee) or release the clutch.

        Re-grabbing while engaged refreshes the latches. Engaging without a
        hand pose is ignored: there is nothing to latch against yet.
        """
        if not grabbed:
            self.state.engaged = False
            return
        if hand is None or ee is None:
            return
        self.state.engaged = True
        self.state.hand_latch = hand
        self.state.ee_latch = ee

    def on_hand_sample(self, sample: StampedPose, now: float):
        """Accept an in-order hand sample; out-of-order seq is discarded."""
        prev = self.state.last_hand
        if prev is not None and sample.header.seq < prev.header.seq:
            return
        self.state.last_hand = sample
        self.state.last_rx = now

    def set_scale(self, s) -> float:
        """Update motion scaling; takes effect without re-latching.

        Values above the cap clamp to it; zero, negative, or non-finite
        values are rejected (ValueError) and the previous scale is retained.
        """
        if not (isinstance(s, (int, float)) and not isinstance(s, bool) and math.isfinite(s) and s > 0):
            raise ValueError(f"scale must be a positive finite number, got {s!r}")
        self.config.scale = min(float(s), SCALE_MAX)
        return self.config.scale

    def target_pose(self) -> Optional[Pose]:
        """Virtual target the controller is servoing toward, if engaged."""
        st = self.state
        if not st.engaged or st.last_hand is None or st.hand_latch is None or st.ee_latch is None:
            return None
        hand = st.last_hand.pose
        offset = (hand.position - st.hand_latch.position).scaled(self.config.scale)
        target_pos = st.ee_latch.position + offset
        rot_since_latch = quat_mul(hand.orientation, st.hand_latch.orientation.conjugate())
        target_ori = quat_mul(rot_since_latch, st.ee_latch.orientation)
        return Pose(target_pos, target_ori)

    def compute_twist(self, ee_now: Pose, now: float) -> TwistCommand:
        st = self.state
        cfg = self.config
        if not st.engaged:
            return ZERO_TWIST
        if st.last_rx is None or now - st.last_rx > cfg.stale_timeout:
            return ZERO_TWIST
        target = self.target_pose()
        if target is None:
            return ZERO_TWIST

        e_lin = target.position - ee_now.position
        if e_lin.norm() < cfg.deadband_lin:
            e_lin = Vec3()
        e_ang = quat_error(target.orientation, ee_now.orientation)
        if e_ang.norm() < cfg.deadband_ang:
            e_ang = Vec3()

        lin = e_lin.scaled(cfg.kp_lin)
        ang = e_ang.scaled(cfg.kp_ang)
        lin_norm = lin.norm()
        if lin_norm > cfg.max_lin:
            lin = lin.scaled(cfg.max_lin / lin_norm)
        ang_norm = ang.norm()
        if ang_norm > cfg.max_ang:
            ang = ang.scaled(cfg.max_ang / ang_norm)
        return TwistCommand(lin, ang)
