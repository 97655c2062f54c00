"""Simulation rig: the tick-loop owner of arms, controllers, and fixtures.

The rig is an ordinary bridge client (LocalClient) so every message it
consumes or produces crosses the same envelope interface an external client
uses. One rig instance is driven either by the live server's wall-clock loop
or by the replay engine's logical clock.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from hotbox.bridge import Broker, LocalClient
from hotbox.fixtures import FixtureSet, filter_twist, signed_distance, update_fixtures
from hotbox.harness.config import ServerConfig
from hotbox.harness.metrics import ArmTick, TickRecord
from hotbox.kinematics import ArmState, KinematicChain, dls, jacobian, step
from hotbox.messages import (
    DecodeError,
    Envelope,
    GrabMsg,
    Header,
    JointStateMsg,
    StampedPose,
    TwistCommand,
)
from hotbox.teleop import TeleopController

log = logging.getLogger("hotbox.rig")


@dataclass
class ArmUnit:
    side: str
    chain: KinematicChain
    controller: TeleopController
    state: ArmState
    pub_seq: int = 0


class SimRig:
    def __init__(self, cfg: ServerConfig, broker: Broker):
        self.cfg = cfg
        self.client = LocalClient(broker, "sim-rig")
        self.fixtures: FixtureSet = cfg.fixtures
        self.arms: Dict[str, ArmUnit] = {}
        self.tick_count = 0
        self._joint_pub_stride = max(1, round(cfg.tick_rate / cfg.joint_state_publish_rate))
        for side, arm_cfg in cfg.arms.items():
            chain = arm_cfg.resolve_chain()
            home = arm_cfg.resolve_home(chain)
            self.arms[side] = ArmUnit(
                side=side,
                chain=chain,
                controller=TeleopController(arm_cfg.controller),
                state=ArmState.at(chain, home),
            )
            self.client.advertise(f"/arm/{side}/joint_states", "JointState")
            self.client.advertise(f"/arm/{side}/ee_pose", "PoseStamped")
            self.client.advertise(f"/arm/{side}/twist_cmd", "Twist")
            self.client.subscribe(f"/hand/{side}")
            self.client.subscribe(f"/hand/{side}/grab")
        self.client.subscribe("/teleop/scale")
        self.client.subscribe("/teleop/fixtures")

    # -- inbound ---------------------------------------------------------------

    def drain_inbound(self, now: float):
        for env in self.client.drain():
            if env.op == "publish":
                self.handle_publish(env, now)

    def handle_publish(self, env: Envelope, now: float):
        topic = env.topic
        try:
            if topic == "/teleop/scale":
                self._on_scale(env.msg["data"])
            elif topic == "/teleop/fixtures":
                self.fixtures = update_fixtures(self.fixtures, env.msg)
            else:
                parts = topic.split("/")
                if len(parts) >= 3 and parts[1] == "hand":
                    side = parts[2]
                    arm = self.arms.get(side)
                    if arm is None:
                        return
                    if topic.endswith("/grab"):
                        self._on_grab(arm, GrabMsg.from_payload(env.msg).grabbed)
                    else:
                        arm.controller.on_hand_sample(StampedPose.from_payload(env.msg), now)
        except (DecodeError, KeyError, TypeError, ValueError) as e:
            # The broker schema-validated already; anything else is reported
            # and the previous state is kept.
            self._report("error", f"rejected message on {topic}: {e}")

    def _on_scale(self, value):
        for arm in self.arms.values():
            try:
                arm.controller.set_scale(value)
            except ValueError as e:
                self._report("error", f"scale rejected: {e}")
                return

    def _on_grab(self, arm: ArmUnit, grabbed: bool):
        ctrl = arm.controller
        if grabbed and ctrl.state.last_hand is None:
            self._report("warn", f"grab on /hand/{arm.side} before any hand sample; ignored")
            return
        hand = ctrl.state.last_hand.pose if ctrl.state.last_hand else None
        ctrl.on_grab(grabbed, hand=hand, ee=arm.state.ee)

    def _report(self, level, text):
        log.warning("%s: %s", level, text)
        self.client.send(Envelope(op="status", level=level, text=text))

    # -- tick ------------------------------------------------------------------

    def tick(self, now: float) -> TickRecord:
        """One control step: compute, filter, solve, integrate, publish."""
        arm_ticks = {}
        forbidden = [f for f in self.fixtures.enabled() if f.mode == "forbidden"]
        for side, arm in self.arms.items():
            ctrl = arm.controller
            ee_pre = arm.state.ee
            raw = ctrl.compute_twist(ee_pre, now)
            cmd = filter_twist(self.fixtures, ee_pre, raw, max_lin=ctrl.config.max_lin)
            if cmd.is_zero():
                qdot = np.zeros(arm.chain.dof)
            else:
                J = jacobian(arm.chain, arm.state.q)
                qdot = dls(J, cmd, lam=self.cfg.damping, vel_limits=arm.chain.vel_limits)
            arm.state = step(arm.chain, arm.state, qdot, self.cfg.dt)
            self.client.publish(f"/arm/{side}/twist_cmd", cmd.to_payload())

            target = ctrl.target_pose()
            ee = arm.state.ee.position
            min_d = min_d_pre = None
            if forbidden:
                min_d = min(signed_distance(f, ee) for f in forbidden)
                min_d_pre = min(signed_distance(f, ee_pre.position) for f in forbidden)
            arm_ticks[side] = ArmTick(
                engaged=ctrl.engaged,
                ee_pos=ee.as_tuple(),
                target_pos=target.position.as_tuple() if target else None,
                twist_lin=cmd.linear.as_tuple(),
                twist_ang=cmd.angular.as_tuple(),
                twist_lin_raw=raw.linear.as_tuple(),
                min_forbidden_distance=min_d,
                min_forbidden_distance_pre=min_d_pre,
            )
        if self.tick_count % self._joint_pub_stride == 0:
            self.publish_state(now)
        self.tick_count += 1
        return TickRecord(t=now, arms=arm_ticks)

    def publish_state(self, now: float):
        sec = int(now)
        nanosec = max(0, min(999_999_999, int(round((now - sec) * 1e9))))
        for side, arm in self.arms.items():
            header = Header(seq=arm.pub_seq, stamp_sec=sec, stamp_nanosec=nanosec, frame_id="world")
            arm.pub_seq += 1
            js = JointStateMsg(
                header=header,
                name=tuple(f"{arm.chain.name}_{i}" for i in range(arm.chain.dof)),
                position=tuple(float(v) for v in arm.state.q),
                velocity=tuple(float(v) for v in arm.state.qdot),
            )
            self.client.publish(f"/arm/{side}/joint_states", js.to_payload())
            sp = StampedPose(header=header, pose=arm.state.ee)
            self.client.publish(f"/arm/{side}/ee_pose", sp.to_payload())

    def close(self):
        self.client.close()
