"""Server configuration: bridge settings, per-arm chains and controllers,
initial fixtures, and loop rates. The config file uses the same JSON grammar
as the wire format."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Dict, Optional

from hotbox.fixtures import FixtureSet, update_fixtures
from hotbox.kinematics import (
    BUILTIN_CHAINS,
    HOME_Q,
    ChainError,
    KinematicChain,
    builtin_chain,
    load_chain,
)
from hotbox.messages import DecodeError, Pose, UnitQuaternion, Vec3
from hotbox.teleop import ControllerConfig

SIDES = ("left", "right")


class ConfigError(ValueError):
    pass


@dataclass
class ArmConfig:
    chain_ref: str = "hotbox7"  # built-in name or a chain file path
    base_position: Optional[tuple] = None
    base_orientation: Optional[tuple] = None  # (x, y, z, w)
    home_q: Optional[tuple] = None
    controller: ControllerConfig = field(default_factory=ControllerConfig)

    def resolve_chain(self) -> KinematicChain:
        if self.chain_ref in BUILTIN_CHAINS:
            chain = builtin_chain(self.chain_ref)
        else:
            if not os.path.exists(self.chain_ref):
                raise ConfigError(f"chain file not found: {self.chain_ref}")
            try:
                chain = load_chain(self.chain_ref)
            except ChainError as e:
                raise ConfigError(str(e)) from None
        base = chain.base_pose
        if self.base_position is not None:
            base = Pose(Vec3(*self.base_position), base.orientation)
        if self.base_orientation is not None:
            x, y, z, w = self.base_orientation
            base = Pose(base.position, UnitQuaternion(w, x, y, z).normalized())
        return chain.with_base(base)

    def resolve_home(self, chain: KinematicChain) -> tuple:
        if self.home_q is not None:
            if len(self.home_q) != chain.dof:
                raise ConfigError(
                    f"home_q has {len(self.home_q)} values for a {chain.dof}-dof chain"
                )
            return tuple(self.home_q)
        return HOME_Q.get(chain.name, tuple(0.0 for _ in range(chain.dof)))


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 9090
    queue_capacity: int = 256
    tick_rate: float = 100.0  # Hz
    joint_state_publish_rate: float = 30.0  # Hz
    damping: float = 0.05
    arms: Dict[str, ArmConfig] = field(default_factory=dict)
    fixtures: FixtureSet = field(default_factory=FixtureSet)

    def __post_init__(self):
        if not self.arms:
            self.arms = {
                "left": ArmConfig(base_position=(-0.3, 0.0, 0.8)),
                "right": ArmConfig(base_position=(0.3, 0.0, 0.8)),
            }
        if self.tick_rate <= 0 or self.joint_state_publish_rate <= 0:
            raise ConfigError("rates must be positive")
        if self.tick_rate < self.joint_state_publish_rate:
            raise ConfigError("tick_rate must be >= joint_state_publish_rate")
        if self.damping < 0:
            raise ConfigError("damping must be >= 0")
        for side in self.arms:
            if side not in SIDES:
                raise ConfigError(f"unknown arm side {side!r}")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate


def default_config() -> ServerConfig:
    return ServerConfig()


def _arm_from_payload(payload) -> ArmConfig:
    allowed = {"chain", "base_position", "base_orientation", "home_q", "controller"}
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"unknown arm fields: {sorted(unknown)}")
    ctrl = payload.get("controller", {})
    try:
        controller = ControllerConfig.from_payload(ctrl)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad controller config: {e}") from None
    return ArmConfig(
        chain_ref=payload.get("chain", "hotbox7"),
        base_position=tuple(payload["base_position"]) if "base_position" in payload else None,
        base_orientation=tuple(payload["base_orientation"]) if "base_orientation" in payload else None,
        home_q=tuple(payload["home_q"]) if "home_q" in payload else None,
        controller=controller,
    )


def config_from_payload(payload) -> ServerConfig:
    allowed = {
        "host",
        "port",
        "queue_capacity",
        "tick_rate",
        "joint_state_publish_rate",
        "damping",
        "arms",
        "fixtures",
    }
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    arms = {}
    for side, arm_payload in payload.get("arms", {}).items():
        arms[side] = _arm_from_payload(arm_payload)
    fixtures = FixtureSet()
    if "fixtures" in payload:
        try:
            fixtures = update_fixtures(FixtureSet(), payload["fixtures"])
        except DecodeError as e:
            raise ConfigError(f"bad fixtures: {e}") from None
    try:
        cfg = ServerConfig(
            host=payload.get("host", "127.0.0.1"),
            port=int(payload.get("port", 9090)),
            queue_capacity=int(payload.get("queue_capacity", 256)),
            tick_rate=float(payload.get("tick_rate", 100.0)),
            joint_state_publish_rate=float(payload.get("joint_state_publish_rate", 30.0)),
            damping=float(payload.get("damping", 0.05)),
            arms=arms,
            fixtures=fixtures,
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None
    # Resolve chains eagerly so missing files fail at load, not first tick.
    for side, arm in cfg.arms.items():
        chain = arm.resolve_chain()
        arm.resolve_home(chain)
    return cfg


def load_config(path) -> ServerConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except ValueError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    if not isinstance(payload, dict):
        raise ConfigError("config top level must be an object")
    return config_from_payload(payload)
