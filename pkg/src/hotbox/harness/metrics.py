"""Run metrics over recorded tick data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

from hotbox.messages import dumps_canonical


@dataclass(frozen=True)
class ArmTick:
    engaged: bool
    ee_pos: tuple
    target_pos: Optional[tuple] = None
    twist_lin: tuple = (0.0, 0.0, 0.0)
    twist_ang: tuple = (0.0, 0.0, 0.0)
    # Servo output before fixture filtering, for transparency checks.
    twist_lin_raw: tuple = (0.0, 0.0, 0.0)
    # Signed distance to the nearest forbidden plane, after integration (for
    # the penetration metric) and at filter time (for boundary checks).
    min_forbidden_distance: Optional[float] = None
    min_forbidden_distance_pre: Optional[float] = None


@dataclass(frozen=True)
class TickRecord:
    t: float
    arms: Dict[str, ArmTick] = field(default_factory=dict)


@dataclass(frozen=True)
class RunMetrics:
    mean_tracking_error: float = 0.0
    max_tracking_error: float = 0.0
    max_penetration: float = 0.0
    messages_in: int = 0
    messages_out: int = 0
    dropped: int = 0
    ticks: int = 0

    def to_payload(self):
        return {
            "mean_tracking_error": float(self.mean_tracking_error),
            "max_tracking_error": float(self.max_tracking_error),
            "max_penetration": float(self.max_penetration),
            "messages_in": int(self.messages_in),
            "messages_out": int(self.messages_out),
            "dropped": int(self.dropped),
            "ticks": int(self.ticks),
        }

    def to_text(self) -> str:
        return dumps_canonical(self.to_payload())


def compute_metrics(
    ticks: Sequence[TickRecord],
    messages_in: int = 0,
    messages_out: int = 0,
    dropped: int = 0,
) -> RunMetrics:
    """Tracking error over engaged ticks (zero by convention when nothing
    engaged) and worst forbidden-plane penetration over the whole run."""
    errors = []
    max_pen = 0.0
    for rec in ticks:
        for arm in rec.arms.values():
            if arm.engaged and arm.target_pos is not None:
                dx = arm.target_pos[0] - arm.ee_pos[0]
                dy = arm.target_pos[1] - arm.ee_pos[1]
                dz = arm.target_pos[2] - arm.ee_pos[2]
                errors.append(math.sqrt(dx * dx + dy * dy + dz * dz))
            if arm.min_forbidden_distance is not None:
                max_pen = max(max_pen, -arm.min_forbidden_distance)
    return RunMetrics(
        mean_tracking_error=sum(errors) / len(errors) if errors else 0.0,
        max_tracking_error=max(errors) if errors else 0.0,
        max_penetration=max_pen,
        messages_in=messages_in,
        messages_out=messages_out,
        dropped=dropped,
        ticks=len(ticks),
    )
