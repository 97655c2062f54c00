"""Virtual plane fixtures filtering commanded twists.

Forbidden planes remove the into-plane velocity component at the boundary;
guidance planes project motion onto the plane and attract back to it. Only
the linear part of a twist is ever touched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from hotbox.messages import DecodeError, Pose, TwistCommand, Vec3, validate_fixture_config

DEFAULT_TOL = 0.001
DEFAULT_K_ATTRACT = 2.0


@dataclass(frozen=True)
class PlaneFixture:
    point: Vec3
    normal: Vec3  # unit; positive side is allowed
    mode: str = "forbidden"  # forbidden | guidance
    tol: float = DEFAULT_TOL
    k_attract: float = DEFAULT_K_ATTRACT
    enabled: bool = True

    def __post_init__(self):
        if self.mode not in ("forbidden", "guidance"):
            raise ValueError(f"mode must be forbidden|guidance, got {self.mode!r}")
        n = self.normal.norm()
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"normal must be unit length, |n|={n:.6g}")
        if self.tol < 0 or self.k_attract < 0:
            raise ValueError("tol and k_attract must be >= 0")

    def to_payload(self):
        return {
            "point": self.point.to_payload(),
            "normal": self.normal.to_payload(),
            "mode": self.mode,
            "tol": float(self.tol),
            "k_attract": float(self.k_attract),
            "enabled": bool(self.enabled),
        }


@dataclass(frozen=True)
class FixtureSet:
    fixtures: tuple = ()

    def __iter__(self):
        return iter(self.fixtures)

    def __len__(self):
        return len(self.fixtures)

    def enabled(self):
        return [f for f in self.fixtures if f.enabled]

    def to_payload(self):
        return [f.to_payload() for f in self.fixtures]


def signed_distance(fixture: PlaneFixture, p: Vec3) -> float:
    """normal . (p - point); positive on the allowed side."""
    return fixture.normal.dot(p - fixture.point)


def filter_twist(
    fixtures: FixtureSet,
    ee: Pose,
    cmd: TwistCommand,
    max_lin: Optional[float] = None,
) -> TwistCommand:
    """Apply each enabled fixture in order to the linear twist.

    Forbidden: at or inside the tolerance band, the into-plane component is
    removed exactly; tangential motion passes through. Guidance: motion is
    projected onto the plane and attracted back with gain k_attract, then
    re-clamped to max_lin when given. The angular part is never filtered.
    """
    v = cmd.linear
    for f in fixtures:
        if not f.enabled:
            continue
        d = signed_distance(f, ee.position)
        vn = v.dot(f.normal)
        if f.mode == "forbidden":
            if d <= f.tol and vn < 0.0:
                v = v - f.normal.scaled(vn)
        else:
            v = v - f.normal.scaled(vn + f.k_attract * d)
    if max_lin is not None:
        n = v.norm()
        if n > max_lin:
            v = v.scaled(max_lin / n)
    return TwistCommand(v, cmd.angular)


def fixture_from_payload(payload: dict) -> PlaneFixture:
    n = Vec3.from_payload(payload["normal"], "normal")
    norm = n.norm()
    # validate_fixture_config already bounded the deviation; renormalize here.
    n = Vec3(n.x / norm, n.y / norm, n.z / norm)
    return PlaneFixture(
        point=Vec3.from_payload(payload["point"], "point"),
        normal=n,
        mode=payload["mode"],
        tol=float(payload.get("tol", DEFAULT_TOL)),
        k_attract=float(payload.get("k_attract", DEFAULT_K_ATTRACT)),
        enabled=bool(payload.get("enabled", True)),
    )


def update_fixtures(current: FixtureSet, payload) -> FixtureSet:
    """Atomically replace the fixture set from a wire payload.

    Raises DecodeError on an invalid payload; the caller keeps `current`.
    """
    validate_fixture_config(payload)
    return FixtureSet(tuple(fixture_from_payload(fx) for fx in payload))
