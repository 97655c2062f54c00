import math
import random

import pytest

from hotbox.fixtures import (
    FixtureSet,
    PlaneFixture,
    filter_twist,
    signed_distance,
    update_fixtures,
)
from hotbox.messages import DecodeError, Pose, TwistCommand, Vec3

FLOOR = PlaneFixture(point=Vec3(0, 0, 0), normal=Vec3(0, 0, 1), mode="forbidden")
GUIDE = PlaneFixture(point=Vec3(0, 0, 0), normal=Vec3(0, 0, 1), mode="guidance")


def at(z):
    return Pose(Vec3(0.0, 0.0, z))


def tw(x=0.0, y=0.0, z=0.0):
    return TwistCommand(Vec3(x, y, z), Vec3())


class TestSignedDistance:
    def test_above(self):
        assert signed_distance(FLOOR, Vec3(0, 0, 0.5)) == 0.5

    def test_on_plane(self):
        assert signed_distance(FLOOR, Vec3(3, -2, 0)) == 0.0

    def test_below(self):
        assert signed_distance(FLOOR, Vec3(1, 2, -0.25)) == -0.25

    def test_offset_plane(self):
        f = PlaneFixture(point=Vec3(0, 0, 0.1), normal=Vec3(0, 0, 1), mode="forbidden")
        assert abs(signed_distance(f, Vec3(0, 0, 0.5)) - 0.4) < 1e-15


class TestForbidden:
    def test_full_normal_removal(self):
        out = filter_twist(FixtureSet((FLOOR,)), at(0.0), tw(z=-1.0))
        assert out.linear == Vec3(0, 0, 0)

    def test_tangential_preserved(self):
        out = filter_twist(FixtureSet((FLOOR,)), at(0.0), tw(x=1.0, z=-1.0))
        assert out.linear == Vec3(1.0, 0.0, 0.0)

    def test_departing_motion_untouched(self):
        out = filter_twist(FixtureSet((FLOOR,)), at(0.0), tw(x=0.3, z=0.7))
        assert out.linear == Vec3(0.3, 0.0, 0.7)

    def test_far_above_untouched(self):
        out = filter_twist(FixtureSet((FLOOR,)), at(0.5), tw(z=-1.0))
        assert out.linear == Vec3(0.0, 0.0, -1.0)

    def test_correction_parallel_to_normal(self):
        rng = random.Random(2)
        for _ in range(200):
            v = tw(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
            p = at(rng.uniform(-0.1, 0.3))
            out = filter_twist(FixtureSet((FLOOR,)), p, v)
            dv = out.linear - v.linear
            # (v' - v) is parallel to n = +z: x and y components untouched.
            assert dv.x == 0.0 and dv.y == 0.0

    def test_idempotent_at_boundary(self):
        fs = FixtureSet((FLOOR,))
        once = filter_twist(fs, at(0.0), tw(x=0.4, z=-0.9))
        twice = filter_twist(fs, at(0.0), once)
        assert once == twice

    def test_angular_passthrough(self):
        cmd = TwistCommand(Vec3(0, 0, -1), Vec3(0.1, 0.2, 0.3))
        out = filter_twist(FixtureSet((FLOOR,)), at(0.0), cmd)
        assert out.angular == cmd.angular


class TestGuidance:
    def test_attraction_arithmetic(self):
        out = filter_twist(FixtureSet((GUIDE,)), at(0.1), tw(x=1.0))
        assert abs(out.linear.x - 1.0) < 1e-15
        assert abs(out.linear.z + 0.2) < 1e-15

    def test_on_plane_projection_only(self):
        out = filter_twist(FixtureSet((GUIDE,)), at(0.0), tw(x=0.5, z=0.4))
        assert out.linear == Vec3(0.5, 0.0, 0.0)

    def test_reclamp(self):
        out = filter_twist(FixtureSet((GUIDE,)), at(1.0), tw(), max_lin=0.25)
        assert abs(out.linear.norm() - 0.25) < 1e-12

    def test_monotone_approach(self):
        # Zero commanded twist: attraction alone shrinks |d| every tick until
        # inside twice the tolerance band.
        p = 0.25
        dt = 0.01
        prev = abs(p)
        for _ in range(2000):
            if abs(p) < 2 * GUIDE.tol:
                break
            out = filter_twist(FixtureSet((GUIDE,)), at(p), tw())
            p += out.linear.z * dt
            assert abs(p) < prev
            prev = abs(p)
        assert abs(p) < 2 * GUIDE.tol


class TestOrderingAndToggles:
    def test_empty_set_identity(self):
        cmd = tw(x=0.1, z=-0.2)
        assert filter_twist(FixtureSet(()), at(0.0), cmd) == cmd

    def test_disabled_identity(self):
        off = PlaneFixture(point=Vec3(), normal=Vec3(0, 0, 1), mode="forbidden", enabled=False)
        cmd = tw(z=-1.0)
        assert filter_twist(FixtureSet((off,)), at(0.0), cmd) == cmd

    def test_sequential_application(self):
        wall = PlaneFixture(point=Vec3(0.2, 0, 0), normal=Vec3(-1, 0, 0), mode="forbidden")
        fs = FixtureSet((FLOOR, wall))
        out = filter_twist(fs, Pose(Vec3(0.2, 0.0, 0.0)), tw(x=1.0, y=0.5, z=-1.0))
        assert out.linear == Vec3(0.0, 0.5, 0.0)

    def test_toggle_off_on_stateless(self):
        payload_on = [FLOOR.to_payload()]
        payload_off = [PlaneFixture(point=Vec3(), normal=Vec3(0, 0, 1), mode="forbidden", enabled=False).to_payload()]
        fs = update_fixtures(FixtureSet(), payload_on)
        fs = update_fixtures(fs, payload_off)
        fs = update_fixtures(fs, payload_on)
        cmd = tw(z=-1.0)
        assert filter_twist(fs, at(0.0), cmd).linear == Vec3(0, 0, 0)


class TestUpdate:
    def test_replace(self):
        fs = update_fixtures(FixtureSet(), [GUIDE.to_payload()])
        assert len(fs) == 1
        assert fs.fixtures[0].mode == "guidance"

    def test_zero_normal_rejected(self):
        current = FixtureSet((FLOOR,))
        bad = [dict(FLOOR.to_payload(), normal={"x": 0.0, "y": 0.0, "z": 0.0})]
        with pytest.raises(DecodeError):
            update_fixtures(current, bad)
        # Caller keeps the previous set untouched.
        assert current.fixtures == (FLOOR,)

    def test_slightly_off_normal_renormalized(self):
        n = 1.0 + 5e-7
        payload = [dict(FLOOR.to_payload(), normal={"x": 0.0, "y": 0.0, "z": n})]
        fs = update_fixtures(FixtureSet(), payload)
        assert abs(fs.fixtures[0].normal.norm() - 1.0) <= 1e-12

    def test_defaults_applied(self):
        fs = update_fixtures(
            FixtureSet(),
            [{"point": {"x": 0.0, "y": 0.0, "z": 0.0}, "normal": {"x": 0.0, "y": 0.0, "z": 1.0}, "mode": "guidance"}],
        )
        f = fs.fixtures[0]
        assert f.tol == 0.001 and f.k_attract == 2.0 and f.enabled


def test_non_penetration_closed_loop():
    """Per-step penetration bounded by one integration step; commanded inward
    velocity at the boundary is exactly zeroed."""
    rng = random.Random(31)
    max_lin, dt = 0.25, 0.01
    fs = FixtureSet((FLOOR,))
    for _ in range(20):
        z = rng.uniform(0.02, 0.2)
        vz = -max_lin
        min_d = z
        for _ in range(400):
            vx = rng.uniform(-0.2, 0.2)
            cmd = TwistCommand(Vec3(vx, 0.0, vz), Vec3())
            # keep within the commanded safety clamp
            n = cmd.linear.norm()
            if n > max_lin:
                cmd = TwistCommand(cmd.linear.scaled(max_lin / n), cmd.angular)
            out = filter_twist(fs, at(z), cmd)
            d = signed_distance(FLOOR, Vec3(0, 0, z))
            if d <= FLOOR.tol:
                assert out.linear.z >= 0.0
            z += out.linear.z * dt
            min_d = min(min_d, z)
        assert min_d >= -(max_lin * dt) - 1e-12
