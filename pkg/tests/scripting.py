"""Synthetic operator sessions for headless tests: scripted grab-and-drag
hand streams in the session-log format the replay engine consumes."""

import math

from hotbox.harness.logs import LogRecord
from hotbox.messages import Envelope, Header, Pose, StampedPose, UnitQuaternion, Vec3


def hand_record(t, side, pos, seq, ori=None):
    sp = StampedPose(
        header=Header(seq=seq, stamp_sec=int(t), stamp_nanosec=int((t % 1) * 1e9), frame_id="hand"),
        pose=Pose(Vec3(*pos), ori or UnitQuaternion()),
    )
    env = Envelope(op="publish", topic=f"/hand/{side}", msg=sp.to_payload())
    return LogRecord(t=t, direction="in", envelope=env)


def grab_record(t, side, grabbed):
    env = Envelope(op="publish", topic=f"/hand/{side}/grab", msg={"grabbed": grabbed})
    return LogRecord(t=t, direction="in", envelope=env)


def scale_record(t, value):
    return LogRecord(
        t=t, direction="in", envelope=Envelope(op="publish", topic="/teleop/scale", msg={"data": value})
    )


def drag_script(
    side="left",
    displacement=(0.2, 0.0, 0.0),
    move_time=2.5,
    settle_time=2.0,
    rate=30.0,
    release=False,
    step_jump=False,
):
    """Grab at the origin, drag by `displacement`, then hold while streaming.

    With step_jump the displacement arrives as a single discontinuous sample
    instead of a smooth ramp (useful for latency probes).
    """
    records = []
    seq = 0
    dt = 1.0 / rate
    # A couple of resting samples so the grab has something to latch.
    for _ in range(2):
        records.append(hand_record(seq * dt, side, (0.0, 0.0, 0.0), seq))
        seq += 1
    t_grab = seq * dt
    records.append(grab_record(t_grab, side, True))
    t = t_grab
    if step_jump:
        t += dt
        records.append(hand_record(t, side, displacement, seq))
        seq += 1
    else:
        steps = max(1, int(move_time * rate))
        for k in range(1, steps + 1):
            t = t_grab + k * dt
            frac = min(1.0, k / steps)
            pos = tuple(d * frac for d in displacement)
            records.append(hand_record(t, side, pos, seq))
            seq += 1
    t_hold_end = t + settle_time
    while t < t_hold_end:
        t += dt
        records.append(hand_record(t, side, displacement, seq))
        seq += 1
    if release:
        records.append(grab_record(t + dt, side, False))
    return records
