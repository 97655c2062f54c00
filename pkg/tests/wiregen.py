"""Seeded generators for valid and malformed wire envelopes.

Used by both the codec unit tests and the acceptance suite. Generated valid
envelopes are canonical: typed payloads carry w>=0 quaternions and finite
floats, so one encode -> decode -> encode cycle must be bit-exact.
"""

import math
import random
import string

from hotbox.messages import Envelope, encode

TOPICS = [
    "/hand/left",
    "/hand/right",
    "/hand/left/grab",
    "/hand/right/grab",
    "/arm/left/joint_states",
    "/arm/right/joint_states",
    "/arm/left/ee_pose",
    "/arm/right/ee_pose",
    "/arm/left/twist_cmd",
    "/arm/right/twist_cmd",
    "/teleop/scale",
    "/teleop/fixtures",
    "/cloud/points",
]


def rand_float(rng, lo=-10.0, hi=10.0):
    return rng.uniform(lo, hi)


def rand_quat_payload(rng):
    # Uniform random unit quaternion, canonical w >= 0 representative.
    u1, u2, u3 = rng.random(), rng.random(), rng.random()
    w = math.sqrt(1 - u1) * math.sin(2 * math.pi * u2)
    x = math.sqrt(1 - u1) * math.cos(2 * math.pi * u2)
    y = math.sqrt(u1) * math.sin(2 * math.pi * u3)
    z = math.sqrt(u1) * math.cos(2 * math.pi * u3)
    if w < 0:
        w, x, y, z = -w, -x, -y, -z
    return {"x": x, "y": y, "z": z, "w": w}


def rand_vec3_payload(rng):
    return {"x": rand_float(rng), "y": rand_float(rng), "z": rand_float(rng)}


def rand_header_payload(rng):
    return {
        "seq": rng.randrange(0, 1 << 31),
        "stamp": {"sec": rng.randrange(-1000, 1 << 31), "nanosec": rng.randrange(0, 1_000_000_000)},
        "frame_id": rng.choice(["world", "base", "hand", ""]),
    }


def rand_pose_stamped_payload(rng):
    return {
        "header": rand_header_payload(rng),
        "pose": {"position": rand_vec3_payload(rng), "orientation": rand_quat_payload(rng)},
    }


def rand_joint_state_payload(rng):
    n = rng.randrange(1, 8)
    names = [f"joint_{i}" for i in range(n)]
    payload = {
        "header": rand_header_payload(rng),
        "name": names,
        "position": [rand_float(rng, -3.1, 3.1) for _ in range(n)],
        "velocity": [rand_float(rng, -1.5, 1.5) for _ in range(n)] if rng.random() < 0.7 else [],
        "effort": [],
    }
    return payload


def rand_twist_payload(rng):
    return {
        "linear": {"x": rand_float(rng, -0.25, 0.25), "y": rand_float(rng, -0.25, 0.25), "z": rand_float(rng, -0.25, 0.25)},
        "angular": {"x": rand_float(rng, -1, 1), "y": rand_float(rng, -1, 1), "z": rand_float(rng, -1, 1)},
    }


def rand_cloud_payload(rng):
    n = rng.randrange(0, 12)
    of = rng.randrange(1, 4)
    chunk = rng.randrange(0, of)
    payload = {
        "frame_seq": rng.randrange(0, 10000),
        "chunk": chunk,
        "of": of,
        "last": chunk == of - 1,
        "points": [[rand_float(rng), rand_float(rng), rand_float(rng)] for _ in range(n)],
    }
    if rng.random() < 0.5:
        payload["colors"] = [[rng.randrange(256) for _ in range(3)] for _ in range(n)]
    return payload


def rand_fixture_payload(rng):
    out = []
    for _ in range(rng.randrange(0, 4)):
        v = rand_vec3_payload(rng)
        norm = math.sqrt(v["x"] ** 2 + v["y"] ** 2 + v["z"] ** 2) or 1.0
        out.append(
            {
                "point": rand_vec3_payload(rng),
                "normal": {"x": v["x"] / norm, "y": v["y"] / norm, "z": v["z"] / norm},
                "mode": rng.choice(["forbidden", "guidance"]),
                "tol": rng.uniform(0, 0.01),
                "k_attract": rng.uniform(0, 5),
                "enabled": rng.random() < 0.8,
            }
        )
    return out


PAYLOAD_MAKERS = {
    "PoseStamped": rand_pose_stamped_payload,
    "JointState": rand_joint_state_payload,
    "Twist": rand_twist_payload,
    "Grab": lambda rng: {"grabbed": rng.random() < 0.5},
    "Float64": lambda rng: {"data": rand_float(rng, 0.01, 10)},
    "FixtureConfig": rand_fixture_payload,
    "PointCloud": rand_cloud_payload,
}

TOPIC_SCHEMAS = {
    "/hand/left": "PoseStamped",
    "/hand/right": "PoseStamped",
    "/hand/left/grab": "Grab",
    "/hand/right/grab": "Grab",
    "/arm/left/joint_states": "JointState",
    "/arm/right/joint_states": "JointState",
    "/arm/left/ee_pose": "PoseStamped",
    "/arm/right/ee_pose": "PoseStamped",
    "/arm/left/twist_cmd": "Twist",
    "/arm/right/twist_cmd": "Twist",
    "/teleop/scale": "Float64",
    "/teleop/fixtures": "FixtureConfig",
    "/cloud/points": "PointCloud",
}


def rand_envelope(rng: random.Random) -> Envelope:
    op = rng.choice(["publish", "publish", "publish", "advertise", "subscribe", "unsubscribe", "unadvertise", "status"])
    env_id = None
    if rng.random() < 0.3:
        env_id = "".join(rng.choice(string.ascii_lowercase) for _ in range(8))
    if op == "status":
        return Envelope(
            op="status",
            id=env_id,
            level=rng.choice(["info", "warn", "error"]),
            text=rng.choice(["ok", "dropped 3", "topic not advertised", "même message"]),
        )
    topic = rng.choice(TOPICS)
    schema = TOPIC_SCHEMAS[topic]
    if op == "publish":
        return Envelope(op=op, id=env_id, topic=topic, msg=PAYLOAD_MAKERS[schema](rng))
    type_ = schema if (op in ("advertise", "subscribe") or rng.random() < 0.5) else None
    return Envelope(op=op, id=env_id, topic=topic, type=type_)


def mutate_text(rng: random.Random, text: str) -> str:
    """Produce (usually) malformed wire text from valid text."""
    choice = rng.randrange(8)
    if choice == 0:
        return text[: rng.randrange(len(text))] if text else "{"
    if choice == 1:
        pos = rng.randrange(len(text))
        return text[:pos] + rng.choice('{}[]",:x\x00') + text[pos + 1 :]
    if choice == 2:
        return text.replace('"op"', '"oops"', 1)
    if choice == 3:
        return text + rng.choice(["}", "]", "garbage", '{"op":"publish"}'])
    if choice == 4:
        return rng.choice(
            [
                "",
                "null",
                "[1,2,3]",
                '"just a string"',
                '{"op":"teleport","topic":"/x"}',
                '{"op":"publish","topic":"no_slash","msg":{}}',
                '{"op":"publish","topic":"/x"}',
                '{"op":"publish","topic":"/x","msg":NaN}',
                '{"op":"publish","topic":"/x","msg":{"v":Infinity}}',
                '{"op":"status","level":"fatal","text":"x"}',
                '{"op":"subscribe"}',
            ]
        )
    if choice == 5:
        return text.replace(":", ";")
    if choice == 6:
        pos = rng.randrange(len(text) + 1)
        return text[:pos] + rng.choice(["NaN", "1e999", "-Infinity", "\ud800"]) + text[pos:]
    return "\x7f" + text


def generate_valid_corpus(seed: int, count: int):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        env = rand_envelope(rng)
        out.append((env, encode(env)))
    return out
