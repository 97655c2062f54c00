"""Message schemas, canonical wire serialization, and quaternion/vector math.

The wire format is UTF-8 JSON, one envelope per frame, with lexicographically
sorted keys and shortest round-trip float formatting so that equal envelopes
always serialize to byte-identical text.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Any, Optional

WIRE_OPS = ("advertise", "unadvertise", "subscribe", "unsubscribe", "publish", "status")
STATUS_LEVELS = ("info", "warn", "error")
SCHEMA_NAMES = (
    "PoseStamped",
    "JointState",
    "Twist",
    "Grab",
    "Float64",
    "FixtureConfig",
    "PointCloud",
)

_TOPIC_RE = re.compile(r"^(/[A-Za-z0-9_]+)+$")

# Decode tolerance for wire quaternions; construction-time tolerance is 1e-9.
QUAT_WIRE_TOL = 1e-6
QUAT_NORM_TOL = 1e-9


class EncodeError(ValueError):
    """Raised when an envelope cannot be serialized. kind: non_finite | invalid."""

    def __init__(self, kind, detail=""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)


class DecodeError(ValueError):
    """Raised when wire text fails validation. kind: syntax | unknown_op | schema."""

    def __init__(self, kind, path=None, detail=""):
        self.kind = kind
        self.path = path
        self.detail = detail
        msg = kind if path is None else f"{kind} at {path}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _as_finite(v, path):
    if not _is_number(v):
        raise DecodeError("schema", path, "expected a number")
    try:
        f = float(v)
    except OverflowError:
        raise DecodeError("schema", path, "out of float64 range") from None
    if not math.isfinite(f):
        raise DecodeError("schema", path, "non-finite")
    return f


def _require_key(obj, key, path):
    if not isinstance(obj, dict):
        raise DecodeError("schema", path, "expected an object")
    if key not in obj:
        raise DecodeError("schema", f"{path}.{key}" if path else key, "missing field")
    return obj[key]


def _check_keys(obj, allowed, required, path):
    if not isinstance(obj, dict):
        raise DecodeError("schema", path, "expected an object")
    for k in obj:
        if k not in allowed:
            raise DecodeError("schema", f"{path}.{k}" if path else k, "unknown field")
    for k in required:
        if k not in obj:
            raise DecodeError("schema", f"{path}.{k}" if path else k, "missing field")


# ---------------------------------------------------------------------------
# Geometry primitives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def to_payload(self):
        return {"x": float(self.x), "y": float(self.y), "z": float(self.z)}

    @classmethod
    def from_payload(cls, payload, path="") -> "Vec3":
        _check_keys(payload, ("x", "y", "z"), ("x", "y", "z"), path)
        return cls(
            _as_finite(payload["x"], f"{path}.x" if path else "x"),
            _as_finite(payload["y"], f"{path}.y" if path else "y"),
            _as_finite(payload["z"], f"{path}.z" if path else "z"),
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def __add__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x + o.x, self.y + o.y, self.z + o.z)

    def __sub__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x - o.x, self.y - o.y, self.z - o.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def dot(self, o: "Vec3") -> float:
        return self.x * o.x + self.y * o.y + self.z * o.z

    def as_tuple(self):
        return (self.x, self.y, self.z)


ZERO_VEC3 = Vec3(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion, Hamilton convention, scalar part named w."""

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def normalized(self) -> "UnitQuaternion":
        n = self.norm()
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("cannot normalize a zero or non-finite quaternion")
        return UnitQuaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def conjugate(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def to_payload(self):
        # Wire order is x, y, z, w; canonical key sort yields w,x,y,z in text.
        return {
            "x": float(self.x),
            "y": float(self.y),
            "z": float(self.z),
            "w": float(self.w),
        }

    @classmethod
    def from_payload(cls, payload, path="") -> "UnitQuaternion":
        _check_keys(payload, ("x", "y", "z", "w"), ("x", "y", "z", "w"), path)
        w = _as_finite(payload["w"], f"{path}.w" if path else "w")
        x = _as_finite(payload["x"], f"{path}.x" if path else "x")
        y = _as_finite(payload["y"], f"{path}.y" if path else "y")
        z = _as_finite(payload["z"], f"{path}.z" if path else "z")
        q = cls(w, x, y, z)
        n = q.norm()
        if abs(n - 1.0) > QUAT_WIRE_TOL:
            raise DecodeError("schema", path or "orientation", f"|q|={n:.6g}, not unit")
        if abs(n - 1.0) > QUAT_NORM_TOL:
            q = q.normalized()
        # Double-cover resolution: unique representative has w >= 0.
        if q.w < 0.0:
            q = UnitQuaternion(-q.w, -q.x, -q.y, -q.z)
        return q

    def to_matrix(self):
        """3x3 rotation matrix as nested tuples (row-major)."""
        w, x, y, z = self.w, self.x, self.y, self.z
        return (
            (1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)),
            (2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)),
            (2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)),
        )

    @classmethod
    def from_matrix(cls, r) -> "UnitQuaternion":
        """Shepperd's method; returns the w >= 0 representative."""
        t = r[0][0] + r[1][1] + r[2][2]
        if t > 0.0:
            s = math.sqrt(t + 1.0) * 2.0
            q = cls(0.25 * s, (r[2][1] - r[1][2]) / s, (r[0][2] - r[2][0]) / s, (r[1][0] - r[0][1]) / s)
        elif r[0][0] >= r[1][1] and r[0][0] >= r[2][2]:
            s = math.sqrt(1.0 + r[0][0] - r[1][1] - r[2][2]) * 2.0
            q = cls((r[2][1] - r[1][2]) / s, 0.25 * s, (r[0][1] + r[1][0]) / s, (r[0][2] + r[2][0]) / s)
        elif r[1][1] >= r[2][2]:
            s = math.sqrt(1.0 + r[1][1] - r[0][0] - r[2][2]) * 2.0
            q = cls((r[0][2] - r[2][0]) / s, (r[0][1] + r[1][0]) / s, 0.25 * s, (r[1][2] + r[2][1]) / s)
        else:
            s = math.sqrt(1.0 + r[2][2] - r[0][0] - r[1][1]) * 2.0
            q = cls((r[1][0] - r[0][1]) / s, (r[0][2] + r[2][0]) / s, (r[1][2] + r[2][1]) / s, 0.25 * s)
        q = q.normalized()
        if q.w < 0.0:
            q = cls(-q.w, -q.x, -q.y, -q.z)
        return q


IDENTITY_QUAT = UnitQuaternion(1.0, 0.0, 0.0, 0.0)


def quat_mul(a: UnitQuaternion, b: UnitQuaternion) -> UnitQuaternion:
    """Hamilton product a*b (rotation a composed after b), re-normalized."""
    w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z
    x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y
    y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x
    z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w
    return UnitQuaternion(w, x, y, z).normalized()


def quat_error(target: UnitQuaternion, current: UnitQuaternion) -> Vec3:
    """Axis-angle (rad) of the world-frame rotation taking current onto target.

    Shortest path: the relative rotation r = target * conj(current) is negated
    when r.w < 0 so the returned angle lies in [0, pi].
    """
    r = quat_mul(target, current.conjugate())
    if r.w < 0.0:
        r = UnitQuaternion(-r.w, -r.x, -r.y, -r.z)
    vec_norm = math.sqrt(r.x * r.x + r.y * r.y + r.z * r.z)
    if vec_norm < 1e-15:
        return ZERO_VEC3
    angle = 2.0 * math.atan2(vec_norm, r.w)
    s = angle / vec_norm
    return Vec3(r.x * s, r.y * s, r.z * s)


def quat_from_axis_angle(axis: Vec3, angle: float) -> UnitQuaternion:
    n = axis.norm()
    if n < 1e-15:
        return IDENTITY_QUAT
    h = 0.5 * angle
    s = math.sin(h) / n
    return UnitQuaternion(math.cos(h), axis.x * s, axis.y * s, axis.z * s).normalized()


# ---------------------------------------------------------------------------
# Message types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pose:
    position: Vec3 = ZERO_VEC3
    orientation: UnitQuaternion = IDENTITY_QUAT

    def to_payload(self):
        return {
            "position": self.position.to_payload(),
            "orientation": self.orientation.to_payload(),
        }

    @classmethod
    def from_payload(cls, payload, path="") -> "Pose":
        _check_keys(payload, ("position", "orientation"), ("position", "orientation"), path)
        p = path + "." if path else ""
        return cls(
            Vec3.from_payload(payload["position"], p + "position"),
            UnitQuaternion.from_payload(payload["orientation"], p + "orientation"),
        )


@dataclass(frozen=True)
class Header:
    seq: int = 0
    stamp_sec: int = 0
    stamp_nanosec: int = 0
    frame_id: str = ""

    def to_payload(self):
        return {
            "seq": int(self.seq),
            "stamp": {"sec": int(self.stamp_sec), "nanosec": int(self.stamp_nanosec)},
            "frame_id": self.frame_id,
        }

    @classmethod
    def from_payload(cls, payload, path="") -> "Header":
        _check_keys(payload, ("seq", "stamp", "frame_id"), ("seq", "stamp", "frame_id"), path)
        p = path + "." if path else ""
        seq = payload["seq"]
        if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
            raise DecodeError("schema", p + "seq", "expected a non-negative integer")
        stamp = payload["stamp"]
        _check_keys(stamp, ("sec", "nanosec"), ("sec", "nanosec"), p + "stamp")
        sec = stamp["sec"]
        nsec = stamp["nanosec"]
        if not isinstance(sec, int) or isinstance(sec, bool):
            raise DecodeError("schema", p + "stamp.sec", "expected an integer")
        if not isinstance(nsec, int) or isinstance(nsec, bool) or not 0 <= nsec < 1_000_000_000:
            raise DecodeError("schema", p + "stamp.nanosec", "expected an integer in [0, 1e9)")
        frame_id = payload["frame_id"]
        if not isinstance(frame_id, str):
            raise DecodeError("schema", p + "frame_id", "expected a string")
        return cls(seq, sec, nsec, frame_id)


@dataclass(frozen=True)
class StampedPose:
    header: Header
    pose: Pose

    def to_payload(self):
        return {"header": self.header.to_payload(), "pose": self.pose.to_payload()}

    @classmethod
    def from_payload(cls, payload, path="") -> "StampedPose":
        _check_keys(payload, ("header", "pose"), ("header", "pose"), path)
        p = path + "." if path else ""
        return cls(
            Header.from_payload(payload["header"], p + "header"),
            Pose.from_payload(payload["pose"], p + "pose"),
        )


@dataclass(frozen=True)
class JointStateMsg:
    header: Header
    name: tuple
    position: tuple
    velocity: tuple = ()
    effort: tuple = ()

    def to_payload(self):
        return {
            "header": self.header.to_payload(),
            "name": list(self.name),
            "position": [float(v) for v in self.position],
            "velocity": [float(v) for v in self.velocity],
            "effort": [float(v) for v in self.effort],
        }

    @classmethod
    def from_payload(cls, payload, path="") -> "JointStateMsg":
        validate_joint_state(payload, path)
        p = path + "." if path else ""
        return cls(
            Header.from_payload(payload["header"], p + "header"),
            tuple(payload["name"]),
            tuple(float(v) for v in payload["position"]),
            tuple(float(v) for v in payload.get("velocity", [])),
            tuple(float(v) for v in payload.get("effort", [])),
        )


@dataclass(frozen=True)
class TwistCommand:
    linear: Vec3 = ZERO_VEC3
    angular: Vec3 = ZERO_VEC3

    def to_payload(self):
        return {"linear": self.linear.to_payload(), "angular": self.angular.to_payload()}

    @classmethod
    def from_payload(cls, payload, path="") -> "TwistCommand":
        _check_keys(payload, ("linear", "angular"), ("linear", "angular"), path)
        p = path + "." if path else ""
        return cls(
            Vec3.from_payload(payload["linear"], p + "linear"),
            Vec3.from_payload(payload["angular"], p + "angular"),
        )

    def is_zero(self) -> bool:
        return self.linear == ZERO_VEC3 and self.angular == ZERO_VEC3


ZERO_TWIST = TwistCommand()


@dataclass(frozen=True)
class GrabMsg:
    grabbed: bool

    def to_payload(self):
        return {"grabbed": bool(self.grabbed)}

    @classmethod
    def from_payload(cls, payload, path="") -> "GrabMsg":
        _check_keys(payload, ("grabbed",), ("grabbed",), path)
        g = payload["grabbed"]
        if not isinstance(g, bool):
            raise DecodeError("schema", f"{path}.grabbed" if path else "grabbed", "expected a boolean")
        return cls(g)


# ---------------------------------------------------------------------------
# Payload validation (structural; does not transform the payload)
# ---------------------------------------------------------------------------


def validate_pose_stamped(payload, path=""):
    StampedPose.from_payload(payload, path)


def validate_joint_state(payload, path=""):
    _check_keys(
        payload,
        ("header", "name", "position", "velocity", "effort"),
        ("header", "name", "position"),
        path,
    )
    p = path + "." if path else ""
    Header.from_payload(payload["header"], p + "header")
    name = payload["name"]
    if not isinstance(name, list) or any(not isinstance(n, str) for n in name):
        raise DecodeError("schema", p + "name", "expected a list of strings")
    pos = payload["position"]
    if not isinstance(pos, list):
        raise DecodeError("schema", p + "position", "expected a list")
    if len(pos) != len(name):
        raise DecodeError(
            "schema", p + "position", f"length {len(pos)} != name length {len(name)}"
        )
    for i, v in enumerate(pos):
        _as_finite(v, f"{p}position[{i}]")
    for key in ("velocity", "effort"):
        arr = payload.get(key, [])
        if not isinstance(arr, list):
            raise DecodeError("schema", p + key, "expected a list")
        if len(arr) not in (0, len(name)):
            raise DecodeError(
                "schema", p + key, f"length {len(arr)} != name length {len(name)}"
            )
        for i, v in enumerate(arr):
            _as_finite(v, f"{p}{key}[{i}]")


def validate_twist(payload, path="", limits=None):
    cmd = TwistCommand.from_payload(payload, path)
    if limits is not None:
        max_lin, max_ang = limits
        if cmd.linear.norm() > max_lin * (1.0 + 1e-9):
            raise DecodeError("schema", f"{path}.linear" if path else "linear", "exceeds max linear speed")
        if cmd.angular.norm() > max_ang * (1.0 + 1e-9):
            raise DecodeError("schema", f"{path}.angular" if path else "angular", "exceeds max angular speed")


def validate_grab(payload, path=""):
    GrabMsg.from_payload(payload, path)


def validate_float64(payload, path=""):
    _check_keys(payload, ("data",), ("data",), path)
    _as_finite(payload["data"], f"{path}.data" if path else "data")


def validate_fixture_config(payload, path=""):
    if not isinstance(payload, list):
        raise DecodeError("schema", path or "fixtures", "expected a list of fixtures")
    for i, fx in enumerate(payload):
        fpath = f"{path}[{i}]" if path else f"[{i}]"
        _check_keys(
            fx,
            ("point", "normal", "mode", "tol", "k_attract", "enabled"),
            ("point", "normal", "mode"),
            fpath,
        )
        Vec3.from_payload(fx["point"], fpath + ".point")
        n = Vec3.from_payload(fx["normal"], fpath + ".normal")
        if abs(n.norm() - 1.0) > 1e-6:
            raise DecodeError("schema", fpath + ".normal", f"|n|={n.norm():.6g}, not unit")
        if fx["mode"] not in ("forbidden", "guidance"):
            raise DecodeError("schema", fpath + ".mode", "expected forbidden|guidance")
        if "tol" in fx:
            t = _as_finite(fx["tol"], fpath + ".tol")
            if t < 0:
                raise DecodeError("schema", fpath + ".tol", "must be >= 0")
        if "k_attract" in fx:
            k = _as_finite(fx["k_attract"], fpath + ".k_attract")
            if k < 0:
                raise DecodeError("schema", fpath + ".k_attract", "must be >= 0")
        if "enabled" in fx and not isinstance(fx["enabled"], bool):
            raise DecodeError("schema", fpath + ".enabled", "expected a boolean")


def validate_point_cloud(payload, path=""):
    _check_keys(
        payload,
        ("frame_seq", "chunk", "of", "last", "points", "colors"),
        ("frame_seq", "chunk", "of", "last", "points"),
        path,
    )
    p = path + "." if path else ""
    for key in ("frame_seq", "chunk", "of"):
        v = payload[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise DecodeError("schema", p + key, "expected a non-negative integer")
    if payload["of"] < 1:
        raise DecodeError("schema", p + "of", "must be >= 1")
    if payload["chunk"] >= payload["of"]:
        raise DecodeError("schema", p + "chunk", "chunk index out of range")
    if not isinstance(payload["last"], bool):
        raise DecodeError("schema", p + "last", "expected a boolean")
    pts = payload["points"]
    if not isinstance(pts, list):
        raise DecodeError("schema", p + "points", "expected a list")
    for i, row in enumerate(pts):
        if not isinstance(row, list) or len(row) != 3:
            raise DecodeError("schema", f"{p}points[{i}]", "expected [x, y, z]")
        for v in row:
            _as_finite(v, f"{p}points[{i}]")
    cols = payload.get("colors")
    if cols is not None:
        if not isinstance(cols, list):
            raise DecodeError("schema", p + "colors", "expected a list")
        if len(cols) != len(pts):
            raise DecodeError("schema", p + "colors", "length != points length")
        for i, row in enumerate(cols):
            if not isinstance(row, list) or len(row) != 3:
                raise DecodeError("schema", f"{p}colors[{i}]", "expected [r, g, b]")
            for v in row:
                if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= 255:
                    raise DecodeError("schema", f"{p}colors[{i}]", "expected integers 0-255")


_VALIDATORS = {
    "PoseStamped": validate_pose_stamped,
    "JointState": validate_joint_state,
    "Twist": validate_twist,
    "Grab": validate_grab,
    "Float64": validate_float64,
    "FixtureConfig": validate_fixture_config,
    "PointCloud": validate_point_cloud,
}


def validate_payload(schema: str, payload, path=""):
    """Structurally validate a raw payload against a named schema.

    Raises DecodeError(schema, path) on the first violation. The payload is
    never modified; canonicalization happens only in from_payload constructors.
    """
    try:
        validator = _VALIDATORS[schema]
    except KeyError:
        raise DecodeError("schema", path or "type", f"unknown schema {schema!r}") from None
    validator(payload, path)


# ---------------------------------------------------------------------------
# Envelope codec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    op: str
    id: Optional[str] = None
    topic: Optional[str] = None
    type: Optional[str] = None
    msg: Any = None
    level: Optional[str] = None
    text: Optional[str] = None


def _check_envelope(env: Envelope):
    if env.op not in WIRE_OPS:
        raise EncodeError("invalid", f"unknown op {env.op!r}")
    if env.op == "status":
        if env.level not in STATUS_LEVELS:
            raise EncodeError("invalid", "status requires a level of info|warn|error")
        if not isinstance(env.text, str):
            raise EncodeError("invalid", "status requires text")
    else:
        if env.topic is None:
            raise EncodeError("invalid", f"{env.op} requires a topic")
    if env.topic is not None and not _TOPIC_RE.match(env.topic):
        raise EncodeError("invalid", f"bad topic {env.topic!r}")
    if env.op == "publish" and env.msg is None:
        raise EncodeError("invalid", "publish requires msg")


def dumps_canonical(obj) -> str:
    """Canonical JSON: sorted keys, no whitespace, shortest float repr, UTF-8."""
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), allow_nan=False, ensure_ascii=False
    )


def encode(env: Envelope) -> str:
    """Serialize an envelope to canonical wire text (sorted keys, UTF-8)."""
    _check_envelope(env)
    obj = {"op": env.op}
    if env.id is not None:
        obj["id"] = env.id
    if env.topic is not None:
        obj["topic"] = env.topic
    if env.type is not None:
        obj["type"] = env.type
    if env.msg is not None:
        obj["msg"] = env.msg
    if env.level is not None:
        obj["level"] = env.level
    if env.text is not None:
        obj["text"] = env.text
    try:
        return dumps_canonical(obj)
    except ValueError as e:
        raise EncodeError("non_finite", str(e)) from None
    except TypeError as e:
        raise EncodeError("invalid", str(e)) from None


def _reject_constant(name):
    raise ValueError(f"non-standard JSON constant {name}")


def _scan_finite(value, path):
    if isinstance(value, float) and not math.isfinite(value):
        raise DecodeError("schema", path, "non-finite number")
    elif isinstance(value, dict):
        for k, v in value.items():
            _scan_finite(v, f"{path}.{k}")
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _scan_finite(v, f"{path}[{i}]")


def decode(text, expected: Optional[str] = None) -> Envelope:
    """Parse and validate wire text into an Envelope. Never aborts: all
    failures raise typed DecodeErrors.

    When `expected` names a schema, the msg payload is structurally validated
    against it as well.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DecodeError("syntax", None, str(e)) from None
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except (ValueError, RecursionError) as e:
        raise DecodeError("syntax", None, str(e)) from None
    if not isinstance(obj, dict):
        raise DecodeError("syntax", None, "top level must be an object")
    if "op" not in obj:
        raise DecodeError("schema", "op", "missing field")
    op = obj["op"]
    if not isinstance(op, str) or op not in WIRE_OPS:
        raise DecodeError("unknown_op", "op", repr(op))
    allowed = {"op", "id", "topic", "type", "msg", "level", "text"}
    for k in obj:
        if k not in allowed:
            raise DecodeError("schema", k, "unknown field")

    env_id = obj.get("id")
    if env_id is not None and not isinstance(env_id, str):
        raise DecodeError("schema", "id", "expected a string")
    topic = obj.get("topic")
    if topic is None:
        if op != "status":
            raise DecodeError("schema", "topic", f"{op} requires a topic")
    else:
        if not isinstance(topic, str) or not _TOPIC_RE.match(topic):
            raise DecodeError("schema", "topic", "must match (/[A-Za-z0-9_]+)+")
    type_ = obj.get("type")
    if type_ is not None and not isinstance(type_, str):
        raise DecodeError("schema", "type", "expected a string")
    level = obj.get("level")
    text_field = obj.get("text")
    if op == "status":
        if level not in STATUS_LEVELS:
            raise DecodeError("schema", "level", "expected info|warn|error")
        if not isinstance(text_field, str):
            raise DecodeError("schema", "text", "expected a string")
    else:
        if level is not None:
            raise DecodeError("schema", "level", f"not valid for op {op}")
        if text_field is not None:
            raise DecodeError("schema", "text", f"not valid for op {op}")
    msg = obj.get("msg")
    if op == "publish" and msg is None:
        raise DecodeError("schema", "msg", "publish requires msg")
    if msg is not None:
        _scan_finite(msg, "msg")
    env = Envelope(op=op, id=env_id, topic=topic, type=type_, msg=msg, level=level, text=text_field)
    if expected is not None and env.msg is not None:
        validate_payload(expected, env.msg)
    return env
