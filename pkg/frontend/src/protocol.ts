/**
 * Wire protocol: envelope codec and strict payload validation.
 *
 * Mirrors the server's canonical form: one JSON envelope per WebSocket text
 * frame, keys sorted lexicographically, finite numbers only. Everything the
 * console emits must survive the server's strict decode, so the validators
 * here are as picky as the server's.
 */

export type WireOp =
  | "advertise"
  | "unadvertise"
  | "subscribe"
  | "unsubscribe"
  | "publish"
  | "status";

export const WIRE_OPS: readonly WireOp[] = [
  "advertise",
  "unadvertise",
  "subscribe",
  "unsubscribe",
  "publish",
  "status",
];

export const STATUS_LEVELS = ["info", "warn", "error"] as const;

const TOPIC_RE = /^(\/[A-Za-z0-9_]+)+$/;

export interface Envelope {
  op: WireOp;
  id?: string;
  topic?: string;
  type?: string;
  msg?: unknown;
  level?: string;
  text?: string;
}

export interface Vec3Payload {
  x: number;
  y: number;
  z: number;
}

export interface QuatPayload {
  x: number;
  y: number;
  z: number;
  w: number;
}

export interface HeaderPayload {
  seq: number;
  stamp: { sec: number; nanosec: number };
  frame_id: string;
}

export interface PosePayload {
  position: Vec3Payload;
  orientation: QuatPayload;
}

export interface PoseStampedPayload {
  header: HeaderPayload;
  pose: PosePayload;
}

export interface JointStatePayload {
  header: HeaderPayload;
  name: string[];
  position: number[];
  velocity?: number[];
  effort?: number[];
}

export interface PointCloudPayload {
  frame_seq: number;
  chunk: number;
  of: number;
  last: boolean;
  points: number[][];
  colors?: number[][];
}

export interface FixturePayload {
  point: Vec3Payload;
  normal: Vec3Payload;
  mode: "forbidden" | "guidance";
  tol?: number;
  k_attract?: number;
  enabled?: boolean;
}

export const TOPIC_SCHEMAS: Record<string, string> = {
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
};

export class ProtocolError extends Error {
  kind: string;
  path?: string;

  constructor(kind: string, path?: string, detail?: string) {
    super(detail ? `${kind} at ${path ?? "?"}: ${detail}` : `${kind} at ${path ?? "?"}`);
    this.kind = kind;
    this.path = path;
  }
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isPlainObject(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function scanFinite(value: unknown, path: string): void {
  if (typeof value === "number") {
    if (!Number.isFinite(value)) throw new ProtocolError("schema", path, "non-finite number");
  } else if (Array.isArray(value)) {
    value.forEach((v, i) => scanFinite(v, `${path}[${i}]`));
  } else if (isPlainObject(value)) {
    for (const [k, v] of Object.entries(value)) scanFinite(v, `${path}.${k}`);
  }
}

/** Canonical JSON: keys sorted at every level, rejects non-finite numbers. */
export function canonicalStringify(value: unknown): string {
  scanFinite(value, "$");
  const walk = (v: unknown): string => {
    if (v === null) return "null";
    switch (typeof v) {
      case "number":
        return JSON.stringify(v);
      case "string":
        return JSON.stringify(v);
      case "boolean":
        return v ? "true" : "false";
      case "object":
        if (Array.isArray(v)) return `[${v.map(walk).join(",")}]`;
        return `{${Object.keys(v as object)
          .sort()
          .map((k) => `${JSON.stringify(k)}:${walk((v as Record<string, unknown>)[k])}`)
          .join(",")}}`;
      default:
        throw new ProtocolError("invalid", "$", `cannot serialize ${typeof v}`);
    }
  };
  return walk(value);
}

export function encodeEnvelope(env: Envelope): string {
  if (!WIRE_OPS.includes(env.op)) throw new ProtocolError("invalid", "op", String(env.op));
  if (env.op === "status") {
    if (!STATUS_LEVELS.includes(env.level as never))
      throw new ProtocolError("invalid", "level", "status requires info|warn|error");
    if (typeof env.text !== "string") throw new ProtocolError("invalid", "text", "required");
  } else if (env.topic === undefined) {
    throw new ProtocolError("invalid", "topic", `${env.op} requires a topic`);
  }
  if (env.topic !== undefined && !TOPIC_RE.test(env.topic))
    throw new ProtocolError("invalid", "topic", env.topic);
  if (env.op === "publish" && env.msg === undefined)
    throw new ProtocolError("invalid", "msg", "publish requires msg");
  const obj: Record<string, unknown> = { op: env.op };
  if (env.id !== undefined) obj.id = env.id;
  if (env.topic !== undefined) obj.topic = env.topic;
  if (env.type !== undefined) obj.type = env.type;
  if (env.msg !== undefined) obj.msg = env.msg;
  if (env.level !== undefined) obj.level = env.level;
  if (env.text !== undefined) obj.text = env.text;
  return canonicalStringify(obj);
}

const ENVELOPE_KEYS = new Set(["op", "id", "topic", "type", "msg", "level", "text"]);

export function decodeEnvelope(text: string): Envelope {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (e) {
    throw new ProtocolError("syntax", undefined, String(e));
  }
  if (!isPlainObject(obj)) throw new ProtocolError("syntax", undefined, "top level must be an object");
  if (!("op" in obj)) throw new ProtocolError("schema", "op", "missing field");
  const op = obj.op;
  if (typeof op !== "string" || !WIRE_OPS.includes(op as WireOp))
    throw new ProtocolError("unknown_op", "op", String(op));
  for (const k of Object.keys(obj)) {
    if (!ENVELOPE_KEYS.has(k)) throw new ProtocolError("schema", k, "unknown field");
  }
  const id = obj.id;
  if (id !== undefined && typeof id !== "string") throw new ProtocolError("schema", "id");
  const topic = obj.topic;
  if (topic === undefined) {
    if (op !== "status") throw new ProtocolError("schema", "topic", `${op} requires a topic`);
  } else if (typeof topic !== "string" || !TOPIC_RE.test(topic)) {
    throw new ProtocolError("schema", "topic", "must match (/[A-Za-z0-9_]+)+");
  }
  const type = obj.type;
  if (type !== undefined && typeof type !== "string") throw new ProtocolError("schema", "type");
  const level = obj.level;
  const textField = obj.text;
  if (op === "status") {
    if (!STATUS_LEVELS.includes(level as never)) throw new ProtocolError("schema", "level");
    if (typeof textField !== "string") throw new ProtocolError("schema", "text");
  } else {
    if (level !== undefined) throw new ProtocolError("schema", "level", `not valid for ${op}`);
    if (textField !== undefined) throw new ProtocolError("schema", "text", `not valid for ${op}`);
  }
  const msg = obj.msg;
  if (op === "publish" && msg === undefined) throw new ProtocolError("schema", "msg", "required");
  if (msg === null) throw new ProtocolError("schema", "msg", "null msg");
  if (msg !== undefined) scanFinite(msg, "msg");
  const env: Envelope = { op: op as WireOp };
  if (id !== undefined) env.id = id as string;
  if (topic !== undefined) env.topic = topic as string;
  if (type !== undefined) env.type = type as string;
  if (msg !== undefined) env.msg = msg;
  if (level !== undefined) env.level = level as string;
  if (textField !== undefined) env.text = textField as string;
  return env;
}

// ---------------------------------------------------------------------------
// Payload validators (strict, mirroring the server)
// ---------------------------------------------------------------------------

function checkKeys(
  obj: unknown,
  allowed: readonly string[],
  required: readonly string[],
  path: string,
): asserts obj is Record<string, unknown> {
  if (!isPlainObject(obj)) throw new ProtocolError("schema", path, "expected an object");
  for (const k of Object.keys(obj)) {
    if (!allowed.includes(k)) throw new ProtocolError("schema", `${path}.${k}`, "unknown field");
  }
  for (const k of required) {
    if (!(k in obj)) throw new ProtocolError("schema", `${path}.${k}`, "missing field");
  }
}

function checkNumber(v: unknown, path: string): number {
  if (!isFiniteNumber(v)) throw new ProtocolError("schema", path, "expected a finite number");
  return v;
}

function checkInt(v: unknown, path: string, min = -Infinity): number {
  if (!isFiniteNumber(v) || !Number.isInteger(v) || v < min)
    throw new ProtocolError("schema", path, "expected an integer");
  return v;
}

export function validateVec3(v: unknown, path: string): Vec3Payload {
  checkKeys(v, ["x", "y", "z"], ["x", "y", "z"], path);
  return {
    x: checkNumber(v.x, `${path}.x`),
    y: checkNumber(v.y, `${path}.y`),
    z: checkNumber(v.z, `${path}.z`),
  };
}

export function validateQuat(v: unknown, path: string): QuatPayload {
  checkKeys(v, ["x", "y", "z", "w"], ["x", "y", "z", "w"], path);
  const q = {
    x: checkNumber(v.x, `${path}.x`),
    y: checkNumber(v.y, `${path}.y`),
    z: checkNumber(v.z, `${path}.z`),
    w: checkNumber(v.w, `${path}.w`),
  };
  const norm = Math.hypot(q.w, q.x, q.y, q.z);
  if (Math.abs(norm - 1) > 1e-6) throw new ProtocolError("schema", path, `|q|=${norm}`);
  return q;
}

export function validateHeader(v: unknown, path: string): HeaderPayload {
  checkKeys(v, ["seq", "stamp", "frame_id"], ["seq", "stamp", "frame_id"], path);
  const seq = checkInt(v.seq, `${path}.seq`, 0);
  checkKeys(v.stamp, ["sec", "nanosec"], ["sec", "nanosec"], `${path}.stamp`);
  const stamp = v.stamp as Record<string, unknown>;
  const sec = checkInt(stamp.sec, `${path}.stamp.sec`);
  const nanosec = checkInt(stamp.nanosec, `${path}.stamp.nanosec`, 0);
  if (nanosec >= 1_000_000_000) throw new ProtocolError("schema", `${path}.stamp.nanosec`);
  if (typeof v.frame_id !== "string") throw new ProtocolError("schema", `${path}.frame_id`);
  return { seq, stamp: { sec, nanosec }, frame_id: v.frame_id };
}

export function validatePoseStamped(v: unknown, path = ""): PoseStampedPayload {
  const p = path || "msg";
  checkKeys(v, ["header", "pose"], ["header", "pose"], p);
  const header = validateHeader(v.header, `${p}.header`);
  checkKeys(v.pose, ["position", "orientation"], ["position", "orientation"], `${p}.pose`);
  const pose = v.pose as Record<string, unknown>;
  return {
    header,
    pose: {
      position: validateVec3(pose.position, `${p}.pose.position`),
      orientation: validateQuat(pose.orientation, `${p}.pose.orientation`),
    },
  };
}

export function validateJointState(v: unknown, path = ""): JointStatePayload {
  const p = path || "msg";
  checkKeys(v, ["header", "name", "position", "velocity", "effort"], ["header", "name", "position"], p);
  const header = validateHeader(v.header, `${p}.header`);
  const name = v.name;
  if (!Array.isArray(name) || name.some((n) => typeof n !== "string"))
    throw new ProtocolError("schema", `${p}.name`);
  const readArr = (key: "position" | "velocity" | "effort", required: boolean): number[] => {
    const arr = (v as Record<string, unknown>)[key];
    if (arr === undefined) {
      if (required) throw new ProtocolError("schema", `${p}.${key}`, "missing");
      return [];
    }
    if (!Array.isArray(arr)) throw new ProtocolError("schema", `${p}.${key}`);
    arr.forEach((x, i) => checkNumber(x, `${p}.${key}[${i}]`));
    if (required ? arr.length !== name.length : arr.length !== 0 && arr.length !== name.length)
      throw new ProtocolError("schema", `${p}.${key}`, "length mismatch");
    return arr as number[];
  };
  return {
    header,
    name: name as string[],
    position: readArr("position", true),
    velocity: readArr("velocity", false),
    effort: readArr("effort", false),
  };
}

export function validateTwist(v: unknown, path = ""): { linear: Vec3Payload; angular: Vec3Payload } {
  const p = path || "msg";
  checkKeys(v, ["linear", "angular"], ["linear", "angular"], p);
  return {
    linear: validateVec3(v.linear, `${p}.linear`),
    angular: validateVec3(v.angular, `${p}.angular`),
  };
}

export function validateGrab(v: unknown, path = ""): { grabbed: boolean } {
  const p = path || "msg";
  checkKeys(v, ["grabbed"], ["grabbed"], p);
  if (typeof v.grabbed !== "boolean") throw new ProtocolError("schema", `${p}.grabbed`);
  return { grabbed: v.grabbed };
}

export function validateFloat64(v: unknown, path = ""): { data: number } {
  const p = path || "msg";
  checkKeys(v, ["data"], ["data"], p);
  return { data: checkNumber(v.data, `${p}.data`) };
}

export function validateFixtureConfig(v: unknown, path = ""): FixturePayload[] {
  const p = path || "msg";
  if (!Array.isArray(v)) throw new ProtocolError("schema", p, "expected a list");
  return v.map((fx, i) => {
    const fp = `${p}[${i}]`;
    checkKeys(fx, ["point", "normal", "mode", "tol", "k_attract", "enabled"], ["point", "normal", "mode"], fp);
    const point = validateVec3(fx.point, `${fp}.point`);
    const normal = validateVec3(fx.normal, `${fp}.normal`);
    const n = Math.hypot(normal.x, normal.y, normal.z);
    if (Math.abs(n - 1) > 1e-6) throw new ProtocolError("schema", `${fp}.normal`, "not unit");
    if (fx.mode !== "forbidden" && fx.mode !== "guidance")
      throw new ProtocolError("schema", `${fp}.mode`);
    const out: FixturePayload = { point, normal, mode: fx.mode };
    if (fx.tol !== undefined) out.tol = checkNumber(fx.tol, `${fp}.tol`);
    if (fx.k_attract !== undefined) out.k_attract = checkNumber(fx.k_attract, `${fp}.k_attract`);
    if (fx.enabled !== undefined) {
      if (typeof fx.enabled !== "boolean") throw new ProtocolError("schema", `${fp}.enabled`);
      out.enabled = fx.enabled;
    }
    return out;
  });
}

export function validatePointCloud(v: unknown, path = ""): PointCloudPayload {
  const p = path || "msg";
  checkKeys(v, ["frame_seq", "chunk", "of", "last", "points", "colors"], ["frame_seq", "chunk", "of", "last", "points"], p);
  const frame_seq = checkInt(v.frame_seq, `${p}.frame_seq`, 0);
  const chunk = checkInt(v.chunk, `${p}.chunk`, 0);
  const of = checkInt(v.of, `${p}.of`, 1);
  if (chunk >= of) throw new ProtocolError("schema", `${p}.chunk`, "out of range");
  if (typeof v.last !== "boolean") throw new ProtocolError("schema", `${p}.last`);
  if (!Array.isArray(v.points)) throw new ProtocolError("schema", `${p}.points`);
  const points = v.points.map((row, i) => {
    if (!Array.isArray(row) || row.length !== 3)
      throw new ProtocolError("schema", `${p}.points[${i}]`);
    row.forEach((c) => checkNumber(c, `${p}.points[${i}]`));
    return row as number[];
  });
  let colors: number[][] | undefined;
  if (v.colors !== undefined) {
    if (!Array.isArray(v.colors) || v.colors.length !== points.length)
      throw new ProtocolError("schema", `${p}.colors`);
    colors = v.colors.map((row, i) => {
      if (!Array.isArray(row) || row.length !== 3)
        throw new ProtocolError("schema", `${p}.colors[${i}]`);
      row.forEach((c) => {
        if (!Number.isInteger(c) || (c as number) < 0 || (c as number) > 255)
          throw new ProtocolError("schema", `${p}.colors[${i}]`);
      });
      return row as number[];
    });
  }
  return { frame_seq, chunk, of, last: v.last, points, colors };
}

const VALIDATORS: Record<string, (v: unknown, path?: string) => unknown> = {
  PoseStamped: validatePoseStamped,
  JointState: validateJointState,
  Twist: validateTwist,
  Grab: validateGrab,
  Float64: validateFloat64,
  FixtureConfig: validateFixtureConfig,
  PointCloud: validatePointCloud,
};

/** Strictly validate a publish payload against its topic's schema. Topics
 * outside the canonical table pass through (opaque). */
export function validateTopicPayload(topic: string, msg: unknown): void {
  const schema = TOPIC_SCHEMAS[topic];
  if (schema !== undefined) VALIDATORS[schema](msg);
}
