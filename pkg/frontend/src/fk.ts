/**
 * Client-side forward kinematics over the chain description served at
 * GET /config/chains. Same standard DH convention as the server:
 * A_i = Rz(q_i + theta_offset) Tz(d) Tx(a) Rx(alpha), chained onto the
 * base pose.
 */

import type { PosePayload, QuatPayload, Vec3Payload } from "./protocol.js";

export interface ChainRow {
  a: number;
  alpha: number;
  d: number;
  theta_offset: number;
  joint: string;
  limits: number[];
  vel_limit: number;
}

export interface ChainPayload {
  name: string;
  base_pose: PosePayload;
  rows: ChainRow[];
}

export type Mat4 = number[]; // row-major, length 16

export function identity4(): Mat4 {
  return [1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1];
}

export function matMul(a: Mat4, b: Mat4): Mat4 {
  const out = new Array<number>(16);
  for (let r = 0; r < 4; r++) {
    for (let c = 0; c < 4; c++) {
      let s = 0;
      for (let k = 0; k < 4; k++) s += a[r * 4 + k] * b[k * 4 + c];
      out[r * 4 + c] = s;
    }
  }
  return out;
}

export function quatToMatrix(q: QuatPayload): Mat4 {
  const { w, x, y, z } = q;
  return [
    1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y), 0,
    2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x), 0,
    2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y), 0,
    0, 0, 0, 1,
  ];
}

/** Shepperd's method; returns the w >= 0 representative. */
export function matrixToQuat(m: Mat4): QuatPayload {
  const r = (i: number, j: number) => m[i * 4 + j];
  const t = r(0, 0) + r(1, 1) + r(2, 2);
  let w: number, x: number, y: number, z: number;
  if (t > 0) {
    const s = Math.sqrt(t + 1) * 2;
    w = 0.25 * s;
    x = (r(2, 1) - r(1, 2)) / s;
    y = (r(0, 2) - r(2, 0)) / s;
    z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const s = Math.sqrt(1 + r(0, 0) - r(1, 1) - r(2, 2)) * 2;
    w = (r(2, 1) - r(1, 2)) / s;
    x = 0.25 * s;
    y = (r(0, 1) + r(1, 0)) / s;
    z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) >= r(2, 2)) {
    const s = Math.sqrt(1 + r(1, 1) - r(0, 0) - r(2, 2)) * 2;
    w = (r(0, 2) - r(2, 0)) / s;
    x = (r(0, 1) + r(1, 0)) / s;
    y = 0.25 * s;
    z = (r(1, 2) + r(2, 1)) / s;
  } else {
    const s = Math.sqrt(1 + r(2, 2) - r(0, 0) - r(1, 1)) * 2;
    w = (r(1, 0) - r(0, 1)) / s;
    x = (r(0, 2) + r(2, 0)) / s;
    y = (r(1, 2) + r(2, 1)) / s;
    z = 0.25 * s;
  }
  const n = Math.hypot(w, x, y, z);
  w /= n; x /= n; y /= n; z /= n;
  if (w < 0) { w = -w; x = -x; y = -y; z = -z; }
  return { x, y, z, w };
}

export function basePoseMatrix(pose: PosePayload): Mat4 {
  const m = quatToMatrix(pose.orientation);
  m[3] = pose.position.x;
  m[7] = pose.position.y;
  m[11] = pose.position.z;
  return m;
}

function dhTransform(row: ChainRow, q: number): Mat4 {
  const th = q + row.theta_offset;
  const ct = Math.cos(th);
  const st = Math.sin(th);
  const ca = Math.cos(row.alpha);
  const sa = Math.sin(row.alpha);
  return [
    ct, -st * ca, st * sa, row.a * ct,
    st, ct * ca, -ct * sa, row.a * st,
    0, sa, ca, row.d,
    0, 0, 0, 1,
  ];
}

/** All frames base..ee; frames[i] is the pose of frame i (0 = base). */
export function fkFrames(chain: ChainPayload, q: number[]): Mat4[] {
  if (q.length !== chain.rows.length) {
    throw new Error(`expected ${chain.rows.length} joint values, got ${q.length}`);
  }
  const frames: Mat4[] = [basePoseMatrix(chain.base_pose)];
  for (let i = 0; i < chain.rows.length; i++) {
    frames.push(matMul(frames[i], dhTransform(chain.rows[i], q[i])));
  }
  return frames;
}

export function framePosition(m: Mat4): Vec3Payload {
  return { x: m[3], y: m[7], z: m[11] };
}

export function fkPose(chain: ChainPayload, q: number[]): PosePayload {
  const frames = fkFrames(chain, q);
  const ee = frames[frames.length - 1];
  return { position: framePosition(ee), orientation: matrixToQuat(ee) };
}
