/**
 * Canvas renderer: projects the work cell, arm skeletons, fixtures, point
 * cloud, and gripper handles through the orbit camera. Projection math is
 * pure; only draw() touches a 2D context.
 */

import { CameraRig, cameraBasis } from "./drag.js";
import { fkFrames, framePosition } from "./fk.js";
import type { Vec3Payload } from "./protocol.js";
import type { SceneState, Side } from "./scene.js";

export interface ScreenPoint {
  x: number;
  y: number;
  depth: number;
}

export function project(cam: CameraRig, p: Vec3Payload): ScreenPoint | null {
  const b = cameraBasis(cam);
  const rel = { x: p.x - b.eye.x, y: p.y - b.eye.y, z: p.z - b.eye.z };
  const zc = rel.x * b.forward.x + rel.y * b.forward.y + rel.z * b.forward.z;
  if (zc <= 1e-6) return null; // behind the camera
  const xc = rel.x * b.right.x + rel.y * b.right.y + rel.z * b.right.z;
  const yc = rel.x * b.up.x + rel.y * b.up.y + rel.z * b.up.z;
  const f = cam.viewportH / (2 * Math.tan(cam.fovY / 2));
  return {
    x: cam.viewportW / 2 + (xc / zc) * f,
    y: cam.viewportH / 2 - (yc / zc) * f,
    depth: zc,
  };
}

const ARM_COLORS: Record<Side, string> = { left: "#4fc3f7", right: "#ffb74d" };
const BOX = { x: 1.0, y: 0.6, z: 0.8 }; // work cell footprint, m

function line(ctx: CanvasRenderingContext2D, cam: CameraRig, a: Vec3Payload, b: Vec3Payload) {
  const pa = project(cam, a);
  const pb = project(cam, b);
  if (!pa || !pb) return;
  ctx.beginPath();
  ctx.moveTo(pa.x, pa.y);
  ctx.lineTo(pb.x, pb.y);
  ctx.stroke();
}

function drawBox(ctx: CanvasRenderingContext2D, cam: CameraRig) {
  ctx.strokeStyle = "#3a3f4a";
  ctx.lineWidth = 1;
  const xs = [-BOX.x / 2, BOX.x / 2];
  const ys = [-BOX.y / 2, BOX.y / 2];
  const zs = [0, BOX.z];
  for (const z of zs) {
    for (let i = 0; i < 2; i++) {
      line(ctx, cam, { x: xs[i], y: ys[0], z }, { x: xs[i], y: ys[1], z });
      line(ctx, cam, { x: xs[0], y: ys[i], z }, { x: xs[1], y: ys[i], z });
    }
  }
  for (const x of xs) for (const y of ys) line(ctx, cam, { x, y, z: 0 }, { x, y, z: BOX.z });
}

function drawArm(
  ctx: CanvasRenderingContext2D,
  cam: CameraRig,
  scene: SceneState,
  side: Side,
  now: number,
) {
  const arm = scene.arms[side];
  if (!arm.chain || arm.q.length === 0) return;
  const q = arm.mismatch ? arm.q : scene.interpolatedQ(side, now);
  if (q.length !== arm.chain.rows.length) return;
  const frames = fkFrames(arm.chain, q);
  ctx.strokeStyle = ARM_COLORS[side];
  ctx.lineWidth = 3;
  for (let i = 0; i + 1 < frames.length; i++) {
    line(ctx, cam, framePosition(frames[i]), framePosition(frames[i + 1]));
  }
  for (const frame of frames) {
    const s = project(cam, framePosition(frame));
    if (!s) continue;
    ctx.beginPath();
    ctx.arc(s.x, s.y, 3, 0, Math.PI * 2);
    ctx.fillStyle = ARM_COLORS[side];
    ctx.fill();
  }
  // Gripper handle: the thing the operator pinches.
  const tip = project(cam, framePosition(frames[frames.length - 1]));
  if (tip) {
    ctx.beginPath();
    ctx.arc(tip.x, tip.y, 9, 0, Math.PI * 2);
    ctx.strokeStyle = arm.grabbed ? "#ff5252" : ARM_COLORS[side];
    ctx.lineWidth = 2;
    ctx.stroke();
  }
}

function drawFixtures(ctx: CanvasRenderingContext2D, cam: CameraRig, scene: SceneState) {
  if (!scene.showFixtures) return;
  for (const f of scene.fixtures) {
    if (f.enabled === false) continue;
    // Two in-plane axes orthogonal to the normal.
    const n = f.normal;
    const ref = Math.abs(n.z) < 0.9 ? { x: 0, y: 0, z: 1 } : { x: 1, y: 0, z: 0 };
    let u = {
      x: n.y * ref.z - n.z * ref.y,
      y: n.z * ref.x - n.x * ref.z,
      z: n.x * ref.y - n.y * ref.x,
    };
    const un = Math.hypot(u.x, u.y, u.z);
    u = { x: u.x / un, y: u.y / un, z: u.z / un };
    const v = {
      x: n.y * u.z - n.z * u.y,
      y: n.z * u.x - n.x * u.z,
      z: n.x * u.y - n.y * u.x,
    };
    ctx.strokeStyle = f.mode === "forbidden" ? "#e57373" : "#81c784";
    ctx.lineWidth = 1;
    const half = 0.4;
    const steps = 5;
    for (let i = -steps; i <= steps; i++) {
      const t = (i / steps) * half;
      line(
        ctx,
        cam,
        { x: f.point.x + u.x * t - v.x * half, y: f.point.y + u.y * t - v.y * half, z: f.point.z + u.z * t - v.z * half },
        { x: f.point.x + u.x * t + v.x * half, y: f.point.y + u.y * t + v.y * half, z: f.point.z + u.z * t + v.z * half },
      );
      line(
        ctx,
        cam,
        { x: f.point.x + v.x * t - u.x * half, y: f.point.y + v.y * t - u.y * half, z: f.point.z + v.z * t - u.z * half },
        { x: f.point.x + v.x * t + u.x * half, y: f.point.y + v.y * t + u.y * half, z: f.point.z + v.z * t + u.z * half },
      );
    }
  }
}

function drawCloud(ctx: CanvasRenderingContext2D, cam: CameraRig, scene: SceneState) {
  if (!scene.showCloud || !scene.cloud) return;
  const { points, colors } = scene.cloud;
  for (let i = 0; i < points.length; i++) {
    const s = project(cam, { x: points[i][0], y: points[i][1], z: points[i][2] });
    if (!s) continue;
    ctx.fillStyle = colors ? `rgb(${colors[i][0]},${colors[i][1]},${colors[i][2]})` : "#9e9e9e";
    ctx.fillRect(s.x - 1, s.y - 1, 2, 2);
  }
}

export function draw(
  ctx: CanvasRenderingContext2D,
  cam: CameraRig,
  scene: SceneState,
  now: number,
) {
  ctx.fillStyle = "#14171c";
  ctx.fillRect(0, 0, cam.viewportW, cam.viewportH);
  drawBox(ctx, cam);
  drawCloud(ctx, cam, scene);
  drawFixtures(ctx, cam, scene);
  for (const side of ["left", "right"] as const) drawArm(ctx, cam, scene, side, now);
}
