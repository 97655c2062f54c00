/**
 * Pointer-to-hand-pose mapping.
 *
 * Pixels to meters: the pointer moves the hand on a camera-facing plane
 * through the grab point. With a perspective camera of vertical fov `fovY`
 * and viewport height H px, one pixel at depth d along the view axis spans
 *   metersPerPixel = 2 * d * tan(fovY / 2) / H.
 * Screen +x maps to camera-right, screen +y (downward) to camera-down, and
 * the scroll wheel moves the plane along the view axis in DEPTH_STEP
 * increments. Orientation comes from the roll/pitch/yaw widget, applied in
 * world frame.
 */

import type { PosePayload, QuatPayload, Vec3Payload } from "./protocol.js";

export const DEPTH_STEP = 0.01; // m per wheel notch

export interface CameraRig {
  yaw: number; // rad, about world z
  pitch: number; // rad, 0 = horizontal
  distance: number; // m from target
  target: Vec3Payload;
  fovY: number; // rad
  viewportW: number; // px
  viewportH: number; // px
}

export interface CameraBasis {
  right: Vec3Payload;
  up: Vec3Payload;
  forward: Vec3Payload; // from eye toward target
  eye: Vec3Payload;
}

export function cameraBasis(cam: CameraRig): CameraBasis {
  const cy = Math.cos(cam.yaw);
  const sy = Math.sin(cam.yaw);
  const cp = Math.cos(cam.pitch);
  const sp = Math.sin(cam.pitch);
  // Orbit camera: z-up world, eye behind the target along -forward.
  const forward = { x: cy * cp, y: sy * cp, z: -sp };
  const right = { x: -sy, y: cy, z: 0 };
  const up = {
    x: right.y * forward.z - right.z * forward.y,
    y: right.z * forward.x - right.x * forward.z,
    z: right.x * forward.y - right.y * forward.x,
  };
  const eye = {
    x: cam.target.x - forward.x * cam.distance,
    y: cam.target.y - forward.y * cam.distance,
    z: cam.target.z - forward.z * cam.distance,
  };
  return { right, up, forward, eye };
}

export function metersPerPixel(cam: CameraRig, depth: number): number {
  return (2 * depth * Math.tan(cam.fovY / 2)) / cam.viewportH;
}

function add(a: Vec3Payload, b: Vec3Payload, s: number): Vec3Payload {
  return { x: a.x + b.x * s, y: a.y + b.y * s, z: a.z + b.z * s };
}

export function quatFromRpy(roll: number, pitch: number, yaw: number): QuatPayload {
  const cr = Math.cos(roll / 2), sr = Math.sin(roll / 2);
  const cp = Math.cos(pitch / 2), sp = Math.sin(pitch / 2);
  const cy = Math.cos(yaw / 2), sy = Math.sin(yaw / 2);
  return {
    w: cr * cp * cy + sr * sp * sy,
    x: sr * cp * cy - cr * sp * sy,
    y: cr * sp * cy + sr * cp * sy,
    z: cr * cp * sy - sr * sp * cy,
  };
}

export class DragController {
  private grabPoint: Vec3Payload | null = null;
  private basis: CameraBasis | null = null;
  private depth = 0;
  private mpp = 0;
  private dxPx = 0;
  private dyPx = 0;
  private depthOffset = 0;
  roll = 0;
  pitch = 0;
  yaw = 0;

  get active(): boolean {
    return this.grabPoint !== null;
  }

  /** Latch the grab point (the virtual gripper position) and freeze the
   * camera-facing plane geometry for this drag. */
  begin(grabPoint: Vec3Payload, cam: CameraRig): void {
    const basis = cameraBasis(cam);
    const rel = {
      x: grabPoint.x - basis.eye.x,
      y: grabPoint.y - basis.eye.y,
      z: grabPoint.z - basis.eye.z,
    };
    this.depth = rel.x * basis.forward.x + rel.y * basis.forward.y + rel.z * basis.forward.z;
    this.mpp = metersPerPixel(cam, this.depth);
    this.grabPoint = grabPoint;
    this.basis = basis;
    this.dxPx = 0;
    this.dyPx = 0;
    this.depthOffset = 0;
  }

  pointerDelta(dxPx: number, dyPx: number): void {
    this.dxPx += dxPx;
    this.dyPx += dyPx;
  }

  wheel(notches: number): void {
    this.depthOffset += notches * DEPTH_STEP;
  }

  end(): void {
    this.grabPoint = null;
    this.basis = null;
  }

  /** Current hand pose; deterministic in the accumulated pointer state. */
  pose(): PosePayload | null {
    if (!this.grabPoint || !this.basis) return null;
    let p = add(this.grabPoint, this.basis.right, this.dxPx * this.mpp);
    p = add(p, this.basis.up, -this.dyPx * this.mpp); // screen y points down
    p = add(p, this.basis.forward, this.depthOffset);
    return { position: p, orientation: quatFromRpy(this.roll, this.pitch, this.yaw) };
  }
}
