import { describe, expect, it } from "vitest";

import type { PointCloudPayload } from "../src/protocol.js";
import { CloudAssembler, JOINT_PUBLISH_INTERVAL, SceneState } from "../src/scene.js";

function chunk(frameSeq: number, i: number, of: number, points: number[][]): PointCloudPayload {
  return { frame_seq: frameSeq, chunk: i, of, last: i === of - 1, points };
}

const header = { seq: 0, stamp: { sec: 0, nanosec: 0 }, frame_id: "world" };

describe("CloudAssembler", () => {
  it("emits only complete frames", () => {
    const asm = new CloudAssembler();
    expect(asm.add(chunk(1, 0, 3, [[0, 0, 0]]))).toBeNull();
    expect(asm.add(chunk(1, 2, 3, [[2, 0, 0]]))).toBeNull();
    const done = asm.add(chunk(1, 1, 3, [[1, 0, 0]]));
    expect(done).not.toBeNull();
    expect(done!.points).toEqual([[0, 0, 0], [1, 0, 0], [2, 0, 0]]);
  });

  it("handles the empty clear frame", () => {
    const asm = new CloudAssembler();
    const done = asm.add(chunk(9, 0, 1, []));
    expect(done).not.toBeNull();
    expect(done!.points).toEqual([]);
  });

  it("discards stale partial frames once a newer frame completes", () => {
    const asm = new CloudAssembler();
    asm.add(chunk(1, 0, 2, [[0, 0, 0]])); // forever incomplete
    asm.add(chunk(2, 0, 1, [[5, 5, 5]]));
    expect(asm.pendingFrames).toBe(0);
  });

  it("keeps colors aligned across chunks", () => {
    const asm = new CloudAssembler();
    const a = { ...chunk(3, 0, 2, [[0, 0, 0]]), colors: [[1, 2, 3]] };
    const b = { ...chunk(3, 1, 2, [[1, 1, 1]]), colors: [[4, 5, 6]] };
    asm.add(b);
    const done = asm.add(a)!;
    expect(done.colors).toEqual([[1, 2, 3], [4, 5, 6]]);
  });
});

describe("joint interpolation", () => {
  it("lerps across one publish interval", () => {
    const scene = new SceneState();
    scene.onJointState("left", { header, name: ["j0"], position: [0.0] }, 0.0);
    scene.onJointState("left", { header, name: ["j0"], position: [0.3] }, 1.0);
    expect(scene.interpolatedQ("left", 1.0)[0]).toBeCloseTo(0.0, 12);
    expect(scene.interpolatedQ("left", 1.0 + JOINT_PUBLISH_INTERVAL / 2)[0]).toBeCloseTo(0.15, 12);
    expect(scene.interpolatedQ("left", 2.0)[0]).toBeCloseTo(0.3, 12);
  });

  it("animates a 30 Hz stream with no jump beyond one interpolation step", () => {
    const scene = new SceneState();
    const frameDt = 1 / 120;
    let prev = Number.NaN;
    let maxJump = 0;
    let t = 0;
    for (let k = 0; k < 60; k++) {
      const target = Math.sin(k * 0.2) * 0.5;
      scene.onJointState("left", { header, name: ["j0"], position: [target] }, t);
      for (let f = 0; f < 4; f++) {
        const q = scene.interpolatedQ("left", t + f * frameDt)[0];
        if (!Number.isNaN(prev)) maxJump = Math.max(maxJump, Math.abs(q - prev));
        prev = q;
      }
      t += JOINT_PUBLISH_INTERVAL;
    }
    // One interpolation step is (frameDt / publishInterval) of the largest
    // per-update joint change; successive updates move at most ~0.1 rad.
    const stepBound = (frameDt / JOINT_PUBLISH_INTERVAL) * 0.11;
    expect(maxJump).toBeLessThanOrEqual(stepBound);
  });
});

describe("joint-count mismatch", () => {
  const chain = {
    name: "planar2",
    base_pose: {
      position: { x: 0, y: 0, z: 0 },
      orientation: { x: 0, y: 0, z: 0, w: 1 },
    },
    rows: [
      { a: 1, alpha: 0, d: 0, theta_offset: 0, joint: "revolute", limits: [-3, 3], vel_limit: 1 },
      { a: 1, alpha: 0, d: 0, theta_offset: 0, joint: "revolute", limits: [-3, 3], vel_limit: 1 },
    ],
  };

  it("freezes the render and raises the badge", () => {
    const scene = new SceneState();
    scene.setChain("left", chain);
    scene.onJointState("left", { header, name: ["a", "b"], position: [0.1, 0.2] }, 0);
    expect(scene.arms.left.mismatch).toBe(false);
    scene.onJointState("left", { header, name: ["a", "b", "c"], position: [1, 2, 3] }, 0.1);
    expect(scene.arms.left.mismatch).toBe(true);
    expect(scene.arms.left.q).toEqual([0.1, 0.2]); // frozen on the old values
    scene.onJointState("left", { header, name: ["a", "b"], position: [0.2, 0.3] }, 0.2);
    expect(scene.arms.left.mismatch).toBe(false);
  });
});
