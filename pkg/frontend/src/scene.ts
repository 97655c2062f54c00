/**
 * Scene state: the single mutable snapshot the render loop reads. Network
 * callbacks write into it; nothing here touches the DOM.
 */

import type { ChainPayload } from "./fk.js";
import type {
  FixturePayload,
  JointStatePayload,
  PointCloudPayload,
  PoseStampedPayload,
} from "./protocol.js";

export type Side = "left" | "right";
export const SIDES: readonly Side[] = ["left", "right"];

export interface ArmView {
  chain?: ChainPayload;
  jointNames: string[];
  /** Latest received joint values and the previous set, for interpolation. */
  q: number[];
  prevQ: number[];
  qReceivedAt: number;
  eePose?: PoseStampedPayload;
  /** Set when the joint count stops matching the chain; render freezes. */
  mismatch: boolean;
  grabbed: boolean;
}

export interface CompletedCloud {
  frameSeq: number;
  points: number[][];
  colors?: number[][];
}

/**
 * Reassembles chunked cloud messages; only complete frames ever leave this
 * class, so partial clouds never render.
 */
export class CloudAssembler {
  private buffers = new Map<number, Map<number, PointCloudPayload>>();

  add(payload: PointCloudPayload): CompletedCloud | null {
    let chunks = this.buffers.get(payload.frame_seq);
    if (!chunks) {
      chunks = new Map();
      this.buffers.set(payload.frame_seq, chunks);
    }
    chunks.set(payload.chunk, payload);
    if (chunks.size < payload.of) return null;
    this.buffers.delete(payload.frame_seq);
    // Drop stale partial frames once a newer one completes.
    for (const seq of [...this.buffers.keys()]) {
      if (seq <= payload.frame_seq) this.buffers.delete(seq);
    }
    const ordered = [...chunks.values()].sort((a, b) => a.chunk - b.chunk);
    const points = ordered.flatMap((c) => c.points);
    const anyColors = ordered.some((c) => c.colors !== undefined);
    const colors = anyColors ? ordered.flatMap((c) => c.colors ?? []) : undefined;
    return { frameSeq: payload.frame_seq, points, colors };
  }

  get pendingFrames(): number {
    return this.buffers.size;
  }
}

export const JOINT_PUBLISH_INTERVAL = 1 / 30; // s, server joint-state rate

export class SceneState {
  arms: Record<Side, ArmView> = {
    left: emptyArm(),
    right: emptyArm(),
  };
  fixtures: FixturePayload[] = [];
  cloud?: CompletedCloud;
  private assembler = new CloudAssembler();
  connection: "connected" | "reconnecting" | "disconnected" = "disconnected";
  showFixtures = true;
  showCloud = true;
  scale = 1.0;
  statusLine = "";

  setChain(side: Side, chain: ChainPayload) {
    const arm = this.arms[side];
    arm.chain = chain;
    arm.mismatch = arm.q.length > 0 && arm.q.length !== chain.rows.length;
  }

  onJointState(side: Side, payload: JointStatePayload, now: number) {
    const arm = this.arms[side];
    if (arm.chain && payload.position.length !== arm.chain.rows.length) {
      arm.mismatch = true; // warning badge; render stays frozen on old q
      return;
    }
    arm.mismatch = false;
    arm.prevQ = arm.q.length === payload.position.length ? arm.q : payload.position.slice();
    arm.q = payload.position.slice();
    arm.jointNames = payload.name.slice();
    arm.qReceivedAt = now;
  }

  onEePose(side: Side, payload: PoseStampedPayload) {
    this.arms[side].eePose = payload;
  }

  onCloudChunk(payload: PointCloudPayload) {
    const complete = this.assembler.add(payload);
    if (complete) this.cloud = complete;
  }

  onFixtures(payload: FixturePayload[]) {
    this.fixtures = payload;
  }

  /**
   * Joint values for rendering: linear interpolation from the previous to
   * the latest sample across one publish interval, so 30 Hz updates animate
   * without jumps larger than one interpolation step.
   */
  interpolatedQ(side: Side, now: number): number[] {
    const arm = this.arms[side];
    if (arm.q.length === 0) return [];
    if (arm.prevQ.length !== arm.q.length) return arm.q;
    const alpha = Math.min(1, Math.max(0, (now - arm.qReceivedAt) / JOINT_PUBLISH_INTERVAL));
    return arm.q.map((v, i) => arm.prevQ[i] + (v - arm.prevQ[i]) * alpha);
  }
}

function emptyArm(): ArmView {
  return {
    jointNames: [],
    q: [],
    prevQ: [],
    qReceivedAt: 0,
    mismatch: false,
    grabbed: false,
  };
}
