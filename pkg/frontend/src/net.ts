/**
 * Bridge client: subscriptions, advertises, grab lifecycle, and
 * auto-reconnect with exponential backoff. Every inbound frame passes the
 * strict decoder plus per-topic schema validation; malformed traffic is
 * counted and skipped, never fatal.
 *
 * The WebSocket constructor and clock are injectable so the whole layer runs
 * headless under node.
 */

import {
  Envelope,
  PoseStampedPayload,
  ProtocolError,
  decodeEnvelope,
  encodeEnvelope,
  validateTopicPayload,
} from "./protocol.js";
import type { Side } from "./scene.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  readyState: number;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientStats {
  sent: number;
  received: number;
  validationFailures: number;
  reconnects: number;
}

export interface ClientOptions {
  url: string;
  socketFactory?: SocketFactory;
  onEnvelope?: (env: Envelope) => void;
  onState?: (state: "connected" | "reconnecting" | "disconnected") => void;
  onValidationFailure?: (err: ProtocolError, raw: string) => void;
  /** Backoff schedule in ms; doubles from first to max. */
  backoffMinMs?: number;
  backoffMaxMs?: number;
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
}

const SUBSCRIBE_TOPICS = [
  "/arm/left/joint_states",
  "/arm/right/joint_states",
  "/arm/left/ee_pose",
  "/arm/right/ee_pose",
  "/cloud/points",
  "/teleop/fixtures",
];

const ADVERTISE_TOPICS: Array<[string, string]> = [
  ["/hand/left", "PoseStamped"],
  ["/hand/right", "PoseStamped"],
  ["/hand/left/grab", "Grab"],
  ["/hand/right/grab", "Grab"],
  ["/teleop/scale", "Float64"],
];

const OPEN = 1;

export class ConsoleClient {
  readonly stats: ClientStats = { sent: 0, received: 0, validationFailures: 0, reconnects: 0 };
  private socket: SocketLike | null = null;
  private opts: Required<Pick<ClientOptions, "backoffMinMs" | "backoffMaxMs">> & ClientOptions;
  private backoffMs: number;
  private engaged = new Set<Side>();
  private seqByTopic = new Map<string, number>();
  private closedByUser = false;
  private factory: SocketFactory;
  private setTimeoutFn: (fn: () => void, ms: number) => unknown;

  constructor(options: ClientOptions) {
    this.opts = { backoffMinMs: 500, backoffMaxMs: 10_000, ...options };
    this.backoffMs = this.opts.backoffMinMs;
    this.factory = options.socketFactory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
    this.setTimeoutFn = options.setTimeoutFn ?? ((fn, ms) => setTimeout(fn, ms));
  }

  get connected(): boolean {
    return this.socket !== null && this.socket.readyState === OPEN;
  }

  grabEngaged(side: Side): boolean {
    return this.engaged.has(side);
  }

  connect(): void {
    this.closedByUser = false;
    this.openSocket();
  }

  private openSocket(): void {
    let sock: SocketLike;
    try {
      sock = this.factory(this.opts.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.socket = sock;
    sock.onopen = () => {
      this.backoffMs = this.opts.backoffMinMs;
      this.bootstrap();
      this.opts.onState?.("connected");
    };
    sock.onmessage = (ev) => this.handleFrame(String(ev.data));
    sock.onerror = () => {
      /* close always follows */
    };
    sock.onclose = () => {
      this.socket = null;
      // A dead socket cannot carry a release; the server's stale timeout
      // covers the gap. Locally the grabs are gone.
      this.engaged.clear();
      if (!this.closedByUser) {
        this.opts.onState?.("reconnecting");
        this.scheduleReconnect();
      } else {
        this.opts.onState?.("disconnected");
      }
    };
  }

  private scheduleReconnect(): void {
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, this.opts.backoffMaxMs);
    this.stats.reconnects += 1;
    this.setTimeoutFn(() => {
      if (!this.closedByUser) this.openSocket();
    }, delay);
  }

  private bootstrap(): void {
    for (const [topic, type] of ADVERTISE_TOPICS) {
      this.sendEnvelope({ op: "advertise", topic, type });
    }
    for (const topic of SUBSCRIBE_TOPICS) {
      this.sendEnvelope({ op: "subscribe", topic });
    }
  }

  private handleFrame(raw: string): void {
    let env: Envelope;
    try {
      env = decodeEnvelope(raw);
      if (env.op === "publish" && env.topic !== undefined) {
        validateTopicPayload(env.topic, env.msg);
      }
    } catch (e) {
      if (e instanceof ProtocolError) {
        this.stats.validationFailures += 1;
        this.opts.onValidationFailure?.(e, raw);
        return; // logged and skipped; the session continues
      }
      throw e;
    }
    this.stats.received += 1;
    this.opts.onEnvelope?.(env);
  }

  sendEnvelope(env: Envelope): boolean {
    if (!this.connected || this.socket === null) return false;
    this.socket.send(encodeEnvelope(env));
    this.stats.sent += 1;
    return true;
  }

  nextSeq(topic: string): number {
    const seq = this.seqByTopic.get(topic) ?? 0;
    this.seqByTopic.set(topic, seq + 1);
    return seq;
  }

  publishHandPose(side: Side, pose: PoseStampedPayload["pose"], nowSec: number): boolean {
    const topic = `/hand/${side}`;
    const sec = Math.floor(nowSec);
    const msg: PoseStampedPayload = {
      header: {
        seq: this.nextSeq(topic),
        stamp: { sec, nanosec: Math.max(0, Math.min(999_999_999, Math.round((nowSec - sec) * 1e9))) },
        frame_id: "console",
      },
      pose,
    };
    return this.sendEnvelope({ op: "publish", topic, msg });
  }

  /** Engage or release the clutch; a release publishes exactly once. */
  setGrab(side: Side, grabbed: boolean): boolean {
    if (grabbed === this.engaged.has(side)) return false;
    const ok = this.sendEnvelope({
      op: "publish",
      topic: `/hand/${side}/grab`,
      msg: { grabbed },
    });
    if (ok) {
      if (grabbed) this.engaged.add(side);
      else this.engaged.delete(side);
    }
    return ok;
  }

  publishScale(value: number): boolean {
    return this.sendEnvelope({ op: "publish", topic: "/teleop/scale", msg: { data: value } });
  }

  /** Called on tab-hide/pagehide and before intentional disconnects: no
   * zombie grabs may outlive the operator's attention. */
  releaseAllGrabs(): void {
    for (const side of [...this.engaged]) {
      this.setGrab(side, false);
    }
  }

  disconnect(): void {
    this.closedByUser = true;
    this.releaseAllGrabs();
    this.socket?.close();
    this.socket = null;
    this.opts.onState?.("disconnected");
  }
}
