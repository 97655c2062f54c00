/**
 * Browser wiring: connects the network layer, scene state, drag mapping,
 * and canvas renderer to the DOM. Right-drag orbits the camera; left-drag
 * on a gripper handle (after Grab) teleoperates that arm; the wheel adjusts
 * drag depth; sliders set hand orientation and motion scale.
 */

import { CameraRig } from "./drag.js";
import { DragController } from "./drag.js";
import { ChainPayload } from "./fk.js";
import { fkFrames, framePosition } from "./fk.js";
import { ConsoleClient } from "./net.js";
import {
  validateFixtureConfig,
  validateJointState,
  validatePointCloud,
  validatePoseStamped,
  type Envelope,
} from "./protocol.js";
import { project } from "./render.js";
import { draw } from "./render.js";
import { SIDES, SceneState, type Side } from "./scene.js";

const HAND_RATE_HZ = 30;

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

const canvas = $("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const scene = new SceneState();
const drag = new DragController();

const camera: CameraRig = {
  yaw: -2.2,
  pitch: 0.45,
  distance: 2.2,
  target: { x: 0, y: 0, z: 0.4 },
  fovY: Math.PI / 4,
  viewportW: canvas.width,
  viewportH: canvas.height,
};

let activeSide: Side | null = null;
let client: ConsoleClient | null = null;
let handTimer: number | null = null;

function serverUrl(): { ws: string; http: string } {
  const input = ($("url") as HTMLInputElement).value.trim();
  const ws = input.startsWith("ws") ? input : `ws://${input}`;
  return { ws, http: ws.replace(/^ws/, "http") };
}

function setStatus(text: string, cls: string) {
  const el = $("status");
  el.textContent = text;
  el.className = cls;
}

function onEnvelope(env: Envelope) {
  if (env.op === "status") {
    scene.statusLine = `${env.level}: ${env.text}`;
    $("server-status").textContent = scene.statusLine;
    return;
  }
  if (env.op !== "publish" || env.topic === undefined) return;
  const now = performance.now() / 1000;
  const m = env.topic.match(/^\/arm\/(left|right)\/(joint_states|ee_pose)$/);
  if (m) {
    const side = m[1] as Side;
    if (m[2] === "joint_states") scene.onJointState(side, validateJointState(env.msg), now);
    else scene.onEePose(side, validatePoseStamped(env.msg));
    updateBadges();
    return;
  }
  if (env.topic === "/cloud/points") scene.onCloudChunk(validatePointCloud(env.msg));
  else if (env.topic === "/teleop/fixtures") scene.onFixtures(validateFixtureConfig(env.msg));
}

function updateBadges() {
  for (const side of SIDES) {
    const badge = $(`badge-${side}`);
    badge.hidden = !scene.arms[side].mismatch;
  }
}

async function connect() {
  const { ws, http } = serverUrl();
  client?.disconnect();
  client = new ConsoleClient({
    url: ws,
    onEnvelope,
    onState: (s) => {
      scene.connection = s;
      setStatus(s, s);
      if (s !== "connected" && activeSide !== null) endDrag();
    },
    onValidationFailure: (err) => {
      console.warn("dropped malformed envelope:", err.message);
    },
  });
  client.connect();
  try {
    const resp = await fetch(`${http}/config/chains`);
    const chains = (await resp.json()) as Record<string, ChainPayload>;
    for (const side of SIDES) {
      if (chains[side]) scene.setChain(side, chains[side]);
    }
  } catch (e) {
    setStatus(`chains fetch failed: ${e}`, "disconnected");
  }
}

function gripperScreenPos(side: Side) {
  const arm = scene.arms[side];
  if (!arm.chain || arm.q.length !== arm.chain.rows.length) return null;
  const frames = fkFrames(arm.chain, arm.q);
  return project(camera, framePosition(frames[frames.length - 1]));
}

function beginDrag(side: Side) {
  if (!client?.connected) return;
  const arm = scene.arms[side];
  if (!arm.chain || arm.q.length === 0) return;
  const frames = fkFrames(arm.chain, arm.q);
  const tip = framePosition(frames[frames.length - 1]);
  drag.begin(tip, camera);
  client.setGrab(side, true);
  arm.grabbed = true;
  activeSide = side;
  if (handTimer === null) {
    handTimer = window.setInterval(publishHand, 1000 / HAND_RATE_HZ);
  }
}

function endDrag() {
  if (activeSide !== null) {
    scene.arms[activeSide].grabbed = false;
    client?.setGrab(activeSide, false); // exactly once: client dedupes
  }
  activeSide = null;
  drag.end();
  if (handTimer !== null) {
    clearInterval(handTimer);
    handTimer = null;
  }
}

function publishHand() {
  if (activeSide === null || client === null) return;
  const pose = drag.pose();
  if (pose) client.publishHandPose(activeSide, pose, performance.now() / 1000);
}

// -- pointer handling --------------------------------------------------------

let orbiting = false;
let lastX = 0;
let lastY = 0;

canvas.addEventListener("pointerdown", (ev) => {
  lastX = ev.offsetX;
  lastY = ev.offsetY;
  if (ev.button === 2 || ev.shiftKey) {
    orbiting = true;
    return;
  }
  for (const side of SIDES) {
    const s = gripperScreenPos(side);
    if (s && Math.hypot(s.x - ev.offsetX, s.y - ev.offsetY) < 16) {
      beginDrag(side);
      canvas.setPointerCapture(ev.pointerId);
      return;
    }
  }
  orbiting = true;
});

canvas.addEventListener("pointermove", (ev) => {
  const dx = ev.offsetX - lastX;
  const dy = ev.offsetY - lastY;
  lastX = ev.offsetX;
  lastY = ev.offsetY;
  if (activeSide !== null) {
    drag.pointerDelta(dx, dy);
  } else if (orbiting && ev.buttons !== 0) {
    camera.yaw -= dx * 0.01;
    camera.pitch = Math.max(-1.4, Math.min(1.4, camera.pitch + dy * 0.01));
  }
});

canvas.addEventListener("pointerup", () => {
  orbiting = false;
  if (activeSide !== null) endDrag();
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const notches = -Math.sign(ev.deltaY);
  if (activeSide !== null) drag.wheel(notches);
  else camera.distance = Math.max(0.5, Math.min(6, camera.distance - notches * 0.1));
});

canvas.addEventListener("contextmenu", (ev) => ev.preventDefault());

// No zombie grabs: release before the tab goes away or hides.
window.addEventListener("pagehide", () => client?.releaseAllGrabs());
document.addEventListener("visibilitychange", () => {
  if (document.visibilityState === "hidden") {
    endDrag();
    client?.releaseAllGrabs();
  }
});

// -- UI controls ---------------------------------------------------------------

$("connect").addEventListener("click", () => void connect());
$("disconnect").addEventListener("click", () => {
  endDrag();
  client?.disconnect();
});

const scaleSlider = $("scale") as HTMLInputElement;
// Publishes on release, not continuously: /teleop/scale is state-like.
scaleSlider.addEventListener("change", () => {
  const v = Number(scaleSlider.value);
  $("scale-value").textContent = v.toFixed(2);
  client?.publishScale(v);
});
scaleSlider.addEventListener("input", () => {
  $("scale-value").textContent = Number(scaleSlider.value).toFixed(2);
});

($("toggle-fixtures") as HTMLInputElement).addEventListener("change", (ev) => {
  scene.showFixtures = (ev.target as HTMLInputElement).checked;
});
($("toggle-cloud") as HTMLInputElement).addEventListener("change", (ev) => {
  scene.showCloud = (ev.target as HTMLInputElement).checked;
});

for (const axis of ["roll", "pitch", "yaw"] as const) {
  const slider = $(`hand-${axis}`) as HTMLInputElement;
  slider.addEventListener("input", () => {
    drag[axis] = Number(slider.value);
  });
}

// -- render loop -----------------------------------------------------------------

function frame() {
  draw(ctx, camera, scene, performance.now() / 1000);
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
