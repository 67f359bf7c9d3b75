// Cockpit wiring: WebSocket session, gamepad/keyboard polling, canvas
// rendering, HUD text. All control decisions are server-side; this file
// only forwards inputs and draws what the snapshots say.

import { defaultCamera, orbit, zoom } from "./camera.js";
import { InputPoller, emptyKeyState } from "./gamepad.js";
import {
  encodeInput,
  parseServerMessage,
  validateCanal,
  type ButtonName,
  type CanalGeometry,
} from "./protocol.js";
import { renderFrame } from "./render.js";
import { SessionModel } from "./session.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const hud = {
  status: document.getElementById("status")!,
  diskClass: document.getElementById("disk-class")!,
  mode: document.getElementById("mode")!,
  indicators: document.getElementById("indicators")!,
  dropped: document.getElementById("dropped")!,
};

const session = new SessionModel();
const camera = defaultCamera();
const keys = emptyKeyState();
const poller = new InputPoller(() =>
  (navigator.getGamepads ? Array.from(navigator.getGamepads()) : []));

const wsUrl = `ws://${location.host}/ws`;
const ws = new WebSocket(wsUrl);

ws.onopen = () => {
  ws.send(JSON.stringify({ kind: "hello", role: "pilot" }));
};

ws.onclose = () => {
  session.connection = "closed";
};

ws.onmessage = async (event) => {
  let message;
  try {
    message = parseServerMessage(String(event.data));
  } catch (err) {
    console.warn("dropped malformed message", err);
    return;
  }
  if (message.kind === "welcome") {
    session.applyWelcome(message);
    const reply = await fetch(`/canal/${message.canal}`);
    session.canal = validateCanal(await reply.json()) as CanalGeometry;
    if (session.canal.d.length) {
      const mid = session.canal.d[Math.floor(session.canal.d.length / 2)];
      camera.target = [mid[0], mid[1], mid[2]];
    }
  } else if (message.kind === "snapshot") {
    session.acceptSnapshot(message);
  } else if (message.kind === "error") {
    console.warn("server:", message.error);
  }
};

// keyboard fallback: arrows steer, letter keys are the four buttons
const KEY_BUTTONS: Record<string, ButtonName> = {
  Enter: "start",
  Escape: "stop",
  KeyD: "toggle_direction",
  KeyG: "toggle_gripper",
};

window.addEventListener("keydown", (e) => {
  if (e.code === "ArrowLeft") keys.left = true;
  else if (e.code === "ArrowRight") keys.right = true;
  else if (e.code === "ArrowUp") keys.up = true;
  else if (e.code === "ArrowDown") keys.down = true;
  else if (KEY_BUTTONS[e.code]) keys.buttons[KEY_BUTTONS[e.code]] = true;
  else return;
  e.preventDefault();
});

window.addEventListener("keyup", (e) => {
  if (e.code === "ArrowLeft") keys.left = false;
  else if (e.code === "ArrowRight") keys.right = false;
  else if (e.code === "ArrowUp") keys.up = false;
  else if (e.code === "ArrowDown") keys.down = false;
  else if (KEY_BUTTONS[e.code]) keys.buttons[KEY_BUTTONS[e.code]] = false;
});

// camera controls; these never emit robot input
let dragging = false;
let lastX = 0;
let lastY = 0;
canvas.addEventListener("mousedown", (e) => {
  dragging = true;
  lastX = e.clientX;
  lastY = e.clientY;
});
window.addEventListener("mouseup", () => (dragging = false));
window.addEventListener("mousemove", (e) => {
  if (!dragging) return;
  orbit(camera, -(e.clientX - lastX) * 0.008, (e.clientY - lastY) * 0.008);
  lastX = e.clientX;
  lastY = e.clientY;
});
canvas.addEventListener("wheel", (e) => {
  zoom(camera, e.deltaY > 0 ? 1.1 : 0.9);
  e.preventDefault();
});

function resize(): void {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
}
window.addEventListener("resize", resize);
resize();

function frame(): void {
  if (session.pilot && ws.readyState === WebSocket.OPEN) {
    for (const input of poller.poll(keys)) {
      ws.send(encodeInput(input));
    }
  }
  session.inputSource = poller.source;

  renderFrame(ctx, camera, session.canal, session.latest,
              canvas.width, canvas.height);

  const snap = session.latest;
  hud.status.textContent =
    `${session.connection}${session.pilot ? " / pilot" : " / observer"}` +
    ` / input: ${session.inputSource}`;
  hud.diskClass.textContent = snap?.disk_class ?? "n/a";
  hud.mode.textContent = snap ? snap.mode : "-";
  hud.indicators.textContent = snap
    ? `dir ${snap.direction > 0 ? "forward" : "reverse"} | gripper ${snap.gripper}` +
      ` | s=${snap.s} rho=${snap.rho.toFixed(2)}`
    : "";
  hud.dropped.textContent = session.droppedFrames
    ? `dropped frames: ${session.droppedFrames}` : "";

  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
