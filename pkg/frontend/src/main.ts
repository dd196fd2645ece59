/**
 * Browser entry point: wires the capture pad, spike raster canvas, and
 * mock player panel to the demo service. All player-state changes flow
 * through CTL frames via DemoClient; nothing here mutates the mirror.
 */

import { DemoClient } from "./client.js";
import { OutboundBuffer, PointerThrottle } from "./pointer.js";
import { bye, hello, replay, setMode } from "./protocol.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const client = new DemoClient();
const throttle = new PointerThrottle();
const outbox = new OutboundBuffer();

const wsUrl =
  new URLSearchParams(location.search).get("ws") ?? `ws://${location.hostname || "127.0.0.1"}:8765`;

let socket: WebSocket | null = null;
let mode: "pointer" | "replay" = "pointer";

function connect(): void {
  client.state.connection = "connecting";
  renderStatus();
  socket = new WebSocket(wsUrl);
  socket.onopen = () => {
    socket!.send(hello("1") + "\n");
    socket!.send(setMode(mode) + "\n");
    for (const frame of outbox.drain()) socket!.send(frame + "\n");
  };
  socket.onmessage = (event) => {
    for (const line of String(event.data).split("\n")) {
      if (line.trim()) client.handleLine(line);
    }
    renderStatus();
    renderPlayer();
  };
  socket.onclose = () => {
    client.onDisconnect();
    renderStatus();
  };
  socket.onerror = () => {
    client.onDisconnect();
    renderStatus();
  };
}

function sendFrame(frame: string): void {
  if (socket && socket.readyState === WebSocket.OPEN) {
    socket.send(frame + "\n");
  } else {
    outbox.push(performance.now(), frame);
    client.state.droppedFrames = outbox.droppedWhileDisconnected;
  }
}

// -- capture pad ------------------------------------------------------------

function bindPointerPad(): void {
  const pad = $("pad");
  pad.addEventListener("pointermove", (event: PointerEvent) => {
    if (mode !== "pointer") return;
    const rect = pad.getBoundingClientRect();
    const x = (event.clientX - rect.left) / rect.width;
    const y = (event.clientY - rect.top) / rect.height;
    const frame = throttle.offer(event.timeStamp, x, y);
    if (frame) sendFrame(frame);
  });
}

// -- raster -----------------------------------------------------------------

function drawRaster(): void {
  const canvas = $("raster") as unknown as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#556";
  ctx.beginPath();
  ctx.moveTo(0, height / 2);
  ctx.lineTo(width, height / 2);
  ctx.stroke();

  const points = client.raster.live();
  if (points.length) {
    const latest = points[points.length - 1].tSeconds;
    client.raster.evictBefore(latest - client.raster.windowSeconds);
    const t0 = latest - client.raster.windowSeconds;
    for (const point of client.raster.live()) {
      const x = ((point.tSeconds - t0) / client.raster.windowSeconds) * width;
      ctx.strokeStyle = point.polarity > 0 ? "#3fe07f" : "#ff5f66";
      ctx.beginPath();
      if (point.polarity > 0) {
        ctx.moveTo(x, height / 2 - 4);
        ctx.lineTo(x, height / 2 - height * 0.42);
      } else {
        ctx.moveTo(x, height / 2 + 4);
        ctx.lineTo(x, height / 2 + height * 0.42);
      }
      ctx.stroke();
    }
  }
  requestAnimationFrame(drawRaster);
}

// -- panels -----------------------------------------------------------------

function renderStatus(): void {
  $("status").textContent = client.state.connection;
  $("session").textContent = client.state.sessionId ?? "-";
  $("label").textContent = client.state.labelName;
  $("confidence").textContent = client.state.currentConfidence.toFixed(2);
  $("dropped").textContent = String(client.state.droppedFrames);
  $("malformed").textContent = String(client.state.malformedFrames);
  $("warning").textContent = client.state.lastWarning ?? "";
  $("error").textContent = client.state.lastError ?? "";
}

function renderPlayer(): void {
  const player = client.state.player;
  $("play-icon").textContent = player.playing ? "⏸" : "▶";
  $("position").textContent = `${player.position.toFixed(0)} s`;
  ($("volume-bar") as HTMLElement).style.width = `${player.volume}%`;
  $("volume-value").textContent = String(player.volume);
  $("mute-badge").style.display = player.muted ? "inline-block" : "none";
}

function bindControls(): void {
  ($("mode-toggle") as HTMLInputElement).addEventListener("change", (event) => {
    mode = (event.target as HTMLInputElement).checked ? "replay" : "pointer";
    sendFrame(setMode(mode));
    $("mode-name").textContent = mode;
  });
  $("reconnect").addEventListener("click", () => {
    if (socket) {
      socket.send(bye() + "\n");
      socket.close();
    }
    connect();
  });
  for (const [classId, name] of [
    [0, "push-pull"],
    [1, "slow-wave"],
    [2, "fast-wave"],
    [3, "up-down"],
    [4, "no-activity"],
  ] as const) {
    $(`replay-${name}`).addEventListener("click", () => {
      const seed = Number(($("seed") as HTMLInputElement).value) || 1;
      if (mode !== "replay") {
        mode = "replay";
        ($("mode-toggle") as HTMLInputElement).checked = true;
        $("mode-name").textContent = mode;
        sendFrame(setMode(mode));
      }
      sendFrame(replay(classId, seed));
    });
  }
}

bindPointerPad();
bindControls();
connect();
renderStatus();
renderPlayer();
requestAnimationFrame(drawRaster);
