/**
 * Frame protocol spoken with the demo service: newline-terminated text
 * frames over a WebSocket. This module is pure parsing/formatting so it
 * runs identically in the browser and under node tests.
 */

export const GESTURE_NAMES = [
  "push-pull",
  "slow-wave",
  "fast-wave",
  "up-down",
  "no-activity",
] as const;

export interface ReadyFrame {
  kind: "ready";
  sessionId: string;
}

export interface EventBatchFrame {
  kind: "evtb";
  /** event timestamps in encoder ticks, paired with polarities */
  ticks: number[];
  polarities: number[];
}

export interface LabelFrame {
  kind: "lbl";
  tMs: number;
  classId: number;
  confidence: number;
}

export type ControlCommand =
  | { op: "playpause" }
  | { op: "seek"; delta: number }
  | { op: "vol"; value: number }
  | { op: "mute"; on: boolean };

export interface ControlFrame {
  kind: "ctl";
  command: ControlCommand;
  raw: string;
}

export interface NoticeFrame {
  kind: "warn" | "err";
  code: string;
  text: string;
}

export type ServerFrame =
  | ReadyFrame
  | EventBatchFrame
  | LabelFrame
  | ControlFrame
  | NoticeFrame;

/** Parse one server frame; null means the line is malformed. */
export function parseServerFrame(line: string): ServerFrame | null {
  const parts = line.trim().split(/\s+/);
  if (parts.length === 0 || parts[0] === "") return null;
  switch (parts[0]) {
    case "READY":
      if (parts.length !== 2) return null;
      return { kind: "ready", sessionId: parts[1] };
    case "EVTB": {
      if (parts.length < 2) return null;
      const n = Number(parts[1]);
      if (!Number.isInteger(n) || n < 0 || parts.length !== 2 + 2 * n) return null;
      const ticks: number[] = [];
      const polarities: number[] = [];
      for (let i = 0; i < n; i++) {
        const t = Number(parts[2 + 2 * i]);
        const p = Number(parts[3 + 2 * i]);
        if (!Number.isFinite(t) || (p !== 1 && p !== -1)) return null;
        ticks.push(t);
        polarities.push(p);
      }
      return { kind: "evtb", ticks, polarities };
    }
    case "LBL": {
      if (parts.length !== 4) return null;
      const tMs = Number(parts[1]);
      const classId = Number(parts[2]);
      const confidence = Number(parts[3]);
      if (!Number.isFinite(tMs) || !Number.isInteger(classId)) return null;
      if (classId < 0 || classId > 4 || !(confidence >= 0 && confidence <= 1)) return null;
      return { kind: "lbl", tMs, classId, confidence };
    }
    case "CTL": {
      const command = parseControl(parts.slice(1));
      if (command === null) return null;
      return { kind: "ctl", command, raw: parts.slice(1).join(" ") };
    }
    case "WARN":
    case "ERR":
      if (parts.length < 2) return null;
      return {
        kind: parts[0] === "WARN" ? "warn" : "err",
        code: parts[1],
        text: parts.slice(2).join(" "),
      };
    default:
      return null;
  }
}

function parseControl(parts: string[]): ControlCommand | null {
  switch (parts[0]) {
    case "PLAYPAUSE":
      return parts.length === 1 ? { op: "playpause" } : null;
    case "SEEK": {
      if (parts.length !== 2) return null;
      const delta = Number(parts[1]);
      return Number.isFinite(delta) ? { op: "seek", delta } : null;
    }
    case "VOL": {
      if (parts.length !== 2) return null;
      const value = Number(parts[1]);
      return Number.isInteger(value) && value >= 0 && value <= 100
        ? { op: "vol", value }
        : null;
    }
    case "MUTE":
      if (parts.length !== 2 || (parts[1] !== "0" && parts[1] !== "1")) return null;
      return { op: "mute", on: parts[1] === "1" };
    default:
      return null;
  }
}

// client -> server formatters

export const hello = (version: string): string => `HELLO ${version}`;
export const setMode = (mode: "pointer" | "replay"): string => `MODE ${mode}`;
export const bye = (): string => "BYE";

export function ptr(tMs: number, x: number, y: number): string {
  return `PTR ${Math.round(tMs)} ${x.toFixed(4)} ${y.toFixed(4)}`;
}

export function replay(classId: number, seed: number): string {
  return `REPLAY ${classId} ${seed}`;
}
