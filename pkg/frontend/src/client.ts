/**
 * UI state and the pure reducer over inbound server frames.
 *
 * The player mirror changes only through CTL frames (the server is
 * authoritative); a READY after reconnect clears the raster and resets
 * the mirror so the view re-syncs from the next frames.
 */

import { GESTURE_NAMES, parseServerFrame, type ServerFrame } from "./protocol.js";
import { applyPlayerCommand, initialPlayerState, type PlayerState } from "./player.js";
import { RasterBuffer } from "./raster.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface UiState {
  connection: ConnectionStatus;
  sessionId: string | null;
  mode: "pointer" | "replay";
  player: PlayerState;
  currentLabel: number;
  currentConfidence: number;
  labelName: string;
  lastWarning: string | null;
  lastError: string | null;
  malformedFrames: number;
  droppedFrames: number;
}

export function initialUiState(): UiState {
  return {
    connection: "disconnected",
    sessionId: null,
    mode: "pointer",
    player: initialPlayerState,
    currentLabel: 4,
    currentConfidence: 1,
    labelName: GESTURE_NAMES[4],
    lastWarning: null,
    lastError: null,
    malformedFrames: 0,
    droppedFrames: 0,
  };
}

export class DemoClient {
  state: UiState = initialUiState();
  readonly raster = new RasterBuffer();

  /** Feed one inbound line; returns the parsed frame (null if malformed). */
  handleLine(line: string): ServerFrame | null {
    if (!line.trim()) return null;
    const frame = parseServerFrame(line);
    if (frame === null) {
      this.state.malformedFrames++;
      return null;
    }
    this.apply(frame);
    return frame;
  }

  private apply(frame: ServerFrame): void {
    switch (frame.kind) {
      case "ready":
        // fresh session (first connect or reconnect): re-sync the view
        this.state.sessionId = frame.sessionId;
        this.state.connection = "connected";
        this.state.player = initialPlayerState;
        this.raster.clear();
        break;
      case "evtb":
        this.raster.addBatch(frame.ticks, frame.polarities);
        break;
      case "lbl":
        this.state.currentLabel = frame.classId;
        this.state.currentConfidence = frame.confidence;
        this.state.labelName = GESTURE_NAMES[frame.classId];
        break;
      case "ctl": {
        const result = applyPlayerCommand(this.state.player, frame.command);
        this.state.player = result.state;
        if (result.warning) this.state.lastWarning = result.warning;
        break;
      }
      case "warn":
        this.state.lastWarning = `${frame.code} ${frame.text}`.trim();
        break;
      case "err":
        this.state.lastError = `${frame.code} ${frame.text}`.trim();
        break;
    }
  }

  onDisconnect(): void {
    this.state.connection = "disconnected";
  }
}
