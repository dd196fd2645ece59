/**
 * Mirror of the server's mock media player. The server is authoritative:
 * this state changes only by applying CTL frames, never locally.
 */

import type { ControlCommand } from "./protocol.js";

export interface PlayerState {
  readonly playing: boolean;
  readonly volume: number; // 0..100 step 25
  readonly muted: boolean;
  readonly position: number; // seconds
}

export const initialPlayerState: PlayerState = {
  playing: false,
  volume: 50,
  muted: false,
  position: 0,
};

export interface ApplyResult {
  state: PlayerState;
  /** set when the command was not understood; state is unchanged */
  warning?: string;
}

/** Fold one control command into the mirrored state (same table as the server). */
export function applyPlayerCommand(state: PlayerState, command: ControlCommand): ApplyResult {
  switch (command.op) {
    case "playpause":
      return { state: { ...state, playing: !state.playing } };
    case "seek":
      return { state: { ...state, position: Math.max(0, state.position + command.delta) } };
    case "vol":
      if (command.value % 25 !== 0) {
        return { state, warning: `volume ${command.value} is not a 25-step level` };
      }
      return { state: { ...state, volume: command.value } };
    case "mute":
      return { state: { ...state, muted: command.on } };
    default:
      return { state, warning: "unknown control" };
  }
}
