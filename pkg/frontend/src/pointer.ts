/**
 * Pointer capture: normalizes raw pointer samples to the capture
 * surface, throttles to at most 60 frames/s without ever reordering,
 * and buffers up to one second of frames while disconnected (anything
 * older is dropped and counted).
 */

import { ptr } from "./protocol.js";

export const MAX_POINTER_HZ = 60;
const MIN_INTERVAL_MS = 1000 / MAX_POINTER_HZ;

export class PointerThrottle {
  private lastEmitMs = -Infinity;
  private lastTMs = -Infinity;

  /**
   * Offer one raw sample; returns a PTR frame when it passes the
   * throttle, null otherwise. Coordinates clamp to [0, 1]; samples with
   * non-increasing timestamps are ignored (monotonicity is preserved
   * end to end).
   */
  offer(tMs: number, x: number, y: number): string | null {
    if (!Number.isFinite(tMs) || tMs <= this.lastTMs) return null;
    this.lastTMs = tMs;
    if (tMs - this.lastEmitMs < MIN_INTERVAL_MS) return null;
    this.lastEmitMs = tMs;
    const cx = Math.min(1, Math.max(0, x));
    const cy = Math.min(1, Math.max(0, y));
    return ptr(tMs, cx, cy);
  }
}

export class OutboundBuffer {
  private queue: { tMs: number; frame: string }[] = [];
  droppedWhileDisconnected = 0;

  constructor(readonly maxAgeMs = 1000) {}

  /** Queue a frame while disconnected; stale frames fall off the front. */
  push(tMs: number, frame: string): void {
    this.queue.push({ tMs, frame });
    this.expire(tMs);
  }

  expire(nowMs: number): void {
    while (this.queue.length && nowMs - this.queue[0].tMs > this.maxAgeMs) {
      this.queue.shift();
      this.droppedWhileDisconnected++;
    }
  }

  /** Drain everything still fresh, in order. */
  drain(): string[] {
    const frames = this.queue.map((q) => q.frame);
    this.queue = [];
    return frames;
  }

  get size(): number {
    return this.queue.length;
  }
}
