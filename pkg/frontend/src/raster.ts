/**
 * Rolling spike raster buffer: keeps the last windowSeconds of events,
 * positive polarity drawn above the axis, negative below. Eviction is
 * amortized O(1) per insert, so rendering cost stays bounded no matter
 * how long the session runs.
 */

export interface RasterPoint {
  tSeconds: number;
  polarity: number;
}

export class RasterBuffer {
  private points: RasterPoint[] = [];
  private head = 0; // index of the oldest live point

  constructor(
    readonly windowSeconds = 10,
    readonly tickRate = 125e6,
    readonly maxPoints = 50_000,
  ) {}

  addBatch(ticks: number[], polarities: number[]): void {
    for (let i = 0; i < ticks.length; i++) {
      this.points.push({ tSeconds: ticks[i] / this.tickRate, polarity: polarities[i] });
    }
    if (this.points.length) {
      this.evictBefore(this.points[this.points.length - 1].tSeconds - this.windowSeconds);
    }
    // hard cap: drop oldest beyond the point budget
    while (this.points.length - this.head > this.maxPoints) this.head++;
    this.compact();
  }

  /** Drop points older than tSeconds (e.g. latest - window). */
  evictBefore(tSeconds: number): void {
    while (this.head < this.points.length && this.points[this.head].tSeconds < tSeconds) {
      this.head++;
    }
    this.compact();
  }

  private compact(): void {
    if (this.head > 4096 || this.head === this.points.length) {
      this.points = this.points.slice(this.head);
      this.head = 0;
    }
  }

  clear(): void {
    this.points = [];
    this.head = 0;
  }

  get size(): number {
    return this.points.length - this.head;
  }

  /** Live points, oldest first. */
  live(): RasterPoint[] {
    return this.points.slice(this.head);
  }
}
