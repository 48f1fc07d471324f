/**
 * Binary mask layer backed by a Uint8Array (255 = hole, 0 = known).
 * Pure data + geometry; rendering lives elsewhere.
 */

export type BrushMode = "draw" | "erase";

export interface Point {
  x: number;
  y: number;
}

export class MaskBuffer {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, data?: Uint8Array) {
    if (!Number.isInteger(width) || !Number.isInteger(height) ||
        width <= 0 || height <= 0) {
      throw new Error(`invalid mask size ${width}x${height}`);
    }
    if (data !== undefined && data.length !== width * height) {
      throw new Error(
        `mask data length ${data.length} != ${width}x${height}`);
    }
    this.width = width;
    this.height = height;
    this.data = data ? data.slice() : new Uint8Array(width * height);
  }

  clone(): MaskBuffer {
    return new MaskBuffer(this.width, this.height, this.data);
  }

  clear(): void {
    this.data.fill(0);
  }

  equals(other: MaskBuffer): boolean {
    if (other.width !== this.width || other.height !== this.height) {
      return false;
    }
    for (let i = 0; i < this.data.length; i++) {
      if (this.data[i] !== other.data[i]) return false;
    }
    return true;
  }

  holePixelCount(): number {
    let n = 0;
    for (let i = 0; i < this.data.length; i++) {
      if (this.data[i] !== 0) n++;
    }
    return n;
  }

  isEmpty(): boolean {
    return this.holePixelCount() === 0;
  }

  /** Stamp one disc. Pixels whose center lies within `radius` flip. */
  stampDisc(center: Point, radius: number, mode: BrushMode = "draw"): void {
    const value = mode === "draw" ? 255 : 0;
    const r2 = radius * radius;
    const y0 = Math.max(Math.floor(center.y - radius), 0);
    const y1 = Math.min(Math.ceil(center.y + radius), this.height - 1);
    const x0 = Math.max(Math.floor(center.x - radius), 0);
    const x1 = Math.min(Math.ceil(center.x + radius), this.width - 1);
    for (let y = y0; y <= y1; y++) {
      const dy = y - center.y;
      for (let x = x0; x <= x1; x++) {
        const dx = x - center.x;
        if (dx * dx + dy * dy <= r2) {
          this.data[y * this.width + x] = value;
        }
      }
    }
  }

  /** Stamp discs along a polyline path, densely enough to leave no gaps. */
  stampPath(path: Point[], radius: number, mode: BrushMode = "draw"): void {
    if (path.length === 0) return;
    this.stampDisc(path[0], radius, mode);
    for (let i = 1; i < path.length; i++) {
      const a = path[i - 1];
      const b = path[i];
      const length = Math.hypot(b.x - a.x, b.y - a.y);
      const steps = Math.max(1, Math.ceil(length));
      for (let s = 1; s <= steps; s++) {
        const t = s / steps;
        this.stampDisc({ x: a.x + (b.x - a.x) * t, y: a.y + (b.y - a.y) * t },
                       radius, mode);
      }
    }
  }
}
