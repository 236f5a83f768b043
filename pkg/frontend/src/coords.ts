/** Coordinate mapping between the display canvas and native frame pixels,
 * plus the contrast stretch that makes raw depth visible on screen. */

export interface ViewTransform {
  /** Display pixels per native pixel. */
  scale: number;
  /** Canvas x of the native origin. */
  offsetX: number;
  /** Canvas y of the native origin. */
  offsetY: number;
}

export interface Point {
  x: number;
  y: number;
}

/**
 * Largest centered letterbox fit of a nativeW x nativeH image inside a
 * canvasW x canvasH canvas, preserving aspect ratio.
 */
export function fitTransform(
  nativeW: number,
  nativeH: number,
  canvasW: number,
  canvasH: number,
): ViewTransform {
  const scale = Math.min(canvasW / nativeW, canvasH / nativeH);
  return {
    scale,
    offsetX: (canvasW - nativeW * scale) / 2,
    offsetY: (canvasH - nativeH * scale) / 2,
  };
}

export function canvasToNative(x: number, y: number, t: ViewTransform): Point {
  return { x: (x - t.offsetX) / t.scale, y: (y - t.offsetY) / t.scale };
}

export function nativeToCanvas(x: number, y: number, t: ViewTransform): Point {
  return { x: x * t.scale + t.offsetX, y: y * t.scale + t.offsetY };
}

/** True when a native-coordinate point lies inside the frame bounds. */
export function insideFrame(p: Point, nativeW: number, nativeH: number): boolean {
  return p.x >= 0 && p.x < nativeW && p.y >= 0 && p.y < nativeH;
}

/**
 * Linear-interpolated percentile of an unsorted sample, p in [0, 100].
 */
export function percentile(values: ArrayLike<number>, p: number): number {
  if (values.length === 0) throw new Error("percentile of empty sample");
  const sorted = Array.from(values).sort((a, b) => a - b);
  const pos = (p / 100) * (sorted.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  const frac = pos - lo;
  return sorted[lo]! * (1 - frac) + sorted[hi]! * frac;
}

/**
 * Map raw intensities to display bytes by stretching the [2nd, 98th]
 * percentile window to [0, 255]. Values outside the window saturate.
 */
export function stretchToBytes(
  values: ArrayLike<number>,
  lowPct = 2,
  highPct = 98,
): Uint8ClampedArray {
  const low = percentile(values, lowPct);
  const high = percentile(values, highPct);
  const span = high - low;
  const out = new Uint8ClampedArray(values.length);
  for (let i = 0; i < values.length; i++) {
    out[i] = span <= 0 ? 128 : Math.round(((values[i]! - low) / span) * 255);
  }
  return out;
}
