/** Canvas drawing for the annotation view: contrast-stretched depth frame,
 * joint markers in limb colors, and connection lines between labeled pairs. */

import type { SkeletonInfo } from "./api.js";
import { nativeToCanvas, stretchToBytes, type ViewTransform } from "./coords.js";
import type { AnnotationSession } from "./session.js";

/** One CSS color per limb, matching the evaluation overlays. */
export const LIMB_COLORS: Record<string, string> = {
  "right-arm": "#ff3030",
  "left-arm": "#ffc800",
  "right-leg": "#00c850",
  "left-leg": "#3078ff",
};

const FALLBACK_COLOR = "#d0d0d0";

export function limbOf(joint: string, skeleton: SkeletonInfo): string | null {
  for (const [limb, names] of Object.entries(skeleton.limbs)) {
    if (names.includes(joint)) return limb;
  }
  return null;
}

export function jointColor(joint: string, skeleton: SkeletonInfo): string {
  const limb = limbOf(joint, skeleton);
  return (limb && LIMB_COLORS[limb]) || FALLBACK_COLOR;
}

export interface Segment {
  from: { x: number; y: number };
  to: { x: number; y: number };
  color: string;
}

/** Native-coordinate line segments for every connection whose two joints
 * are both placed on the current frame. */
export function connectionSegments(
  session: AnnotationSession,
  skeleton: SkeletonInfo,
): Segment[] {
  const segments: Segment[] = [];
  for (const [a, b] of skeleton.connections) {
    const la = session.labelOf(a);
    const lb = session.labelOf(b);
    if (la?.kind !== "placed" || lb?.kind !== "placed") continue;
    segments.push({
      from: { x: la.x, y: la.y },
      to: { x: lb.x, y: lb.y },
      color: jointColor(a, skeleton),
    });
  }
  return segments;
}

/** Stretch a decoded grayscale depth frame so its [2nd, 98th] percentile
 * window fills the display range. */
export function stretchImageData(data: ImageData): ImageData {
  const n = data.width * data.height;
  const gray = new Float64Array(n);
  for (let i = 0; i < n; i++) gray[i] = data.data[i * 4]!;
  const bytes = stretchToBytes(gray);
  const out = new ImageData(data.width, data.height);
  for (let i = 0; i < n; i++) {
    const v = bytes[i]!;
    out.data[i * 4] = v;
    out.data[i * 4 + 1] = v;
    out.data[i * 4 + 2] = v;
    out.data[i * 4 + 3] = 255;
  }
  return out;
}

export interface SceneOptions {
  image: CanvasImageSource;
  nativeW: number;
  nativeH: number;
  transform: ViewTransform;
  session: AnnotationSession;
  skeleton: SkeletonInfo;
}

export function drawScene(ctx: CanvasRenderingContext2D, opts: SceneOptions): void {
  const { image, nativeW, nativeH, transform, session, skeleton } = opts;
  ctx.fillStyle = "#181818";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.drawImage(
    image,
    transform.offsetX,
    transform.offsetY,
    nativeW * transform.scale,
    nativeH * transform.scale,
  );

  ctx.lineWidth = 2;
  for (const seg of connectionSegments(session, skeleton)) {
    const a = nativeToCanvas(seg.from.x, seg.from.y, transform);
    const b = nativeToCanvas(seg.to.x, seg.to.y, transform);
    ctx.strokeStyle = seg.color;
    ctx.beginPath();
    ctx.moveTo(a.x, a.y);
    ctx.lineTo(b.x, b.y);
    ctx.stroke();
  }

  ctx.font = "12px sans-serif";
  ctx.textBaseline = "bottom";
  let skippedRow = 0;
  for (const name of session.joints) {
    const label = session.labelOf(name);
    if (label === undefined) continue;
    const color = jointColor(name, skeleton);
    if (label.kind === "placed") {
      const p = nativeToCanvas(label.x, label.y, transform);
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.arc(p.x, p.y, 4, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillText(name, p.x + 6, p.y - 2);
    } else {
      const y = 18 + 16 * skippedRow++;
      ctx.fillStyle = color;
      ctx.fillText(name, 8, y);
      const w = ctx.measureText(name).width;
      ctx.strokeStyle = color;
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.moveTo(8, y - 5);
      ctx.lineTo(8 + w, y - 5);
      ctx.stroke();
      ctx.lineWidth = 2;
    }
  }

  const active = session.activeJoint();
  ctx.fillStyle = "#ffffff";
  ctx.textBaseline = "top";
  ctx.fillText(active === null ? "frame complete" : `next: ${active}`, 8, 4);
}
