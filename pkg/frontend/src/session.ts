/** Per-frame annotation state: which joint is up next, what has been
 * placed or skipped, and whether anything is unsaved. */

import type { FrameAnnotation, JointRecord } from "./api.js";

export type JointLabel =
  | { kind: "placed"; x: number; y: number }
  | { kind: "skipped" };

export class AnnotationSession {
  readonly videoId: string;
  /** Labelable frame indices in ascending order, as served by /videos. */
  readonly frameIndices: number[];
  /** Joint names in skeleton order; the click-through order. */
  readonly joints: string[];

  private cursor: number;
  private labels = new Map<string, JointLabel>();
  private pointerOverride: string | null = null;
  private unsaved = false;

  constructor(videoId: string, joints: string[], frameIndices: number[]) {
    if (joints.length === 0) throw new Error("skeleton has no joints");
    if (frameIndices.length === 0) throw new Error("video has no labelable frames");
    this.videoId = videoId;
    this.joints = [...joints];
    this.frameIndices = [...frameIndices].sort((a, b) => a - b);
    this.cursor = 0;
  }

  get frameIndex(): number {
    return this.frameIndices[this.cursor]!;
  }

  get dirty(): boolean {
    return this.unsaved;
  }

  /** Joint the next click will label: an explicit selection if one is
   * active, otherwise the first joint in order without a label. */
  activeJoint(): string | null {
    if (this.pointerOverride !== null) return this.pointerOverride;
    for (const name of this.joints) {
      if (!this.labels.has(name)) return name;
    }
    return null;
  }

  /** Point the next click at a specific joint, e.g. to redo it. */
  selectJoint(name: string): void {
    if (!this.joints.includes(name)) throw new Error(`unknown joint ${name}`);
    this.pointerOverride = name;
  }

  labelOf(name: string): JointLabel | undefined {
    return this.labels.get(name);
  }

  labeledCount(): number {
    return this.labels.size;
  }

  /** True once every joint is placed or skipped. */
  complete(): boolean {
    return this.labels.size === this.joints.length;
  }

  /** Label the active joint at native-resolution coordinates. Returns the
   * joint that was labeled, or null when the frame is already complete. */
  place(x: number, y: number): string | null {
    const joint = this.activeJoint();
    if (joint === null) return null;
    this.labels.set(joint, { kind: "placed", x, y });
    this.pointerOverride = null;
    this.unsaved = true;
    return joint;
  }

  /** Mark the active joint not visible and advance. */
  skip(): string | null {
    const joint = this.activeJoint();
    if (joint === null) return null;
    this.labels.set(joint, { kind: "skipped" });
    this.pointerOverride = null;
    this.unsaved = true;
    return joint;
  }

  /** Forget one joint's label so it can be redone. */
  clearJoint(name: string): void {
    if (this.labels.delete(name)) this.unsaved = true;
  }

  /** PUT body for the current frame; only labeled joints are sent, the
   * server stores every unlisted joint as not visible. */
  payload(): JointRecord[] {
    const records: JointRecord[] = [];
    for (const name of this.joints) {
      const label = this.labels.get(name);
      if (label === undefined) continue;
      if (label.kind === "placed") {
        records.push({ name, x: label.x, y: label.y, visible: true });
      } else {
        records.push({ name, x: null, y: null, visible: false });
      }
    }
    return records;
  }

  markSaved(): void {
    this.unsaved = false;
  }

  /** Replace the frame's state with a stored annotation (after GET). */
  loadExisting(frame: FrameAnnotation | undefined): void {
    this.labels.clear();
    this.pointerOverride = null;
    this.unsaved = false;
    if (frame === undefined) return;
    for (const joint of frame.joints) {
      if (!this.joints.includes(joint.name)) continue;
      if (joint.visible && joint.x !== null && joint.y !== null) {
        this.labels.set(joint.name, { kind: "placed", x: joint.x, y: joint.y });
      } else {
        this.labels.set(joint.name, { kind: "skipped" });
      }
    }
  }

  /** Move to the adjacent labelable frame. The caller is responsible for
   * confirming or saving unsaved work first. Returns false at the ends. */
  step(direction: 1 | -1): boolean {
    const next = this.cursor + direction;
    if (next < 0 || next >= this.frameIndices.length) return false;
    this.cursor = next;
    this.labels.clear();
    this.pointerOverride = null;
    this.unsaved = false;
    return true;
  }

  /** Jump to a specific labelable frame index. */
  goToFrame(frameIndex: number): boolean {
    const pos = this.frameIndices.indexOf(frameIndex);
    if (pos < 0) return false;
    this.cursor = pos;
    this.labels.clear();
    this.pointerOverride = null;
    this.unsaved = false;
    return true;
  }
}
