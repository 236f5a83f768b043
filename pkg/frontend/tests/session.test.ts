import { describe, expect, it } from "vitest";

import type { FrameAnnotation, JointRecord } from "../src/api.js";
import { canvasToNative, fitTransform } from "../src/coords.js";
import { AnnotationSession } from "../src/session.js";

const JOINTS = ["RS", "RE", "RW", "LS", "LE", "LW", "RH", "RK", "RA", "LH", "LK", "LA"];
const NATIVE_W = 640;
const NATIVE_H = 480;

/** The service's PUT validation rules, mirrored for schema checks. */
function assertSchemaValid(records: JointRecord[]): void {
  expect(records.length).toBeGreaterThanOrEqual(1);
  const seen = new Set<string>();
  for (const rec of records) {
    expect(JOINTS).toContain(rec.name);
    expect(seen.has(rec.name)).toBe(false);
    seen.add(rec.name);
    if (rec.visible) {
      expect(typeof rec.x).toBe("number");
      expect(typeof rec.y).toBe("number");
      expect(rec.x!).toBeGreaterThanOrEqual(0);
      expect(rec.x!).toBeLessThan(NATIVE_W);
      expect(rec.y!).toBeGreaterThanOrEqual(0);
      expect(rec.y!).toBeLessThan(NATIVE_H);
    }
  }
}

/** What the service would return from GET after storing `records`. */
function serverEcho(frameIndex: number, records: JointRecord[]): FrameAnnotation {
  const byName = new Map(records.map((r) => [r.name, r]));
  return {
    frame_index: frameIndex,
    joints: JOINTS.map((name) => {
      const rec = byName.get(name);
      if (rec && rec.visible) return { name, x: rec.x, y: rec.y, visible: true };
      return { name, x: null, y: null, visible: false };
    }),
  };
}

function newSession(frames: number[] = [0, 5, 10, 15]): AnnotationSession {
  return new AnnotationSession("vid0", JOINTS, frames);
}

describe("click-through labeling", () => {
  it("advances through the 12 joints in skeleton order", () => {
    const s = newSession();
    expect(s.activeJoint()).toBe("RS");
    s.place(10, 10);
    expect(s.activeJoint()).toBe("RE");
    s.place(20, 20);
    expect(s.activeJoint()).toBe("RW");
  });

  it("reports the frame complete after 12 actions including one skip", () => {
    const s = newSession();
    let actions = 0;
    for (const joint of JOINTS) {
      expect(s.complete()).toBe(false);
      if (joint === "RW") {
        expect(s.skip()).toBe("RW");
      } else {
        expect(s.place(100 + actions, 200 + actions)).toBe(joint);
      }
      actions++;
    }
    expect(actions).toBe(12);
    expect(s.complete()).toBe(true);
    expect(s.activeJoint()).toBeNull();
    expect(s.place(1, 1)).toBeNull();
  });

  it("skip stores visible=false and advances to the next joint", () => {
    const s = newSession();
    s.place(1, 1);
    s.place(2, 2);
    expect(s.activeJoint()).toBe("RW");
    s.skip();
    expect(s.labelOf("RW")).toEqual({ kind: "skipped" });
    expect(s.activeJoint()).toBe("LS");
  });

  it("sets the unsaved flag on any labeling action", () => {
    const s = newSession();
    expect(s.dirty).toBe(false);
    s.place(5, 5);
    expect(s.dirty).toBe(true);
    s.markSaved();
    expect(s.dirty).toBe(false);
    s.skip();
    expect(s.dirty).toBe(true);
  });

  it("lets a joint be redone via explicit selection", () => {
    const s = newSession();
    s.place(10, 10);
    s.place(20, 20);
    s.selectJoint("RS");
    expect(s.activeJoint()).toBe("RS");
    s.place(11, 12);
    expect(s.labelOf("RS")).toEqual({ kind: "placed", x: 11, y: 12 });
    expect(s.activeJoint()).toBe("RW");
  });
});

describe("annotation round trip", () => {
  it("12 canvas clicks with one skip survive save and reload within 1 native px", () => {
    const transform = fitTransform(NATIVE_W, NATIVE_H, 960, 720);
    const s = newSession();
    const clicked = new Map<string, { x: number; y: number }>();
    JOINTS.forEach((joint, i) => {
      if (joint === "LW") {
        s.skip();
        return;
      }
      const canvasPoint = { x: 120 + 60 * (i % 4), y: 90 + 55 * Math.floor(i / 4) };
      const native = canvasToNative(canvasPoint.x, canvasPoint.y, transform);
      clicked.set(joint, native);
      s.place(native.x, native.y);
    });
    expect(s.complete()).toBe(true);

    const payload = s.payload();
    assertSchemaValid(payload);
    expect(payload).toHaveLength(12);
    expect(payload.filter((r) => !r.visible).map((r) => r.name)).toEqual(["LW"]);

    const reloaded = newSession();
    reloaded.loadExisting(serverEcho(0, payload));
    expect(reloaded.dirty).toBe(false);
    for (const [joint, native] of clicked) {
      const label = reloaded.labelOf(joint);
      expect(label?.kind).toBe("placed");
      if (label?.kind === "placed") {
        expect(Math.abs(label.x - native.x)).toBeLessThan(1);
        expect(Math.abs(label.y - native.y)).toBeLessThan(1);
      }
    }
    expect(reloaded.labelOf("LW")).toEqual({ kind: "skipped" });
  });

  it("a fully skipped frame still produces a schema-valid 12-entry payload", () => {
    const s = newSession();
    for (let i = 0; i < 12; i++) s.skip();
    const payload = s.payload();
    assertSchemaValid(payload);
    expect(payload).toHaveLength(12);
    expect(payload.every((r) => !r.visible)).toBe(true);
  });

  it("a half-labeled frame sends only the labeled joints", () => {
    const s = newSession();
    s.place(10, 20);
    s.skip();
    const payload = s.payload();
    assertSchemaValid(payload);
    expect(payload.map((r) => r.name)).toEqual(["RS", "RE"]);
  });
});

describe("frame navigation", () => {
  it("visits only the cadence-filtered frame indices, in order", () => {
    const s = newSession([0, 5, 10, 15]);
    const visited = [s.frameIndex];
    while (s.step(1)) visited.push(s.frameIndex);
    expect(visited).toEqual([0, 5, 10, 15]);
    expect(visited.every((i) => i % 5 === 0)).toBe(true);
    expect(s.step(1)).toBe(false);
    while (s.step(-1)) visited.push(s.frameIndex);
    expect(s.frameIndex).toBe(0);
    expect(s.step(-1)).toBe(false);
  });

  it("clears per-frame state when moving between frames", () => {
    const s = newSession();
    s.place(30, 40);
    expect(s.dirty).toBe(true);
    s.step(1);
    expect(s.dirty).toBe(false);
    expect(s.labeledCount()).toBe(0);
    expect(s.activeJoint()).toBe("RS");
  });

  it("jumps only to labelable frames", () => {
    const s = newSession([0, 5, 10]);
    expect(s.goToFrame(10)).toBe(true);
    expect(s.frameIndex).toBe(10);
    expect(s.goToFrame(7)).toBe(false);
    expect(s.frameIndex).toBe(10);
  });
});

describe("stored annotations", () => {
  it("loads placed and skipped joints from a server record", () => {
    const s = newSession();
    const record = serverEcho(0, [
      { name: "RS", x: 320, y: 240, visible: true },
      { name: "RE", x: null, y: null, visible: false },
    ]);
    s.loadExisting(record);
    expect(s.labelOf("RS")).toEqual({ kind: "placed", x: 320, y: 240 });
    expect(s.labelOf("RE")).toEqual({ kind: "skipped" });
    expect(s.complete()).toBe(true);
    expect(s.dirty).toBe(false);
  });

  it("treats a missing record as an unlabeled frame", () => {
    const s = newSession();
    s.loadExisting(undefined);
    expect(s.labeledCount()).toBe(0);
    expect(s.activeJoint()).toBe("RS");
  });
});
