import { describe, expect, it } from "vitest";

import { sampleTimes } from "../src/curves.js";
import {
  MotionDoc,
  ModelDoc,
  applyEdit,
  checkEdit,
  cloneMotion,
  jointNames,
  motionDuration,
  motionsEqual,
  skeletonEdges,
} from "../src/motion.js";
import { projectPoint } from "../src/render.js";
import { consumeSimStream, parseRow } from "../src/simstream.js";
import { hitTestMarker, markerPositions, timeToX, xToTime } from "../src/timeline.js";

const model: ModelDoc = {
  schema_version: 1,
  name: "toy",
  links: [
    { name: "base", parent: null, axis: null, origin: [0, 0, 0], mass: 1, com: [0, 0, 0], inertia: [0, 0, 0, 0, 0, 0], limits: null },
    { name: "j1", parent: "base", axis: [0, 1, 0], origin: [0, 0, 0.1], mass: 0.5, com: [0, 0, 0], inertia: [0, 0, 0, 0, 0, 0], limits: [-1, 1] },
    { name: "tip", parent: "j1", axis: null, origin: [0, 0, 0.1], mass: 0.1, com: [0, 0, 0], inertia: [0, 0, 0, 0, 0, 0], limits: null },
    { name: "j2", parent: "base", axis: [1, 0, 0], origin: [0, 0.05, 0], mass: 0.5, com: [0, 0, 0], inertia: [0, 0, 0, 0, 0, 0], limits: [-1, 1] },
  ],
};

function toyMotion(): MotionDoc {
  return {
    name: "toy",
    keyframes: [
      { t: 0, pos: [0, 0], vel: [0, 0], eff: [1, 1], sup: { l: 1, r: 1 } },
      { t: 1, pos: [0.5, -0.2], vel: [0, 0], eff: [1, 0.5], sup: { l: 1, r: 0 } },
      { t: 2.5, pos: [0, 0], vel: [0, 0], eff: [1, 1], sup: { l: 1, r: 1 } },
    ],
    pid: {
      pitch: { enabled: false, p: 0, i: 0, d: 0 },
      roll: { enabled: false, p: 0, i: 0, d: 0 },
      i_clamp: 0,
      joint_gain_map: [0, 0],
    },
  };
}

describe("model helpers", () => {
  it("lists axis-bearing links as joints, in model order", () => {
    expect(jointNames(model)).toEqual(["j1", "j2"]);
  });

  it("collects parent-child edges for every non-root link", () => {
    expect(skeletonEdges(model)).toEqual([
      ["base", "j1"],
      ["j1", "tip"],
      ["base", "j2"],
    ]);
  });
});

describe("edit validation", () => {
  it("accepts an in-range position edit and applies it", () => {
    const doc = toyMotion();
    const edit = { index: 1, field: "pos" as const, value: 0.37, joint: 0 };
    expect(checkEdit(doc, edit)).toBeNull();
    applyEdit(doc, edit);
    expect(doc.keyframes[1].pos[0]).toBe(0.37);
    expect(doc.keyframes[1].pos[1]).toBe(-0.2); // untouched
  });

  it("rejects efforts outside [0, 1]", () => {
    const doc = toyMotion();
    expect(checkEdit(doc, { index: 0, field: "eff", value: 1.2, joint: 0 })).toMatch(/\[0, 1\]/);
    expect(checkEdit(doc, { index: 0, field: "eff", value: -0.01, joint: 1 })).toMatch(/\[0, 1\]/);
    expect(checkEdit(doc, { index: 0, field: "eff", value: 1.0, joint: 0 })).toBeNull();
  });

  it("rejects support weights outside [0, 1]", () => {
    const doc = toyMotion();
    expect(checkEdit(doc, { index: 2, field: "sup.l", value: 2 })).toMatch(/\[0, 1\]/);
    expect(checkEdit(doc, { index: 2, field: "sup.r", value: 0.5 })).toBeNull();
  });

  it("keeps keyframe times strictly ordered and non-negative", () => {
    const doc = toyMotion();
    expect(checkEdit(doc, { index: 1, field: "t", value: 0 })).toMatch(/between/);
    expect(checkEdit(doc, { index: 1, field: "t", value: 2.5 })).toMatch(/between/);
    expect(checkEdit(doc, { index: 0, field: "t", value: -0.1 })).toMatch(/>= 0/);
    expect(checkEdit(doc, { index: 1, field: "t", value: 1.9 })).toBeNull();
  });

  it("rejects non-finite values and bad indices", () => {
    const doc = toyMotion();
    expect(checkEdit(doc, { index: 0, field: "pos", value: NaN, joint: 0 })).toMatch(/finite/);
    expect(checkEdit(doc, { index: 0, field: "vel", value: Infinity, joint: 1 })).toMatch(/finite/);
    expect(checkEdit(doc, { index: 9, field: "t", value: 3 })).toMatch(/out of range/);
    expect(checkEdit(doc, { index: 0, field: "pos", value: 0.1 })).toMatch(/joint index/);
    expect(checkEdit(doc, { index: 0, field: "pos", value: 0.1, joint: 2 })).toMatch(/joint index/);
  });

  it("clone is independent and equality tracks content", () => {
    const doc = toyMotion();
    const copy = cloneMotion(doc);
    expect(motionsEqual(doc, copy)).toBe(true);
    copy.keyframes[0].pos[0] = 0.9;
    expect(motionsEqual(doc, copy)).toBe(false);
    expect(doc.keyframes[0].pos[0]).toBe(0);
    expect(motionDuration(doc)).toBe(2.5);
  });
});

describe("curve sample grid", () => {
  it("has (k-1)*n + 1 points and hits every knot exactly", () => {
    const knots = [0, 1, 2.5];
    const times = sampleTimes(knots, 50);
    expect(times).toHaveLength(101);
    expect(times[0]).toBe(0);
    expect(times[50]).toBe(1);
    expect(times[100]).toBe(2.5);
    for (let i = 1; i < times.length; i++) {
      expect(times[i]).toBeGreaterThan(times[i - 1]);
    }
  });
});

describe("timeline layout", () => {
  it("maps time to x and back across the padded span", () => {
    for (const t of [0, 0.31, 2.5]) {
      const x = timeToX(t, 2.5, 560);
      expect(xToTime(x, 2.5, 560)).toBeCloseTo(t, 9);
    }
    expect(xToTime(-50, 2.5, 560)).toBe(0);
    expect(xToTime(9999, 2.5, 560)).toBe(2.5);
  });

  it("hit tests markers within a pixel radius", () => {
    const knots = [0, 1, 2.5];
    const xs = markerPositions(knots, 2.5, 560);
    expect(xs).toHaveLength(3);
    expect(hitTestMarker(xs[1] + 3, knots, 2.5, 560)).toBe(1);
    expect(hitTestMarker(xs[1] + 30, knots, 2.5, 560)).toBe(-1);
  });
});

describe("display projection", () => {
  it("keeps the origin fixed and moves +z up, +y across", () => {
    const [cx, cy] = projectPoint([0, 0, 0], 400, 400);
    const [, upY] = projectPoint([0, 0, 0.3], 400, 400);
    const [sideX] = projectPoint([0, 0.3, 0], 400, 400);
    expect(cx).toBe(200);
    expect(upY).toBeLessThan(cy); // canvas y grows downward
    expect(sideX).not.toBe(cx);
  });
});

describe("sim stream parsing", () => {
  const header = "t,truth_pitch,truth_roll,est_pitch,est_roll,phase,target_j1";

  it("maps row values by header name", () => {
    const row = parseRow(header.split(","), "0.01,0.1,-0.2,0.09,-0.19,1.5,0.3");
    expect(row.t).toBe(0.01);
    expect(row.estPitch).toBe(0.09);
    expect(row.estRoll).toBe(-0.19);
    expect(row.values.target_j1).toBe(0.3);
  });

  it("rejects ragged rows", () => {
    expect(() => parseRow(header.split(","), "1,2,3")).toThrow(/fields/);
  });

  it("reassembles rows across arbitrary chunk boundaries", async () => {
    const text = `# rng=x seed=3 scenario=s\n${header}\n` + "0,0,0,0,0,0,0\n0.01,1,2,3,4,5,6\n";
    async function* chunks() {
      // Split mid-line on purpose.
      for (let i = 0; i < text.length; i += 7) yield text.slice(i, i + 7);
    }
    const seen: number[] = [];
    const playback = await consumeSimStream(chunks(), (row) => seen.push(row.t));
    expect(playback.partial).toBe(false);
    expect(playback.comment).toContain("seed=3");
    expect(playback.header).toEqual(header.split(","));
    expect(playback.rows).toHaveLength(2);
    expect(seen).toEqual([0, 0.01]);
    expect(playback.text).toBe(text);
  });

  it("flags a stream that dies mid-run and keeps the rows so far", async () => {
    const head = `# c\n${header}\n0,0,0,0,0,0,0\n0.01,0,0,0,0,0,0\n`;
    async function* broken() {
      yield head;
      yield "0.02,0,0,";
      throw new Error("connection reset");
    }
    const playback = await consumeSimStream(broken());
    expect(playback.partial).toBe(true);
    expect(playback.rows).toHaveLength(2);
  });

  it("flags truncation when the log does not end in a newline", async () => {
    async function* truncated() {
      yield `# c\n${header}\n0,0,0,0,0,0,0\n0.01,0,0`;
    }
    const playback = await consumeSimStream(truncated());
    expect(playback.partial).toBe(true);
    expect(playback.rows).toHaveLength(1);
  });
});
