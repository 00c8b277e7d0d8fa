// Browser wiring. Everything stateful lives in EditorSession; this file just
// binds it to the DOM and keeps the canvases current.

import { ApiError, MotionApi } from "./api.js";
import { sampleJointCurve, JointCurve } from "./curves.js";
import { EditField, jointNames, skeletonEdges } from "./motion.js";
import { AttitudeChart, drawPreview } from "./render.js";
import { EditorSession } from "./session.js";
import { consumeSimStream } from "./simstream.js";
import { drawCurve, drawTimeline, hitTestMarker, xToTime } from "./timeline.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

const ui = {
  name: el<HTMLInputElement>("motion-name"),
  load: el<HTMLButtonElement>("load-btn"),
  banner: el<HTMLDivElement>("banner"),
  skeleton: el<HTMLCanvasElement>("skeleton-canvas"),
  timeline: el<HTMLCanvasElement>("timeline-canvas"),
  curve: el<HTMLCanvasElement>("curve-canvas"),
  attitude: el<HTMLCanvasElement>("attitude-canvas"),
  kfLabel: el<HTMLSpanElement>("kf-label"),
  joint: el<HTMLSelectElement>("joint-select"),
  field: el<HTMLSelectElement>("field-select"),
  value: el<HTMLInputElement>("value-input"),
  apply: el<HTMLButtonElement>("apply-btn"),
  save: el<HTMLButtonElement>("save-btn"),
  play: el<HTMLButtonElement>("play-btn"),
  seed: el<HTMLInputElement>("seed-input"),
  conflict: el<HTMLDivElement>("conflict-dialog"),
  conflictMsg: el<HTMLDivElement>("conflict-msg"),
  reload: el<HTMLButtonElement>("reload-btn"),
  keepMine: el<HTMLButtonElement>("overwrite-btn"),
};

const api = new MotionApi("");
let session: EditorSession | null = null;
let edges: [string, string][] = [];
let joints: string[] = [];
let curve: JointCurve | null = null;
let previewInFlight = false;
let previewQueued = false;
const chart = new AttitudeChart();

function banner(text: string, kind: "info" | "error" = "info"): void {
  ui.banner.textContent = text;
  ui.banner.className = kind;
  ui.banner.style.display = text.length > 0 ? "block" : "none";
}

function refreshControls(): void {
  const s = session;
  const ready = s !== null;
  ui.apply.disabled = !ready;
  ui.save.disabled = !ready || !s!.dirty;
  // Sim playback only sees stored documents, so it stays off while dirty.
  ui.play.disabled = !ready || s!.dirty;
  if (ready) {
    ui.kfLabel.textContent = `keyframe ${s!.selected} @ t=${s!.motion.keyframes[s!.selected].t}`;
  }
}

function drawTimelineNow(): void {
  if (session === null) return;
  const ctx = ui.timeline.getContext("2d")!;
  drawTimeline(
    ctx,
    {
      knots: session.motion.keyframes.map((kf) => kf.t),
      duration: session.duration,
      cursor: session.cursor,
      selected: session.selected,
    },
    ui.timeline.width,
    ui.timeline.height,
  );
}

function drawCurveNow(): void {
  if (session === null || curve === null) return;
  const jointIndex = ui.joint.selectedIndex;
  const ctx = ui.curve.getContext("2d")!;
  drawCurve(
    ctx,
    curve,
    session.motion.keyframes.map((kf) => kf.t),
    session.motion.keyframes.map((kf) => kf.pos[jointIndex]),
    session.cursor,
    ui.curve.width,
    ui.curve.height,
  );
}

/** Latest-wins preview: at most one request in flight, one queued behind it. */
async function refreshPreview(): Promise<void> {
  if (session === null) return;
  if (previewInFlight) {
    previewQueued = true;
    return;
  }
  previewInFlight = true;
  try {
    const resp = await session.previewAtCursor();
    const ctx = ui.skeleton.getContext("2d")!;
    drawPreview(ctx, resp, edges, ui.skeleton.width, ui.skeleton.height);
  } catch (e) {
    banner(String(e), "error");
  } finally {
    previewInFlight = false;
    if (previewQueued) {
      previewQueued = false;
      void refreshPreview();
    }
  }
}

async function resampleCurve(): Promise<void> {
  if (session === null) return;
  curve = await sampleJointCurve(api, session.motion, ui.joint.selectedIndex);
  drawCurveNow();
}

function showCurrentValue(): void {
  if (session === null) return;
  const kf = session.motion.keyframes[session.selected];
  const j = ui.joint.selectedIndex;
  switch (ui.field.value as EditField) {
    case "t":
      ui.value.value = String(kf.t);
      break;
    case "pos":
      ui.value.value = String(kf.pos[j]);
      break;
    case "vel":
      ui.value.value = String(kf.vel[j]);
      break;
    case "eff":
      ui.value.value = String(kf.eff[j]);
      break;
    case "sup.l":
      ui.value.value = String(kf.sup.l);
      break;
    case "sup.r":
      ui.value.value = String(kf.sup.r);
      break;
  }
}

async function loadMotion(): Promise<void> {
  banner("");
  try {
    session = await EditorSession.load(api, ui.name.value.trim());
  } catch (e) {
    session = null;
    if (e instanceof ApiError && e.status === 404) {
      banner(`no such motion: ${ui.name.value.trim()}`, "error");
    } else {
      banner(String(e), "error");
    }
    refreshControls();
    return;
  }
  edges = skeletonEdges(session.model);
  joints = jointNames(session.model);
  ui.joint.innerHTML = "";
  for (const name of joints) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    ui.joint.appendChild(opt);
  }
  chart.reset();
  showCurrentValue();
  refreshControls();
  drawTimelineNow();
  await Promise.all([refreshPreview(), resampleCurve()]);
}

function applyEditFromForm(): void {
  if (session === null) return;
  const err = session.edit({
    index: session.selected,
    field: ui.field.value as EditField,
    value: Number(ui.value.value),
    joint: ui.joint.selectedIndex,
  });
  if (err !== null) {
    banner(err, "error");
    return;
  }
  banner("");
  refreshControls();
  drawTimelineNow();
  void refreshPreview();
  void resampleCurve();
}

async function saveMotion(): Promise<void> {
  if (session === null) return;
  try {
    const result = await session.save();
    if (result === "saved") {
      banner("saved");
      refreshControls();
      return;
    }
    // Stale write: someone else edited the motion. Offer both ways out and
    // show the server's words, not ours.
    ui.conflictMsg.textContent = result.detail;
    ui.conflict.style.display = "block";
  } catch (e) {
    banner(String(e), "error"); // 422 text verbatim via ApiError.message
  }
}

async function playInSim(): Promise<void> {
  if (session === null || session.dirty) return;
  banner("");
  chart.reset();
  ui.play.disabled = true;
  const attitudeCtx = ui.attitude.getContext("2d")!;
  try {
    const playback = await consumeSimStream(
      session.simulate(Number(ui.seed.value) || 0),
      (row) => {
        chart.push(row.t, row.estPitch, row.estRoll);
        chart.draw(attitudeCtx, ui.attitude.width, ui.attitude.height);
        session!.setCursor(Math.min(row.t, session!.duration));
        drawTimelineNow();
        void refreshPreview();
      },
    );
    if (playback.partial) {
      banner(`stream interrupted after ${playback.rows.length} ticks; showing partial run`, "error");
    } else {
      banner(`run complete: ${playback.rows.length} ticks`);
    }
  } finally {
    ui.play.disabled = session.dirty;
    refreshControls();
  }
}

ui.load.addEventListener("click", () => void loadMotion());
ui.apply.addEventListener("click", applyEditFromForm);
ui.save.addEventListener("click", () => void saveMotion());
ui.play.addEventListener("click", () => void playInSim());
ui.joint.addEventListener("change", () => {
  showCurrentValue();
  void resampleCurve();
});
ui.field.addEventListener("change", showCurrentValue);

ui.timeline.addEventListener("pointerdown", (ev) => {
  if (session === null) return;
  const rect = ui.timeline.getBoundingClientRect();
  const x = ((ev.clientX - rect.left) / rect.width) * ui.timeline.width;
  const knots = session.motion.keyframes.map((kf) => kf.t);
  const hit = hitTestMarker(x, knots, session.duration, ui.timeline.width);
  if (hit >= 0) {
    session.selectKeyframe(hit);
    session.setCursor(knots[hit]);
    showCurrentValue();
  } else {
    session.setCursor(xToTime(x, session.duration, ui.timeline.width));
  }
  refreshControls();
  drawTimelineNow();
  drawCurveNow();
  void refreshPreview();
});

ui.reload.addEventListener("click", () => {
  ui.conflict.style.display = "none";
  if (session === null) return;
  void session.reloadFromServer().then(() => {
    banner("reloaded server version; local edits dropped");
    showCurrentValue();
    refreshControls();
    drawTimelineNow();
    void refreshPreview();
    void resampleCurve();
  });
});

ui.keepMine.addEventListener("click", () => {
  ui.conflict.style.display = "none";
  if (session === null) return;
  void session.overwrite().then(() => {
    banner("overwrote server version");
    refreshControls();
  });
});
