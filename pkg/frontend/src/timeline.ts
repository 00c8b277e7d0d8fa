// Timeline strip: keyframe markers on a time axis with a draggable playback
// cursor. Layout math is separated from drawing so it can be tested headless.

import type { JointCurve } from "./curves.js";

export const PAD_X = 12;

export function timeToX(t: number, duration: number, width: number): number {
  const span = Math.max(duration, 1e-9);
  return PAD_X + (t / span) * (width - 2 * PAD_X);
}

export function xToTime(x: number, duration: number, width: number): number {
  const span = width - 2 * PAD_X;
  const t = ((x - PAD_X) / span) * duration;
  return Math.min(Math.max(t, 0), duration);
}

export function markerPositions(
  knots: number[],
  duration: number,
  width: number,
): number[] {
  return knots.map((t) => timeToX(t, duration, width));
}

/** Index of the marker within `radius` px of x, or -1. */
export function hitTestMarker(
  x: number,
  knots: number[],
  duration: number,
  width: number,
  radius = 7,
): number {
  let best = -1;
  let bestDist = radius;
  knots.forEach((t, i) => {
    const d = Math.abs(timeToX(t, duration, width) - x);
    if (d <= bestDist) {
      best = i;
      bestDist = d;
    }
  });
  return best;
}

export interface TimelineState {
  knots: number[];
  duration: number;
  cursor: number;
  selected: number;
}

export function drawTimeline(
  ctx: CanvasRenderingContext2D,
  state: TimelineState,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const midY = height / 2;

  ctx.strokeStyle = "#555";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(PAD_X, midY);
  ctx.lineTo(width - PAD_X, midY);
  ctx.stroke();

  state.knots.forEach((t, i) => {
    const x = timeToX(t, state.duration, width);
    ctx.fillStyle = i === state.selected ? "#ffcc00" : "#8ab4f8";
    ctx.beginPath();
    ctx.arc(x, midY, 6, 0, Math.PI * 2);
    ctx.fill();
  });

  const cx = timeToX(state.cursor, state.duration, width);
  ctx.strokeStyle = "#fff";
  ctx.beginPath();
  ctx.moveTo(cx, 4);
  ctx.lineTo(cx, height - 4);
  ctx.stroke();
}

/** Plots a sampled joint curve with its knots; y autoscaled with a margin. */
export function drawCurve(
  ctx: CanvasRenderingContext2D,
  curve: JointCurve,
  knotTimes: number[],
  knotValues: number[],
  cursor: number,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  if (curve.t.length === 0) return;
  const duration = curve.t[curve.t.length - 1];
  let lo = Math.min(...curve.q);
  let hi = Math.max(...curve.q);
  if (hi - lo < 1e-6) {
    lo -= 0.1;
    hi += 0.1;
  }
  const margin = 0.08 * (hi - lo);
  lo -= margin;
  hi += margin;
  const toY = (q: number) => height - ((q - lo) / (hi - lo)) * height;

  ctx.strokeStyle = "#8ab4f8";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  curve.t.forEach((t, i) => {
    const x = timeToX(t, duration, width);
    const y = toY(curve.q[i]);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();

  ctx.fillStyle = "#ffcc00";
  knotTimes.forEach((t, i) => {
    ctx.beginPath();
    ctx.arc(timeToX(t, duration, width), toY(knotValues[i]), 3.5, 0, Math.PI * 2);
    ctx.fill();
  });

  const cx = timeToX(cursor, duration, width);
  ctx.strokeStyle = "#ffffff66";
  ctx.beginPath();
  ctx.moveTo(cx, 0);
  ctx.lineTo(cx, height);
  ctx.stroke();
}
