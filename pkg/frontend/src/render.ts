// Pose view: a wireframe skeleton drawn from the link transforms the service
// computed, plus a strip chart for the fused pitch/roll traces during
// simulated playback. No kinematics happen on this side of the wire; the
// only math here is the fixed display projection.

import type { PreviewResponse, TransformDoc } from "./motion.js";

const AZIMUTH = Math.PI / 5;
const ELEVATION = Math.PI / 10;

/**
 * Three-quarter orthographic projection of a robot-frame point (x forward,
 * y left, z up) to canvas pixels. The vertical anchor sits below centre so a
 * standing robot (feet near z = -0.35 m) fills the frame.
 */
export function projectPoint(
  p: number[],
  width: number,
  height: number,
  scale?: number,
): [number, number] {
  const s = scale ?? height / 1.1;
  const depth = p[0] * Math.cos(AZIMUTH) - p[1] * Math.sin(AZIMUTH);
  const horiz = p[0] * Math.sin(AZIMUTH) + p[1] * Math.cos(AZIMUTH);
  const vert = p[2] * Math.cos(ELEVATION) - depth * Math.sin(ELEVATION);
  return [width / 2 + s * horiz, height * 0.45 - s * vert];
}

export function drawSkeleton(
  ctx: CanvasRenderingContext2D,
  links: Record<string, TransformDoc>,
  edges: [string, string][],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);

  ctx.strokeStyle = "#9ad0a0";
  ctx.lineWidth = 2;
  for (const [parent, child] of edges) {
    const a = links[parent];
    const b = links[child];
    if (a === undefined || b === undefined) continue;
    const [ax, ay] = projectPoint(a.position, width, height);
    const [bx, by] = projectPoint(b.position, width, height);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }

  ctx.fillStyle = "#e8eaed";
  for (const tf of Object.values(links)) {
    const [x, y] = projectPoint(tf.position, width, height);
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, Math.PI * 2);
    ctx.fill();
  }
}

export function drawPreview(
  ctx: CanvasRenderingContext2D,
  resp: PreviewResponse,
  edges: [string, string][],
  width: number,
  height: number,
): void {
  drawSkeleton(ctx, resp.links, edges, width, height);
}

/** Rolling plot of fused pitch and roll over the last few seconds of a run. */
export class AttitudeChart {
  private t: number[] = [];
  private pitch: number[] = [];
  private roll: number[] = [];

  constructor(readonly windowSeconds = 6) {}

  reset(): void {
    this.t = [];
    this.pitch = [];
    this.roll = [];
  }

  push(t: number, fusedPitch: number, fusedRoll: number): void {
    this.t.push(t);
    this.pitch.push(fusedPitch);
    this.roll.push(fusedRoll);
  }

  get samples(): number {
    return this.t.length;
  }

  draw(ctx: CanvasRenderingContext2D, width: number, height: number): void {
    ctx.clearRect(0, 0, width, height);
    if (this.t.length < 2) return;
    const tEnd = this.t[this.t.length - 1];
    const tStart = Math.max(this.t[0], tEnd - this.windowSeconds);
    let first = 0;
    while (first < this.t.length && this.t[first] < tStart) first++;

    const visible = this.pitch.slice(first).concat(this.roll.slice(first));
    let hi = Math.max(0.1, ...visible.map(Math.abs));
    hi *= 1.1;
    const toX = (t: number) => ((t - tStart) / Math.max(tEnd - tStart, 1e-9)) * width;
    const toY = (v: number) => height / 2 - (v / hi) * (height / 2);

    ctx.strokeStyle = "#444";
    ctx.beginPath();
    ctx.moveTo(0, height / 2);
    ctx.lineTo(width, height / 2);
    ctx.stroke();

    const trace = (values: number[], colour: string) => {
      ctx.strokeStyle = colour;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      for (let i = first; i < this.t.length; i++) {
        const x = toX(this.t[i]);
        const y = toY(values[i]);
        if (i === first) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      }
      ctx.stroke();
    };
    trace(this.pitch, "#8ab4f8");
    trace(this.roll, "#f28b82");
  }
}
