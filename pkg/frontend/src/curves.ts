// Joint curves are plotted from the server's own interpolation, sampled
// densely over each keyframe segment. The client never evaluates splines
// itself, so the plot cannot drift from what the robot would execute.

import type { MotionApi } from "./api.js";
import type { MotionDoc } from "./motion.js";

export const POINTS_PER_SEGMENT = 50;

/**
 * Sample grid: POINTS_PER_SEGMENT steps per segment, knots included exactly
 * once. For k keyframes the grid has (k-1)*POINTS_PER_SEGMENT + 1 points and
 * begins/ends on the first/last knot.
 */
export function sampleTimes(
  knots: number[],
  pointsPerSegment: number = POINTS_PER_SEGMENT,
): number[] {
  const times: number[] = [];
  for (let seg = 0; seg + 1 < knots.length; seg++) {
    const a = knots[seg];
    const b = knots[seg + 1];
    for (let i = 0; i < pointsPerSegment; i++) {
      times.push(a + ((b - a) * i) / pointsPerSegment);
    }
  }
  times.push(knots[knots.length - 1]);
  return times;
}

export interface JointCurve {
  t: number[];
  q: number[];
}

/** Dense position curve for one joint, via POST /preview at each grid time. */
export async function sampleJointCurve(
  api: MotionApi,
  doc: MotionDoc,
  jointIndex: number,
  pointsPerSegment: number = POINTS_PER_SEGMENT,
): Promise<JointCurve> {
  const times = sampleTimes(
    doc.keyframes.map((kf) => kf.t),
    pointsPerSegment,
  );
  const q: number[] = new Array(times.length);
  // A handful of requests in flight at a time keeps latency down without
  // hammering the service.
  const width = 8;
  for (let start = 0; start < times.length; start += width) {
    const batch = times.slice(start, start + width);
    const frames = await Promise.all(batch.map((t) => api.preview(doc, t)));
    frames.forEach((resp, i) => {
      q[start + i] = resp.frame.positions[jointIndex];
    });
  }
  return { t: times, q };
}
