// Motion and model documents as served by the hop runtime service, plus the
// client-side edit rules. Validation here mirrors the server's schema ranges
// so obviously bad edits never leave the browser; the server remains the
// authority and its 422 text is surfaced verbatim when something slips past.

export interface KeyframeDoc {
  t: number;
  pos: number[];
  vel: number[];
  eff: number[];
  sup: { l: number; r: number };
}

export interface PidAxisDoc {
  enabled: boolean;
  p: number;
  i: number;
  d: number;
}

export interface PidDoc {
  pitch: PidAxisDoc;
  roll: PidAxisDoc;
  i_clamp: number;
  joint_gain_map: number[];
}

export interface MotionDoc {
  name: string;
  keyframes: KeyframeDoc[];
  pid: PidDoc;
}

export interface LinkDoc {
  name: string;
  parent: string | null;
  axis: number[] | null;
  origin: number[];
  mass: number;
  com: number[];
  inertia: number[];
  limits: number[] | null;
}

export interface ModelDoc {
  schema_version: number;
  name: string;
  links: LinkDoc[];
}

export interface TransformDoc {
  position: number[];
  orientation: number[]; // w, x, y, z
}

export interface PreviewResponse {
  frame: {
    positions: number[];
    velocities: number[];
    efforts: number[];
    support: number[]; // left, right
  };
  links: Record<string, TransformDoc>;
}

/** Actuated joint names in motion-array order: the axis-bearing links, in model order. */
export function jointNames(model: ModelDoc): string[] {
  return model.links.filter((l) => l.axis !== null).map((l) => l.name);
}

/** Parent-child link pairs for the wireframe; the root link has no edge. */
export function skeletonEdges(model: ModelDoc): [string, string][] {
  const edges: [string, string][] = [];
  for (const link of model.links) {
    if (link.parent !== null) edges.push([link.parent, link.name]);
  }
  return edges;
}

export function motionDuration(doc: MotionDoc): number {
  return doc.keyframes[doc.keyframes.length - 1].t;
}

export function cloneMotion(doc: MotionDoc): MotionDoc {
  return JSON.parse(JSON.stringify(doc)) as MotionDoc;
}

export function motionsEqual(a: MotionDoc, b: MotionDoc): boolean {
  // Field order is stable in practice (documents come from the canonical
  // serializer and edits mutate values in place), so a stringify compare
  // is an honest deep-equality here.
  return JSON.stringify(a) === JSON.stringify(b);
}

export type EditField = "t" | "pos" | "vel" | "eff" | "sup.l" | "sup.r";

export interface Edit {
  index: number;
  field: EditField;
  value: number;
  /** Joint array index, required for pos/vel/eff. */
  joint?: number;
}

/**
 * Returns an error message if the edit violates the document schema, null if
 * it is acceptable. Ranges match the service: efforts and support weights in
 * [0, 1], times finite, non-negative and strictly increasing.
 */
export function checkEdit(doc: MotionDoc, edit: Edit): string | null {
  const { index, field, value } = edit;
  if (index < 0 || index >= doc.keyframes.length) {
    return `keyframe index ${index} out of range`;
  }
  if (!Number.isFinite(value)) {
    return `${field} must be finite`;
  }
  if (field === "pos" || field === "vel" || field === "eff") {
    const nJoints = doc.keyframes[index].pos.length;
    if (edit.joint === undefined || edit.joint < 0 || edit.joint >= nJoints) {
      return `joint index required in [0, ${nJoints})`;
    }
  }
  switch (field) {
    case "t": {
      if (value < 0) return "t must be >= 0";
      const prev = index > 0 ? doc.keyframes[index - 1].t : -Infinity;
      const next =
        index < doc.keyframes.length - 1 ? doc.keyframes[index + 1].t : Infinity;
      if (value <= prev || value >= next) {
        return `t must stay strictly between neighbours (${prev}, ${next})`;
      }
      return null;
    }
    case "eff":
      if (value < 0 || value > 1) return "eff must lie in [0, 1]";
      return null;
    case "sup.l":
    case "sup.r":
      if (value < 0 || value > 1) return "support must lie in [0, 1]";
      return null;
    case "pos":
    case "vel":
      return null;
  }
}

/** Applies a checked edit in place. Call checkEdit first. */
export function applyEdit(doc: MotionDoc, edit: Edit): void {
  const kf = doc.keyframes[edit.index];
  switch (edit.field) {
    case "t":
      kf.t = edit.value;
      break;
    case "pos":
      kf.pos[edit.joint!] = edit.value;
      break;
    case "vel":
      kf.vel[edit.joint!] = edit.value;
      break;
    case "eff":
      kf.eff[edit.joint!] = edit.value;
      break;
    case "sup.l":
      kf.sup.l = edit.value;
      break;
    case "sup.r":
      kf.sup.r = edit.value;
      break;
  }
}
