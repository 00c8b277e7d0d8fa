import { ApiError, MotionApi } from "./api.js";
import {
  Edit,
  ModelDoc,
  MotionDoc,
  PreviewResponse,
  applyEdit,
  checkEdit,
  cloneMotion,
  motionDuration,
  motionsEqual,
} from "./motion.js";

/** Stale save: someone else wrote the motion since we fetched it. */
export interface SaveConflict {
  status: 409;
  /** Server response body, verbatim. */
  detail: string;
}

export type SaveResult = "saved" | SaveConflict;

/**
 * One motion being edited against the service. Holds the client copy of the
 * document, the ETag it was fetched at, and the cursor/selection state the
 * widgets share. All server writes go through save()/overwrite(); everything
 * else is read-only traffic.
 */
export class EditorSession {
  selected = 0;
  private cursorS = 0;
  private baseline: MotionDoc;

  private constructor(
    readonly api: MotionApi,
    readonly name: string,
    public motion: MotionDoc,
    public etag: string,
    readonly model: ModelDoc,
  ) {
    this.baseline = cloneMotion(motion);
  }

  static async load(api: MotionApi, name: string): Promise<EditorSession> {
    const [{ doc, etag }, model] = await Promise.all([
      api.getMotion(name),
      api.getModel(),
    ]);
    return new EditorSession(api, name, doc, etag, model);
  }

  get duration(): number {
    return motionDuration(this.motion);
  }

  /** Unsaved local changes relative to the last fetched/saved document. */
  get dirty(): boolean {
    return !motionsEqual(this.motion, this.baseline);
  }

  get cursor(): number {
    return this.cursorS;
  }

  setCursor(t: number): void {
    this.cursorS = Math.min(Math.max(t, 0), this.duration);
  }

  selectKeyframe(index: number): void {
    if (index < 0 || index >= this.motion.keyframes.length) {
      throw new RangeError(`keyframe index ${index} out of range`);
    }
    this.selected = index;
  }

  /**
   * Applies a local edit. Returns null on success or the rejection message;
   * rejected edits leave the document untouched and cause no traffic.
   */
  edit(edit: Edit): string | null {
    const err = checkEdit(this.motion, edit);
    if (err !== null) return err;
    applyEdit(this.motion, edit);
    return null;
  }

  /**
   * Conditional save with If-Match. A concurrent external write comes back
   * as a SaveConflict so the caller can offer reload-or-overwrite; schema
   * rejections (422) propagate as ApiError with the server text.
   */
  async save(): Promise<SaveResult> {
    try {
      this.etag = await this.api.putMotion(this.name, this.motion, this.etag);
    } catch (e) {
      if (e instanceof ApiError && e.status === 409) {
        return { status: 409, detail: e.body };
      }
      throw e;
    }
    this.baseline = cloneMotion(this.motion);
    return "saved";
  }

  /** Conflict choice 1: drop local edits and adopt the server's document. */
  async reloadFromServer(): Promise<void> {
    const { doc, etag } = await this.api.getMotion(this.name);
    this.motion = doc;
    this.baseline = cloneMotion(doc);
    this.etag = etag;
    this.selected = Math.min(this.selected, doc.keyframes.length - 1);
    this.setCursor(this.cursorS);
  }

  /** Conflict choice 2: write unconditionally, discarding the other edit. */
  async overwrite(): Promise<void> {
    this.etag = await this.api.putMotion(this.name, this.motion);
    this.baseline = cloneMotion(this.motion);
  }

  /** Frame + link transforms at the cursor for the current (unsaved) document. */
  previewAtCursor(): Promise<PreviewResponse> {
    return this.api.preview(this.motion, this.cursorS);
  }

  /**
   * Streams a simulator run of the saved motion. Refused while dirty: the
   * simulator only sees stored documents, so playing would silently ignore
   * local edits.
   */
  simulate(seed = 0, duration?: number): AsyncGenerator<string, void, void> {
    if (this.dirty) {
      throw new Error("motion has unsaved edits; save before playing in sim");
    }
    return this.api.simulateStream(this.name, seed, duration);
  }
}
