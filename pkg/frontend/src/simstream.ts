// Consumes the streamed CSV log from POST /simulate. The log starts with a
// "# rng=..." comment, then the header line, then one row per tick.

export interface SimRow {
  t: number;
  truthPitch: number;
  truthRoll: number;
  estPitch: number;
  estRoll: number;
  /** Every column by header name, including the per-joint ones. */
  values: Record<string, number>;
}

export interface SimPlayback {
  comment: string;
  header: string[];
  rows: SimRow[];
  /** Full text as received; byte-stable across runs for a fixed seed. */
  text: string;
  /** True when the stream broke before the server finished the log. */
  partial: boolean;
}

export function parseRow(header: string[], line: string): SimRow {
  const parts = line.split(",");
  if (parts.length !== header.length) {
    throw new Error(`row has ${parts.length} fields, header has ${header.length}`);
  }
  const values: Record<string, number> = {};
  for (let i = 0; i < header.length; i++) {
    values[header[i]] = Number(parts[i]);
  }
  return {
    t: values.t,
    truthPitch: values.truth_pitch,
    truthRoll: values.truth_roll,
    estPitch: values.est_pitch,
    estRoll: values.est_roll,
    values,
  };
}

/**
 * Drains the chunk stream, invoking onRow for each complete row as it
 * arrives (this is what drives the live view). A mid-stream failure is not
 * rethrown: the rows seen so far come back with partial=true so the caller
 * can keep the partial result on screen behind a banner.
 */
export async function consumeSimStream(
  chunks: AsyncIterable<string>,
  onRow?: (row: SimRow) => void,
): Promise<SimPlayback> {
  let comment = "";
  let header: string[] | null = null;
  const rows: SimRow[] = [];
  let text = "";
  let buffer = "";
  let partial = false;

  const takeLine = (line: string) => {
    if (line.length === 0) return;
    if (line.startsWith("#")) {
      comment = line;
    } else if (header === null) {
      header = line.split(",");
    } else {
      const row = parseRow(header, line);
      rows.push(row);
      onRow?.(row);
    }
  };

  try {
    for await (const chunk of chunks) {
      text += chunk;
      buffer += chunk;
      for (;;) {
        const nl = buffer.indexOf("\n");
        if (nl < 0) break;
        takeLine(buffer.slice(0, nl));
        buffer = buffer.slice(nl + 1);
      }
    }
    // A well-formed log ends in a newline; leftover bytes mean truncation.
    if (buffer.length > 0) partial = true;
  } catch {
    partial = true;
  }
  return { comment, header: header ?? [], rows, text, partial };
}
