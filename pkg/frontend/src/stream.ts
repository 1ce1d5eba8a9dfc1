// Long-poll cursor client for /sessions/{id}/stream.
//
// The reducer is pure so it can be contract-tested against recorded chunks:
// it only ever appends past the cursor it asked with, so re-delivered
// prefixes (stale cursor, retried poll) never duplicate a row.

import type { StreamChunk, StreamEvent, StreamRecord } from "./types.js";

export interface StreamState {
  events: StreamEvent[];
  records: StreamRecord[];
  cursor: string;
  finished: boolean;
  error?: string;
}

export function initialStreamState(): StreamState {
  return { events: [], records: [], cursor: "0", finished: false };
}

function parseCursor(cursor: string): [number, number] {
  if (cursor === "0" || cursor === "") {
    return [0, 0];
  }
  const [e, r] = cursor.split(":").map(Number);
  return [e, r];
}

export function applyChunk(
  state: StreamState,
  requestedCursor: string,
  chunk: StreamChunk,
): StreamState {
  const [reqE, reqR] = parseCursor(requestedCursor);
  // drop any part of the chunk we already hold
  const skipE = Math.max(0, state.events.length - reqE);
  const skipR = Math.max(0, state.records.length - reqR);
  return {
    events: state.events.concat(chunk.events.slice(skipE)),
    records: state.records.concat(chunk.records.slice(skipR)),
    cursor: chunk.next_cursor,
    finished: chunk.finished,
    error: chunk.error,
  };
}

export type FetchChunk = (sessionId: string, cursor: string) => Promise<StreamChunk>;

/** Poll at the given rate until the stream is drained; calls onUpdate after
 * every applied chunk. Returns the final state. */
export async function pollSession(
  sessionId: string,
  fetchChunk: FetchChunk,
  onUpdate: (state: StreamState) => void,
  pollHz = 5,
  sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
): Promise<StreamState> {
  let state = initialStreamState();
  for (;;) {
    const asked = state.cursor;
    const chunk = await fetchChunk(sessionId, asked);
    const drained =
      chunk.finished && chunk.events.length === 0 && chunk.records.length === 0;
    state = applyChunk(state, asked, chunk);
    onUpdate(state);
    if (drained || state.error) {
      return state;
    }
    await sleep(1000 / pollHz);
  }
}
