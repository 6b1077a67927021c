/** Annotation session state machine.
 *
 * Pure data + transition functions, shared by the DOM layer and the tests.
 * The rules mirror the server's response schema exactly, so the UI can only
 * build payloads the server accepts:
 *   - quality 1..5 is mandatory;
 *   - ratings 1-2 allow immediate submission with no markings;
 *   - ratings 3-5 require every markable to be addressed: one or more target
 *     tokens selected (multi-select for MWEs) or NONE;
 *   - special-case flags attach to marked items (or NONE).
 */

import {
  MarkablePayload,
  ResponsePayload,
  SpecialFlag,
  Task,
} from "./types.js";

export interface MarkableState {
  selection: number[]; // sorted 1-based target token indices
  none: boolean;
  flags: SpecialFlag[];
}

export interface Session {
  task: Task;
  version: number;
  quality: number | null;
  markables: Map<string, MarkableState>;
  editedText: string | null;
}

export const MARKING_THRESHOLD = 3;

export function predicateKey(framePos: number): string {
  return `pred:${framePos}`;
}

export function argumentKey(framePos: number, sourceIndex: number): string {
  return `arg:${framePos}:${sourceIndex}`;
}

/** Stable order of everything the annotator must address for this task. */
export function markableKeys(task: Task): string[] {
  const keys: string[] = [];
  task.predicates.forEach((pred, pos) => {
    keys.push(predicateKey(pos));
    for (const arg of pred.arguments) {
      keys.push(argumentKey(pos, arg.source_index));
    }
  });
  return keys;
}

export function newSession(task: Task, version: number): Session {
  const markables = new Map<string, MarkableState>();
  for (const key of markableKeys(task)) {
    markables.set(key, { selection: [], none: false, flags: [] });
  }
  return { task, version, quality: null, markables, editedText: null };
}

export function setQuality(session: Session, quality: number): void {
  if (quality < 1 || quality > 5) {
    throw new Error(`quality out of range: ${quality}`);
  }
  session.quality = quality;
}

function markable(session: Session, key: string): MarkableState {
  const state = session.markables.get(key);
  if (!state) {
    throw new Error(`unknown markable: ${key}`);
  }
  return state;
}

/** Click a target token: toggles membership, clearing a previous NONE. */
export function toggleToken(session: Session, key: string, index: number): void {
  const state = markable(session, key);
  if (index < 1 || index > session.task.target_tokens.length) {
    throw new Error(`token index out of range: ${index}`);
  }
  state.none = false;
  const at = state.selection.indexOf(index);
  if (at >= 0) {
    state.selection.splice(at, 1);
  } else {
    state.selection.push(index);
    state.selection.sort((a, b) => a - b);
  }
}

export function setNone(session: Session, key: string): void {
  const state = markable(session, key);
  state.none = true;
  state.selection = [];
}

export function toggleFlag(session: Session, key: string, flag: SpecialFlag): void {
  const state = markable(session, key);
  const at = state.flags.indexOf(flag);
  if (at >= 0) {
    state.flags.splice(at, 1);
  } else {
    state.flags.push(flag);
  }
}

export function setEditedText(session: Session, text: string): void {
  session.editedText = text.trim() === "" ? null : text;
}

export function markingRequired(session: Session): boolean {
  return session.quality !== null && session.quality >= MARKING_THRESHOLD;
}

export function isAddressed(state: MarkableState): boolean {
  return state.none || state.selection.length > 0;
}

export function unaddressedKeys(session: Session): string[] {
  if (!markingRequired(session)) {
    return [];
  }
  return [...session.markables.entries()]
    .filter(([, state]) => !isAddressed(state))
    .map(([key]) => key);
}

/** Submit gating: a rating is always required; low ratings submit as-is,
 * high ratings only once every markable is addressed. */
export function canSubmit(session: Session): boolean {
  if (session.quality === null) {
    return false;
  }
  return unaddressedKeys(session).length === 0;
}

/** Build the wire payload. Only markables carrying information are sent for
 * low-rated sentences; high-rated sentences send every markable. */
export function buildResponse(session: Session): ResponsePayload {
  if (!canSubmit(session)) {
    throw new Error(
      `response incomplete: ${unaddressedKeys(session).join(", ") || "no rating"}`,
    );
  }
  const markables: Record<string, MarkablePayload> = {};
  for (const [key, state] of session.markables) {
    if (!isAddressed(state)) {
      continue; // only possible below the marking threshold
    }
    markables[key] = {
      selection: state.none ? "NONE" : [...state.selection],
      flags: [...state.flags].sort(),
    };
  }
  return {
    quality: session.quality as number,
    markables,
    edited_target_text: session.editedText,
  };
}
