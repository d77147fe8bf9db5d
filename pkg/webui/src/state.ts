/**
 * View state as pure data with pure transitions.
 *
 * The panel history is a stack of already-rendered sources, so going
 * back never refetches. Responses carry the sequence number of the
 * request that started them; anything but the latest is stale and
 * leaves the state untouched.
 */

import type { DocumentInfo, SearchEnvelope } from "./api.js";

export type Panel =
  | { kind: "search"; envelope: SearchEnvelope; active: number }
  | { kind: "document"; doc: DocumentInfo };

export interface ViewState {
  query: string;
  rank: string;
  interp: string;
  history: Panel[];
  seq: number;
  pending: number | null;
  error: string | null;
}

export function initialState(): ViewState {
  return {
    query: "",
    rank: "fk_count",
    interp: "best",
    history: [],
    seq: 0,
    pending: null,
    error: null,
  };
}

export function setOptions(
  state: ViewState,
  options: { query?: string; rank?: string; interp?: string },
): ViewState {
  return { ...state, ...options };
}

/** Issue a request ticket; only the newest ticket may land. */
export function beginRequest(state: ViewState): { state: ViewState; seq: number } {
  const seq = state.seq + 1;
  return { state: { ...state, seq, pending: seq, error: null }, seq };
}

function isStale(state: ViewState, seq: number): boolean {
  return state.pending !== seq;
}

export function receiveSearch(
  state: ViewState,
  seq: number,
  envelope: SearchEnvelope,
): ViewState {
  if (isStale(state, seq)) return state;
  const panel: Panel = { kind: "search", envelope, active: 0 };
  return { ...state, pending: null, error: null, history: [...state.history, panel] };
}

export function receiveDocument(state: ViewState, seq: number, doc: DocumentInfo): ViewState {
  if (isStale(state, seq)) return state;
  const panel: Panel = { kind: "document", doc };
  return { ...state, pending: null, error: null, history: [...state.history, panel] };
}

/** A failed request surfaces its message and leaves the panels alone. */
export function receiveError(state: ViewState, seq: number, message: string): ViewState {
  if (isStale(state, seq)) return state;
  return { ...state, pending: null, error: message };
}

/** Validation problems never involve a request at all. */
export function localError(state: ViewState, message: string): ViewState {
  return { ...state, error: message };
}

export function currentPanel(state: ViewState): Panel | null {
  return state.history.length ? state.history[state.history.length - 1] : null;
}

export function canGoBack(state: ViewState): boolean {
  return state.history.length > 1;
}

export function goBack(state: ViewState): ViewState {
  if (!canGoBack(state)) return state;
  return { ...state, error: null, history: state.history.slice(0, -1) };
}

/** Switch the visible reading of the top search panel. */
export function selectReading(state: ViewState, index: number): ViewState {
  const top = currentPanel(state);
  if (!top || top.kind !== "search") return state;
  if (index < 0 || index >= top.envelope.groups.length || index === top.active) return state;
  const panel: Panel = { ...top, active: index };
  return { ...state, history: [...state.history.slice(0, -1), panel] };
}
