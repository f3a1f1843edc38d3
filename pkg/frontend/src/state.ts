/**
 * Pure session-state transitions for the advisor UI.
 *
 * Everything here is an ordinary function from state to state so the whole
 * editing / staleness / pinning model is testable without a browser. The
 * one invariant that matters: the prediction panel only ever claims to be
 * current when its contents answer exactly the query the user is looking
 * at; any edit flips it to stale until a refresh lands.
 */

import type {
  Algorithm,
  HistoryRow,
  KChoice,
  Pin,
  ScaleInfo,
  SessionState,
  WhatIfRequest,
  WhatIfResponse,
  WirePrediction,
} from "./types.js";

export interface Rejection {
  error: string;
}

export type Result = SessionState | Rejection;

export function isRejection(r: Result): r is Rejection {
  return (r as Rejection).error !== undefined;
}

export function initialState(): SessionState {
  return {
    scale: null,
    courses: [],
    history: [],
    candidates: [],
    algorithm: "user_based",
    k: 10,
    modelId: null,
    predictions: null,
    servedSignature: null,
    requestEpoch: 0,
    servedEpoch: 0,
    serviceError: null,
    pins: [],
  };
}

// -- grade entry -----------------------------------------------------------

/**
 * Resolve a typed grade token against the service's scale: a symbol from
 * the mapping (or an alias of one), or a numeral within the point bounds.
 * Returns the points or a human-readable rejection.
 */
export function resolveGrade(
  scale: ScaleInfo,
  token: string,
): { points: number } | Rejection {
  const trimmed = token.trim();
  if (trimmed === "") {
    return { error: "enter a grade" };
  }
  if (trimmed in scale.mapping) {
    return { points: scale.mapping[trimmed]! };
  }
  if (scale.aliases.includes(trimmed)) {
    // Aliases map onto scale values server-side; the mapping we fetched
    // already contains every alias the service accepts as a key.
    return { points: scale.mapping[trimmed]! };
  }
  const numeric = Number(trimmed);
  if (!Number.isFinite(numeric)) {
    const symbols = Object.keys(scale.mapping).join(", ");
    return { error: `"${trimmed}" is not a grade symbol (${symbols}) or a number` };
  }
  if (numeric < scale.min_points || numeric > scale.max_points) {
    return {
      error: `${trimmed} is outside the scale [${scale.min_points}, ${scale.max_points}]`,
    };
  }
  return { points: numeric };
}

export function addHistoryRow(
  state: SessionState,
  courseId: string,
  gradeToken: string,
): Result {
  if (state.scale === null) {
    return { error: "scale not loaded yet" };
  }
  if (state.history.some((r) => r.courseId === courseId)) {
    return { error: `${courseId} is already in the history` };
  }
  if (state.courses.length > 0 && !state.courses.some((c) => c.course_id === courseId)) {
    return { error: `${courseId} is not a course in the current dataset` };
  }
  const grade = resolveGrade(state.scale, gradeToken);
  if ("error" in grade) {
    return grade;
  }
  const row: HistoryRow = {
    courseId,
    gradePoints: grade.points,
    label: gradeToken.trim(),
  };
  return {
    ...state,
    history: [...state.history, row],
    candidates: state.candidates.filter((c) => c !== courseId),
  };
}

export function editHistoryRow(
  state: SessionState,
  courseId: string,
  gradeToken: string,
): Result {
  if (state.scale === null) {
    return { error: "scale not loaded yet" };
  }
  if (!state.history.some((r) => r.courseId === courseId)) {
    return { error: `${courseId} is not in the history` };
  }
  const grade = resolveGrade(state.scale, gradeToken);
  if ("error" in grade) {
    return grade;
  }
  return {
    ...state,
    history: state.history.map((r) =>
      r.courseId === courseId
        ? { ...r, gradePoints: grade.points, label: gradeToken.trim() }
        : r,
    ),
  };
}

export function removeHistoryRow(state: SessionState, courseId: string): SessionState {
  return {
    ...state,
    history: state.history.filter((r) => r.courseId !== courseId),
  };
}

// -- candidates and knobs --------------------------------------------------

export function toggleCandidate(state: SessionState, courseId: string): Result {
  if (state.history.some((r) => r.courseId === courseId)) {
    return { error: `${courseId} is in the grade history; a course cannot be both` };
  }
  const present = state.candidates.includes(courseId);
  return {
    ...state,
    candidates: present
      ? state.candidates.filter((c) => c !== courseId)
      : [...state.candidates, courseId],
  };
}

export function setAlgorithm(state: SessionState, algorithm: Algorithm): SessionState {
  return { ...state, algorithm };
}

export function setK(state: SessionState, k: KChoice): SessionState {
  return { ...state, k };
}

export function setModelId(state: SessionState, modelId: string | null): SessionState {
  return { ...state, modelId };
}

// -- staleness -------------------------------------------------------------

/**
 * Canonical description of the prediction query the current state asks for.
 * History and candidate order are irrelevant to the service's answer, so
 * both are sorted before serializing.
 */
export function querySignature(state: SessionState): string {
  return JSON.stringify({
    algorithm: state.algorithm,
    k: state.k,
    modelId: state.algorithm === "item_based" ? state.modelId : null,
    history: state.history
      .map((r) => [r.courseId, r.gradePoints])
      .sort((a, b) => String(a[0]).localeCompare(String(b[0]))),
    candidates: [...state.candidates].sort(),
  });
}

/** True when the displayed predictions answer a query the user has since edited. */
export function isStale(state: SessionState): boolean {
  if (state.predictions === null || state.servedSignature === null) {
    return false;
  }
  return querySignature(state) !== state.servedSignature;
}

/** Why user-based mode is unavailable right now, or null if it is fine. */
export function userModeDisabledReason(state: SessionState): string | null {
  if (state.history.length === 0) {
    return "user-based mode needs at least one graded course in the history";
  }
  return null;
}

/** Reasons the refresh button should be inert; empty array means go ahead. */
export function refreshBlockers(state: SessionState): string[] {
  const blockers: string[] = [];
  if (state.algorithm === "user_based" && state.history.length === 0) {
    blockers.push("user-based mode needs a non-empty grade history");
  }
  if (state.algorithm === "item_based" && !state.modelId) {
    blockers.push("item-based mode needs a prebuilt item model id");
  }
  return blockers;
}

export function buildRequest(state: SessionState): WhatIfRequest {
  const req: WhatIfRequest = {
    algorithm: state.algorithm,
    grade_history: state.history.map((r) => ({
      course_id: r.courseId,
      grade_points: r.gradePoints,
    })),
    candidate_courses: [...state.candidates],
    k: state.k,
  };
  if (state.algorithm === "item_based" && state.modelId) {
    req.model_id = state.modelId;
  }
  return req;
}

// -- request lifecycle -----------------------------------------------------

export interface RefreshTicket {
  state: SessionState;
  epoch: number;
  signature: string;
}

/**
 * Start a refresh: bump the epoch and snapshot the query signature. The
 * signature travels with the response so that, if the user edits while the
 * request is in flight, the applied result is immediately (and correctly)
 * marked stale.
 */
export function beginRefresh(state: SessionState): RefreshTicket {
  const epoch = state.requestEpoch + 1;
  return {
    state: { ...state, requestEpoch: epoch, serviceError: null },
    epoch,
    signature: querySignature(state),
  };
}

/**
 * Apply a response. Responses to superseded epochs are dropped on the
 * floor: only the answer to the newest request may ever reach the screen.
 */
export function applyResponse(
  state: SessionState,
  epoch: number,
  signature: string,
  response: WhatIfResponse,
): SessionState {
  if (epoch !== state.requestEpoch) {
    return state;
  }
  return {
    ...state,
    predictions: response.predictions,
    servedSignature: signature,
    servedEpoch: epoch,
    serviceError: null,
  };
}

export function applyError(
  state: SessionState,
  epoch: number,
  message: string,
): SessionState {
  if (epoch !== state.requestEpoch) {
    return state;
  }
  return { ...state, serviceError: message };
}

// -- pins ------------------------------------------------------------------

export function pinCurrent(state: SessionState, label?: string): Result {
  if (state.predictions === null) {
    return { error: "nothing to pin; refresh first" };
  }
  if (isStale(state)) {
    return { error: "predictions are stale; refresh before pinning" };
  }
  const pin: Pin = {
    label: label ?? `pin ${state.pins.length + 1}`,
    algorithm: state.algorithm,
    k: state.k,
    history: state.history.map((r) => ({ ...r })),
    predictions: state.predictions.map((p) => ({ ...p })),
  };
  return { ...state, pins: [...state.pins, pin] };
}

export function removePin(state: SessionState, index: number): SessionState {
  return { ...state, pins: state.pins.filter((_, i) => i !== index) };
}

export interface DeltaRow {
  course_id: string;
  left: number | null;
  right: number | null;
  delta: number | null;
}

/**
 * Side-by-side comparison of two pinned scenarios, per candidate course.
 * Rows follow the right pin's ranking (it is usually the newer scenario),
 * with candidates only present on the left appended in their own order.
 */
export function pinDelta(left: Pin, right: Pin): DeltaRow[] {
  const leftBy = new Map(left.predictions.map((p) => [p.course_id, p.value]));
  const rightBy = new Map(right.predictions.map((p) => [p.course_id, p.value]));
  const rows: DeltaRow[] = [];
  for (const p of right.predictions) {
    const l = leftBy.get(p.course_id);
    rows.push({
      course_id: p.course_id,
      left: l ?? null,
      right: p.value,
      delta: l === undefined ? null : p.value - l,
    });
  }
  for (const p of left.predictions) {
    if (!rightBy.has(p.course_id)) {
      rows.push({ course_id: p.course_id, left: p.value, right: null, delta: null });
    }
  }
  return rows;
}
