/**
 * Browser entry point: wires the pure state machine and renderers to the
 * DOM and the service client. No prediction math happens here; the page is
 * a view over what-if responses.
 */

import { AdvisorClient, ServiceError } from "./api.js";
import {
  addHistoryRow,
  applyError,
  applyResponse,
  beginRefresh,
  buildRequest,
  editHistoryRow,
  initialState,
  isRejection,
  isStale,
  pinCurrent,
  pinDelta,
  refreshBlockers,
  removeHistoryRow,
  removePin,
  setAlgorithm,
  setK,
  setModelId,
  toggleCandidate,
  userModeDisabledReason,
} from "./state.js";
import {
  renderCandidates,
  renderError,
  renderHistory,
  renderPinDelta,
  renderPins,
  renderRanking,
} from "./render.js";
import type { Algorithm, KChoice, SessionState } from "./types.js";

// Same-origin by default; ?api=http://host:port points the page at a
// service running elsewhere (which then needs CORS or a reverse proxy).
const apiBase = new URLSearchParams(window.location.search).get("api") ?? "";
const client = new AdvisorClient(apiBase);
let state: SessionState = initialState();
let inlineMessage: string | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function paint(): void {
  el("history-panel").innerHTML = renderHistory(state.history);
  el("candidate-panel").innerHTML = renderCandidates(
    state.courses,
    state.candidates,
    state.history.map((r) => r.courseId),
  );
  el("ranking-panel").innerHTML = renderRanking(state.predictions, isStale(state));
  el("pin-panel").innerHTML = renderPins(state.pins);
  el("error-panel").innerHTML = renderError(state.serviceError);
  el("inline-message").textContent = inlineMessage ?? "";

  const userRadio = el<HTMLInputElement>("algo-user");
  const reason = userModeDisabledReason(state);
  userRadio.disabled = reason !== null;
  el("algo-user-note").textContent = reason ?? "";

  const blockers = refreshBlockers(state);
  const refreshButton = el<HTMLButtonElement>("refresh");
  refreshButton.disabled = blockers.length > 0;
  refreshButton.title = blockers.join("; ");

  el<HTMLInputElement>("model-id").style.display =
    state.algorithm === "item_based" ? "" : "none";

  const deltaPanel = el("delta-panel");
  if (state.pins.length >= 2) {
    const left = state.pins[state.pins.length - 2]!;
    const right = state.pins[state.pins.length - 1]!;
    deltaPanel.innerHTML = renderPinDelta(left.label, right.label, pinDelta(left, right));
  } else {
    deltaPanel.innerHTML = "";
  }
}

function apply(result: ReturnType<typeof addHistoryRow>): void {
  if (isRejection(result)) {
    inlineMessage = result.error;
  } else {
    inlineMessage = null;
    state = result;
  }
  paint();
}

async function refresh(): Promise<void> {
  if (refreshBlockers(state).length > 0) return;
  const ticket = beginRefresh(state);
  state = ticket.state;
  paint();
  try {
    const response = await client.whatif(buildRequest(state));
    state = applyResponse(state, ticket.epoch, ticket.signature, response);
  } catch (err) {
    const message =
      err instanceof ServiceError ? `${err.status || "network"}: ${err.message}` : String(err);
    state = applyError(state, ticket.epoch, message);
  }
  paint();
}

function wire(): void {
  el("add-row").addEventListener("click", () => {
    const course = el<HTMLInputElement>("new-course").value.trim();
    const grade = el<HTMLInputElement>("new-grade").value;
    apply(addHistoryRow(state, course, grade));
  });

  el("history-panel").addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const course = target.getAttribute("data-remove");
    if (course) {
      state = removeHistoryRow(state, course);
      if (state.history.length === 0 && state.algorithm === "user_based") {
        // user mode just lost its precondition; surface why instead of
        // letting the next refresh fail server-side
        inlineMessage = userModeDisabledReason(state);
      }
      paint();
    }
  });

  el("history-panel").addEventListener("change", (ev) => {
    const target = ev.target as HTMLInputElement;
    const course = target.getAttribute("data-course");
    if (course) {
      apply(editHistoryRow(state, course, target.value));
    }
  });

  el("candidate-panel").addEventListener("change", (ev) => {
    const target = ev.target as HTMLInputElement;
    const course = target.getAttribute("data-candidate");
    if (course) {
      apply(toggleCandidate(state, course));
    }
  });

  el("algo-user").addEventListener("change", () => {
    state = setAlgorithm(state, "user_based");
    paint();
  });
  el("algo-item").addEventListener("change", () => {
    state = setAlgorithm(state, "item_based");
    paint();
  });
  el("model-id").addEventListener("change", (ev) => {
    state = setModelId(state, (ev.target as HTMLInputElement).value.trim() || null);
    paint();
  });
  el("k-select").addEventListener("change", (ev) => {
    const raw = (ev.target as HTMLSelectElement).value;
    const k: KChoice = raw === "all" ? "all" : Number(raw);
    state = setK(state, k);
    paint();
  });

  el("refresh").addEventListener("click", () => void refresh());
  el("error-panel").addEventListener("click", (ev) => {
    if ((ev.target as HTMLElement).getAttribute("data-action") === "retry") {
      void refresh();
    }
  });

  el("pin").addEventListener("click", () => {
    apply(pinCurrent(state));
  });
  el("pin-panel").addEventListener("click", (ev) => {
    const idx = (ev.target as HTMLElement).getAttribute("data-unpin");
    if (idx !== null) {
      state = removePin(state, Number(idx));
      paint();
    }
  });
}

async function boot(): Promise<void> {
  wire();
  paint();
  try {
    const [scale, courseList] = await Promise.all([
      client.currentScale(),
      client.courses(),
    ]);
    state = { ...state, scale, courses: courseList.courses };
  } catch (err) {
    state = {
      ...state,
      serviceError: err instanceof ServiceError ? err.message : String(err),
    };
  }
  paint();
}

void boot();
