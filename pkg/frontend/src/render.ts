/**
 * HTML renderers. Every function returns a markup string; the browser glue
 * in app.ts assigns them to innerHTML. Keeping these as pure string
 * builders means the badge and staleness rules are testable in node.
 *
 * The ranking is rendered in exactly the order the service returned it.
 * There is deliberately no sorting here: the service owns tie-breaks.
 */

import type { DeltaRow } from "./state.js";
import type { CourseInfo, FallbackLevel, HistoryRow, Pin, WirePrediction } from "./types.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function fmtPoints(v: number): string {
  return v.toFixed(2);
}

const FALLBACK_LABELS: Record<FallbackLevel, string> = {
  none: "",
  user_mean: "student mean",
  item_mean: "course mean",
  global_mean: "global mean",
};

/** Badges for one prediction: fallback level, evidence warning, neighborhood. */
export function predictionBadges(p: WirePrediction): string {
  const badges: string[] = [];
  if (p.fallback_level !== "none") {
    badges.push(
      `<span class="badge badge-fallback badge-${p.fallback_level}">` +
        `${FALLBACK_LABELS[p.fallback_level]}</span>`,
    );
  }
  if (p.fallback_level === "global_mean") {
    badges.push(`<span class="badge badge-warn">low evidence</span>`);
  }
  badges.push(
    `<span class="badge badge-n" title="neighbors used">n=${p.neighborhood_size_used}</span>`,
  );
  if (p.clamped) {
    badges.push(`<span class="badge badge-clamped" title="raw ${p.raw_value}">clamped</span>`);
  }
  return badges.join(" ");
}

export function renderRanking(
  predictions: WirePrediction[] | null,
  stale: boolean,
): string {
  if (predictions === null) {
    return `<p class="empty">No predictions yet. Add grades, tick candidates, then refresh.</p>`;
  }
  if (predictions.length === 0) {
    return `<p class="empty">No candidate courses selected. Tick some electives to rank.</p>`;
  }
  const items = predictions
    .map(
      (p) =>
        `<li><span class="course">${escapeHtml(p.course_id)}</span>` +
        `<span class="points">${fmtPoints(p.value)}</span> ${predictionBadges(p)}</li>`,
    )
    .join("");
  const notice = stale
    ? `<p class="stale-notice">History changed since these were computed. Refresh.</p>`
    : "";
  return `<div class="ranking${stale ? " stale" : ""}">${notice}<ol>${items}</ol></div>`;
}

export function renderHistory(rows: HistoryRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty">No grades yet. Add the courses you have taken.</p>`;
  }
  const body = rows
    .map(
      (r) =>
        `<tr><td>${escapeHtml(r.courseId)}</td>` +
        `<td><input class="grade-input" data-course="${escapeHtml(r.courseId)}" ` +
        `value="${escapeHtml(r.label)}"></td>` +
        `<td>${fmtPoints(r.gradePoints)}</td>` +
        `<td><button data-remove="${escapeHtml(r.courseId)}">remove</button></td></tr>`,
    )
    .join("");
  return (
    `<table class="history"><thead><tr><th>course</th><th>grade</th>` +
    `<th>points</th><th></th></tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderCandidates(
  courses: CourseInfo[],
  selected: string[],
  historyCourses: string[],
): string {
  if (courses.length === 0) {
    return `<p class="empty">Courses not loaded.</p>`;
  }
  const taken = new Set(historyCourses);
  return courses
    .map((c) => {
      const inHistory = taken.has(c.course_id);
      const checked = selected.includes(c.course_id) ? " checked" : "";
      const disabled = inHistory ? " disabled" : "";
      const note = inHistory ? ` <small>(in history)</small>` : "";
      return (
        `<label class="candidate"><input type="checkbox" ` +
        `data-candidate="${escapeHtml(c.course_id)}"${checked}${disabled}> ` +
        `${escapeHtml(c.course_id)} <small>term ${c.term}</small>${note}</label>`
      );
    })
    .join("");
}

export function renderError(message: string | null): string {
  if (message === null) {
    return "";
  }
  return (
    `<div class="error-banner">${escapeHtml(message)} ` +
    `<button data-action="retry">retry</button></div>`
  );
}

export function renderPins(pins: Pin[]): string {
  if (pins.length === 0) {
    return `<p class="empty">Pin a scenario to compare it against another.</p>`;
  }
  return pins
    .map(
      (p, i) =>
        `<div class="pin"><strong>${escapeHtml(p.label)}</strong> ` +
        `<small>${p.algorithm}, k=${p.k}, ${p.history.length} grades, ` +
        `${p.predictions.length} candidates</small> ` +
        `<button data-unpin="${i}">unpin</button></div>`,
    )
    .join("");
}

export function renderPinDelta(
  leftLabel: string,
  rightLabel: string,
  rows: DeltaRow[],
): string {
  const body = rows
    .map((r) => {
      const delta =
        r.delta === null
          ? "-"
          : `<span class="${r.delta >= 0 ? "up" : "down"}">${r.delta >= 0 ? "+" : ""}${r.delta.toFixed(3)}</span>`;
      return (
        `<tr><td>${escapeHtml(r.course_id)}</td>` +
        `<td>${r.left === null ? "-" : fmtPoints(r.left)}</td>` +
        `<td>${r.right === null ? "-" : fmtPoints(r.right)}</td>` +
        `<td>${delta}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="delta"><thead><tr><th>course</th>` +
    `<th>${escapeHtml(leftLabel)}</th><th>${escapeHtml(rightLabel)}</th>` +
    `<th>delta</th></tr></thead><tbody>${body}</tbody></table>`
  );
}
