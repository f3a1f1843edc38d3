// Wire types mirror the service's JSON exactly (snake_case and all);
// session types are the client's own.

export type Algorithm = "user_based" | "item_based";
export type KChoice = number | "all";
export type FallbackLevel = "none" | "user_mean" | "item_mean" | "global_mean";

export interface ScaleInfo {
  mapping: Record<string, number>;
  min_points: number;
  max_points: number;
  aliases: string[];
}

export interface DatasetInfo {
  dataset_id: string;
  fingerprint: string;
  n_students: number;
  n_courses: number;
  n_ratings: number;
  scale: ScaleInfo;
  current: boolean;
}

export interface CourseInfo {
  course_id: string;
  term: number;
  n_ratings: number;
  mean_points: number;
}

export interface WirePrediction {
  course_id: string;
  value: number;
  raw_value: number;
  fallback_level: FallbackLevel;
  neighborhood_size_used: number;
  clamped: boolean;
}

export interface WhatIfRequest {
  algorithm: Algorithm;
  grade_history: { course_id: string; grade_points: number }[];
  candidate_courses: string[];
  k: KChoice;
  model_id?: string;
}

export interface WhatIfResponse {
  dataset_id: string;
  algorithm: Algorithm;
  k: KChoice;
  model_id: string | null;
  predictions: WirePrediction[];
}

// -- session ---------------------------------------------------------------

export interface HistoryRow {
  courseId: string;
  gradePoints: number;
  /** The token as entered ("A-" or "3.7"), kept for display. */
  label: string;
}

export interface Pin {
  label: string;
  algorithm: Algorithm;
  k: KChoice;
  history: HistoryRow[];
  predictions: WirePrediction[];
}

export interface SessionState {
  scale: ScaleInfo | null;
  courses: CourseInfo[];
  history: HistoryRow[];
  candidates: string[];
  algorithm: Algorithm;
  k: KChoice;
  modelId: string | null;
  /** Latest applied predictions, in the exact order the service returned. */
  predictions: WirePrediction[] | null;
  /** Signature of the query those predictions answer; null before any. */
  servedSignature: string | null;
  /** Bumped when a refresh is issued; responses to older epochs are dropped. */
  requestEpoch: number;
  servedEpoch: number;
  serviceError: string | null;
  pins: Pin[];
}
