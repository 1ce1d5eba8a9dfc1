// Client-side mirror of the server's exam-config validation: the form must
// reject exactly the drafts the server's ExamConfig rejects, with the same
// offending-field names, so no round trip is wasted on bad input.

import type { ExamConfigDraft } from "./types.js";

export const TEST_KINDS = ["SACCADE_LATENCY", "SMOOTH_PURSUIT", "VOR"];

export const CONFIG_DEFAULTS: ExamConfigDraft = {
  test_kind: "SMOOTH_PURSUIT",
  duration_s: 20.0,
  sample_rate_hz: 120.0,
  eccentricity_deg: 15.0,
  travel_deg: 20.0,
  period_s: 3.0,
  isi_min_s: 2.0,
  isi_max_s: 5.0,
  trial_timeout_s: 5.0,
  center_dwell_s: 0.0,
  target_radius_m: 0.1,
  target_distance_m: 2.0,
  seed: 0,
};

export function validateConfig(draft: ExamConfigDraft): string[] {
  const bad: string[] = [];
  if (!TEST_KINDS.includes(draft.test_kind)) {
    bad.push("test_kind");
  }
  if (!(draft.duration_s > 0)) {
    bad.push("duration_s");
  }
  if (!(draft.sample_rate_hz >= 60 && draft.sample_rate_hz <= 120)) {
    bad.push("sample_rate_hz");
  }
  if (!(draft.eccentricity_deg > 0)) {
    bad.push("eccentricity_deg");
  }
  if (!(draft.travel_deg > 0)) {
    bad.push("travel_deg");
  }
  if (!(draft.period_s > 0)) {
    bad.push("period_s");
  }
  if (!(draft.isi_min_s > 0 && draft.isi_min_s <= draft.isi_max_s)) {
    bad.push("isi_min_s/isi_max_s");
  }
  if (!(draft.trial_timeout_s > 0)) {
    bad.push("trial_timeout_s");
  }
  if (draft.center_dwell_s < 0) {
    bad.push("center_dwell_s");
  }
  if (!(draft.target_radius_m > 0)) {
    bad.push("target_radius_m");
  }
  if (!(draft.target_distance_m > draft.target_radius_m)) {
    bad.push("target_distance_m");
  }
  return bad;
}
