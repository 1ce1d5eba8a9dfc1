// Config-form state helpers: read a draft from input elements and surface
// per-field validation messages. Kept DOM-light so the logic is testable.

import type { ExamConfigDraft } from "./types.js";
import { CONFIG_DEFAULTS, validateConfig } from "./validation.js";

export const NUMERIC_FIELDS: (keyof ExamConfigDraft)[] = [
  "duration_s",
  "sample_rate_hz",
  "eccentricity_deg",
  "travel_deg",
  "period_s",
  "isi_min_s",
  "isi_max_s",
  "trial_timeout_s",
  "center_dwell_s",
  "target_radius_m",
  "target_distance_m",
  "seed",
];

export function draftFromValues(values: Record<string, string>): ExamConfigDraft {
  const draft: ExamConfigDraft = { ...CONFIG_DEFAULTS };
  draft.test_kind = values["test_kind"] ?? draft.test_kind;
  for (const field of NUMERIC_FIELDS) {
    const raw = values[field];
    if (raw !== undefined && raw !== "") {
      (draft as unknown as Record<string, number>)[field] = Number(raw);
    }
  }
  return draft;
}

/** field -> message for every offending field ("" key = form-level). */
export function fieldErrors(draft: ExamConfigDraft): Record<string, string> {
  const out: Record<string, string> = {};
  for (const field of validateConfig(draft)) {
    if (field === "isi_min_s/isi_max_s") {
      out["isi_min_s"] = "need 0 < min ≤ max";
      out["isi_max_s"] = "need 0 < min ≤ max";
    } else if (field === "sample_rate_hz") {
      out[field] = "must be within 60–120 Hz";
    } else if (field === "target_distance_m") {
      out[field] = "must exceed the target radius";
    } else {
      out[field] = "invalid value";
    }
  }
  for (const field of NUMERIC_FIELDS) {
    if (Number.isNaN((draft as unknown as Record<string, number>)[field])) {
      out[field] = "not a number";
    }
  }
  return out;
}
