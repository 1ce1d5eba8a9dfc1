// Shapes of the control-plane API payloads the dashboard consumes.
// The dashboard never computes metrics; every number rendered comes from
// one of these responses.

export type TestKind = "SACCADE_LATENCY" | "SMOOTH_PURSUIT" | "VOR";

export interface ExamConfigDraft {
  test_kind: string;
  duration_s: number;
  sample_rate_hz: number;
  eccentricity_deg: number;
  travel_deg: number;
  period_s: number;
  isi_min_s: number;
  isi_max_s: number;
  trial_timeout_s: number;
  center_dwell_s: number;
  target_radius_m: number;
  target_distance_m: number;
  seed: number;
}

export interface Patient {
  id: string;
  display_name: string;
  created_at: string;
}

export interface StreamEvent {
  kind: string;
  t: number;
  side: string;
  latency_s: number | null;
}

export interface StreamRecord {
  t: number;
  target_yaw: number;
  error_left: number;
  error_right: number;
  error_cyclopean: number;
  gaze_yaw: number;
  head_yaw: number;
}

export interface StreamChunk {
  session_id: string;
  events: StreamEvent[];
  records: StreamRecord[];
  next_cursor: string;
  finished: boolean;
  error?: string;
}

export interface SessionReport {
  test_kind: TestKind;
  latency_mean_s: number | null;
  latency_sd_s: number | null;
  miss_count: number | null;
  precision_rms_deg: number | null;
  precision_rms_left_deg: number | null;
  precision_rms_right_deg: number | null;
  pursuit_gain_est: number | null;
  vor_cycles: number | null;
  vor_freq_hz: number | null;
  vor_gain_proxy: number | null;
  head_speed_mean_dps: number | null;
  head_speed_peak_dps: number | null;
  flags: Record<string, string>;
  overall: string;
}

export interface SessionResource {
  session_id: string;
  status: "running" | "finished" | "failed";
  patient_id?: string;
  started_at?: string;
  report?: SessionReport;
  records?: Record<string, number[]>;
  error?: string;
}

export interface TrendPoint {
  started_at: string;
  value: number;
}

export interface TrendResponse {
  patient_id: string;
  metric: string;
  points: TrendPoint[];
}

export interface ProgressResponse {
  student_id: string;
  completed: string[];
  available: Record<string, string[]>;
}
