// Dashboard wiring: configure and launch runs, watch them live, inspect
// reports, trends, and the learning path. All numbers come from the API.

import { ApiClient, ApiError } from "./api.js";
import { lineChart, placeholder, trendChart } from "./charts.js";
import { NUMERIC_FIELDS, draftFromValues, fieldErrors } from "./form.js";
import { pollSession, type StreamState } from "./stream.js";
import { TEST_KINDS } from "./validation.js";
import type { SessionResource } from "./types.js";

const params = new URLSearchParams(location.search);
const api = new ApiClient(params.get("api") ?? "http://127.0.0.1:8765");

const $ = (id: string) => document.getElementById(id)!;

function el(tag: string, attrs: Record<string, string> = {}, text = ""): HTMLElement {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    node.setAttribute(k, v);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function banner(message: string, kind: "error" | "ok" = "error"): void {
  const box = $("banner");
  box.textContent = message;
  box.className = message ? `banner ${kind}` : "banner";
}

// -- patients ----------------------------------------------------------------

async function refreshPatients(): Promise<void> {
  const select = $("patient") as HTMLSelectElement;
  const { patients } = await api.listPatients();
  select.innerHTML = "";
  for (const p of patients) {
    select.append(el("option", { value: p.id }, `${p.display_name} (${p.id})`));
  }
}

async function createPatient(): Promise<void> {
  const input = $("new-patient") as HTMLInputElement;
  if (!input.value.trim()) {
    banner("patient name must be non-empty");
    return;
  }
  try {
    await api.createPatient(input.value);
    input.value = "";
    banner("");
    await refreshPatients();
  } catch (err) {
    banner(err instanceof ApiError ? err.message : String(err));
  }
}

// -- config form --------------------------------------------------------------

function buildForm(): void {
  const form = $("config-fields");
  const kind = el("select", { id: "f-test_kind", name: "test_kind" }) as HTMLSelectElement;
  for (const k of TEST_KINDS) {
    kind.append(el("option", { value: k }, k));
  }
  kind.value = "SMOOTH_PURSUIT";
  form.append(labelled("test_kind", kind));
  const defaults: Record<string, string> = {
    duration_s: "20", sample_rate_hz: "120", eccentricity_deg: "15",
    travel_deg: "20", period_s: "3", isi_min_s: "2", isi_max_s: "5",
    trial_timeout_s: "5", center_dwell_s: "0", target_radius_m: "0.1",
    target_distance_m: "2", seed: "0",
  };
  for (const field of NUMERIC_FIELDS) {
    const input = el("input", {
      id: `f-${field}`, name: field, value: defaults[field] ?? "0", inputmode: "decimal",
    });
    form.append(labelled(field, input));
  }
  form.addEventListener("input", () => {
    validateForm();
  });
  validateForm();
}

function labelled(name: string, control: HTMLElement): HTMLElement {
  const wrap = el("div", { class: "field" });
  wrap.append(el("label", { for: `f-${name}` }, name), control,
              el("span", { class: "field-error", id: `e-${name}` }));
  return wrap;
}

function formValues(): Record<string, string> {
  const values: Record<string, string> = {};
  for (const node of $("config-fields").querySelectorAll("input,select")) {
    const input = node as HTMLInputElement;
    values[input.name] = input.value;
  }
  return values;
}

function validateForm(): boolean {
  const draft = draftFromValues(formValues());
  const errors = fieldErrors(draft);
  for (const node of $("config-fields").querySelectorAll(".field-error")) {
    node.textContent = "";
  }
  for (const [field, message] of Object.entries(errors)) {
    const slot = document.getElementById(`e-${field}`);
    if (slot) {
      slot.textContent = message;
    }
  }
  const ok = Object.keys(errors).length === 0;
  ($("run") as HTMLButtonElement).disabled = !ok;
  return ok;
}

// -- runs + live view -----------------------------------------------------------

function renderLive(state: StreamState): void {
  const t = state.records.map((r) => r.t);
  $("live-chart").innerHTML = lineChart(
    t,
    {
      "left eye": state.records.map((r) => r.error_left),
      "right eye": state.records.map((r) => r.error_right),
    },
    { title: "Focus precision (live)", xLabel: "time (s)", yLabel: "error (deg)" },
  );
  const log = $("event-log");
  log.innerHTML = "";
  for (const ev of state.events) {
    const latency = ev.latency_s == null ? "" : ` latency=${ev.latency_s.toFixed(3)}s`;
    log.append(el("li", {}, `${ev.t.toFixed(3)}s ${ev.kind} ${ev.side}${latency}`));
  }
}

function renderReport(session: SessionResource): void {
  const box = $("report");
  box.innerHTML = "";
  const report = session.report;
  if (!report) {
    box.append(el("p", {}, `session ${session.session_id}: ${session.status}`));
    return;
  }
  box.append(el("h3", {}, `Report ${session.session_id} — overall ${report.overall}`));
  const dl = el("dl");
  const rows: [string, number | null][] = [
    ["latency_mean_s", report.latency_mean_s],
    ["latency_sd_s", report.latency_sd_s],
    ["miss_count", report.miss_count],
    ["precision_rms_deg", report.precision_rms_deg],
    ["pursuit_gain_est", report.pursuit_gain_est],
    ["vor_cycles", report.vor_cycles],
    ["vor_freq_hz", report.vor_freq_hz],
    ["vor_gain_proxy", report.vor_gain_proxy],
    ["head_speed_peak_dps", report.head_speed_peak_dps],
  ];
  for (const [name, value] of rows) {
    if (value !== null && value !== undefined) {
      dl.append(el("dt", {}, name), el("dd", {}, String(value)));
    }
  }
  for (const [metric, flag] of Object.entries(report.flags)) {
    dl.append(el("dt", {}, `flag:${metric}`), el("dd", { class: `flag-${flag}` }, flag));
  }
  box.append(dl);
}

async function submitRun(): Promise<void> {
  if (!validateForm()) {
    return; // inline messages already shown; no request leaves the page
  }
  const patient = ($("patient") as HTMLSelectElement).value;
  const body = {
    patient_id: patient,
    test: draftFromValues(formValues()),
    subject: { preset: ($("preset") as HTMLSelectElement).value, seed: 0 },
    live: true,
  };
  banner("");
  try {
    const { session_id } = await api.startRun(body);
    $("live-title").textContent = `Live session ${session_id}`;
    const final = await pollSession(
      session_id,
      (sid, cursor) => api.streamChunk(sid, cursor),
      renderLive,
    );
    if (final.error) {
      banner(`run failed: ${final.error}`);
      return;
    }
    renderReport(await api.getSession(session_id));
    await refreshTrend();
  } catch (err) {
    banner(err instanceof ApiError ? err.message : String(err));
  }
}

// -- trends --------------------------------------------------------------------

async function refreshTrend(): Promise<void> {
  const patient = ($("patient") as HTMLSelectElement).value;
  const metric = ($("trend-metric") as HTMLSelectElement).value;
  if (!patient) {
    $("trend-chart").innerHTML = placeholder("Trend", "select a patient");
    return;
  }
  try {
    const trend = await api.trend(patient, metric);
    $("trend-chart").innerHTML = trendChart(trend.points, metric);
  } catch (err) {
    banner(err instanceof ApiError ? err.message : String(err));
  }
}

// -- learning path ----------------------------------------------------------------

async function refreshProgress(): Promise<void> {
  const student = ($("student") as HTMLInputElement).value || "student-1";
  const progress = await api.progress(student);
  const box = $("pedagogy");
  box.innerHTML = "";
  box.append(el("p", {}, `completed: ${progress.completed.join(", ") || "(none)"}`));
  for (const [topic, components] of Object.entries(progress.available)) {
    const row = el("div", { class: "topic" });
    row.append(el("strong", {}, topic));
    const targets = components.length ? components : [undefined];
    for (const component of targets) {
      const button = el(
        "button", {}, component ? `complete ${component}` : "complete topic",
      ) as HTMLButtonElement;
      button.addEventListener("click", async () => {
        try {
          await api.completeNode(student, topic, component);
          banner("");
          await refreshProgress();
        } catch (err) {
          banner(err instanceof ApiError ? err.message : String(err));
        }
      });
      row.append(button);
    }
    box.append(row);
  }
}

// -- boot -----------------------------------------------------------------------

async function boot(): Promise<void> {
  buildForm();
  $("create-patient").addEventListener("click", createPatient);
  $("run").addEventListener("click", submitRun);
  $("trend-metric").addEventListener("change", refreshTrend);
  $("patient").addEventListener("change", refreshTrend);
  $("refresh-progress").addEventListener("click", refreshProgress);
  try {
    await api.health();
    banner(`connected to ${api.baseUrl}`, "ok");
  } catch {
    banner(`cannot reach ${api.baseUrl} — start it with: oculab serve`);
    return;
  }
  await refreshPatients();
  await refreshTrend();
  await refreshProgress();
}

boot();
