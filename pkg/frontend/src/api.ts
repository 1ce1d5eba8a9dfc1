// Thin fetch client for the control-plane API.

import type {
  Patient,
  ProgressResponse,
  SessionResource,
  StreamChunk,
  TrendResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, payload.error ?? resp.statusText);
    }
    return payload as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  listPatients(): Promise<{ patients: Patient[] }> {
    return this.request("GET", "/patients");
  }

  createPatient(displayName: string): Promise<Patient> {
    return this.request("POST", "/patients", { display_name: displayName });
  }

  startRun(body: unknown): Promise<{ session_id: string; status: string }> {
    return this.request("POST", "/runs", body);
  }

  getSession(sessionId: string): Promise<SessionResource> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  streamChunk(sessionId: string, cursor: string): Promise<StreamChunk> {
    return this.request("GET", `/sessions/${sessionId}/stream?cursor=${cursor}`);
  }

  trend(patientId: string, metric: string): Promise<TrendResponse> {
    return this.request("GET", `/patients/${patientId}/trends?metric=${metric}`);
  }

  progress(studentId: string): Promise<ProgressResponse> {
    return this.request("GET", `/pedagogy/progress/${studentId}`);
  }

  completeNode(studentId: string, topic: string, component?: string): Promise<ProgressResponse> {
    return this.request("POST", `/pedagogy/progress/${studentId}`, { topic, component });
  }
}
