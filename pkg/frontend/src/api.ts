/** Thin typed client for the session service under /v1. */

import { TreatmentPlan } from "./level.js";

export interface SessionTicket {
  session_id: string;
  patient_id: string;
  plan_id: string;
  level_index: number;
  theta_s: number;
  trials_per_session: number;
  st_s: number;
  layout_seed: number;
}

export type EventKind =
  | "target_hit"
  | "non_target_hit"
  | "trial_timeout"
  | "player_quit";

export interface GameEvent {
  kind: EventKind;
  at_s: number;
  position?: [number, number];
}

export interface Tally {
  c: number;
  oe: number;
  ce: number;
  k: number;
}

export interface EventAck {
  session_id: string;
  phase: "idle" | "briefing" | "in-trial" | "ended";
  trial_index: number | null;
  trial_start_s: number | null;
  closed: {
    index: number;
    outcome: { kind: string; crt_s?: number; elapsed_s?: number };
    started_at_s: number;
    ended_at_s: number;
  } | null;
  tally: Tally;
}

export interface MetricsDoc {
  t: number;
  c: number;
  i: number;
  k: number;
  oe: number;
  ce: number;
  m_s: number | null;
  sd_s: number | null;
  gf: number;
  iaf: number;
  imf: number;
  ef: number;
  crf: number;
  pi: number;
  theta_s: number;
  gt_s: number;
  st_s: number;
}

export interface FinalizeResponse {
  report: {
    session_id: string;
    patient_id: string;
    metrics: MetricsDoc;
    gt_over_st: number;
    progression?: ProgressionDoc;
  };
  progression: ProgressionDoc;
}

export interface ProgressionDoc {
  action: "advance" | "hold" | "regress";
  new_level: number;
  mean_pi: number | null;
  window_used: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`service returned ${status}: ${JSON.stringify(detail)}`);
  }
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}/v1${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const parsed = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, parsed?.detail ?? parsed);
    }
    return parsed as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  getPatient(patientId: string): Promise<{ patient_id: string; current_level: number }> {
    return this.request("GET", `/patients/${encodeURIComponent(patientId)}`);
  }

  createPatient(patientId: string): Promise<unknown> {
    return this.request("POST", "/patients", {
      schema_version: 1,
      patient_id: patientId,
      current_level: 1,
    });
  }

  suggestedPlan(patientId?: string): Promise<TreatmentPlan> {
    const query = patientId ? `?patient_id=${encodeURIComponent(patientId)}` : "";
    return this.request("GET", `/plans/suggested${query}`);
  }

  getPlan(planId: string): Promise<TreatmentPlan> {
    return this.request("GET", `/plans/${encodeURIComponent(planId)}`);
  }

  openSession(patientId: string, planId: string): Promise<SessionTicket> {
    return this.request("POST", "/sessions", {
      patient_id: patientId,
      plan_id: planId,
    });
  }

  postEvent(sessionId: string, event: GameEvent): Promise<EventAck> {
    return this.request("POST", `/sessions/${sessionId}/events`, event);
  }

  finalize(sessionId: string): Promise<FinalizeResponse> {
    return this.request("POST", `/sessions/${sessionId}/finalize`);
  }
}
