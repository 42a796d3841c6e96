// Typed client for the scheduling API. The fetch function is injectable so
// tests can stub the transport; every error body {code, message} surfaces as
// an ApiError the screens can branch on (409 SLOT_TAKEN, 410 HOLD_EXPIRED...).

import type {
  AppointmentView,
  CancelOutcome,
  DoctorView,
  HistoryEntryView,
  HoldView,
  NotificationView,
  PostponeOutcome,
  RequestOutcome,
  ScheduleView,
  SessionView,
  SlotView,
  SpecialtyView,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private token: string | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  setToken(token: string | null) {
    this.token = token;
  }

  get authenticated(): boolean {
    return this.token !== null;
  }

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["X-Session-Token"] = this.token;
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "HTTP_ERROR";
      let message = `${response.status}`;
      try {
        const parsed = (await response.json()) as { code?: string; message?: string; detail?: unknown };
        code = parsed.code ?? code;
        message = parsed.message ?? JSON.stringify(parsed.detail ?? parsed);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  // -- accounts ------------------------------------------------------------

  async signup(username: string, credential: string): Promise<{ patient_id: string }> {
    return this.call("POST", "/signup", { username, credential });
  }

  async login(username: string, credential: string): Promise<SessionView> {
    const session = await this.call<SessionView>("POST", "/login", { username, credential });
    this.token = session.token;
    return session;
  }

  logout() {
    this.token = null;
  }

  // -- catalog ---------------------------------------------------------- --

  specialties(): Promise<SpecialtyView[]> {
    return this.call("GET", "/specialties");
  }

  doctors(specialty?: string): Promise<DoctorView[]> {
    const query = specialty ? `?specialty=${encodeURIComponent(specialty)}` : "";
    return this.call("GET", `/doctors${query}`);
  }

  schedule(doctorId: string, date: string): Promise<ScheduleView> {
    return this.call("GET", `/doctors/${encodeURIComponent(doctorId)}/schedule?date=${date}`);
  }

  slots(doctorId: string, from: string, to: string): Promise<SlotView[]> {
    const query = `?from=${encodeURIComponent(from)}&to=${encodeURIComponent(to)}`;
    return this.call("GET", `/doctors/${encodeURIComponent(doctorId)}/slots${query}`);
  }

  // -- booking ------------------------------------------------------------

  hold(slotId: string): Promise<HoldView> {
    return this.call("POST", `/slots/${encodeURIComponent(slotId)}/hold`);
  }

  confirm(ticketId: string): Promise<AppointmentView> {
    return this.call("POST", `/holds/${encodeURIComponent(ticketId)}/confirm`);
  }

  cancel(appointmentId: string): Promise<CancelOutcome> {
    return this.call("DELETE", `/appointments/${encodeURIComponent(appointmentId)}`);
  }

  postpone(doctorId: string, windowFrom: string, windowTo: string): Promise<PostponeOutcome> {
    return this.call("POST", `/doctors/${encodeURIComponent(doctorId)}/postpone`, {
      window_from: windowFrom,
      window_to: windowTo,
    });
  }

  submitRequest(
    kind: "by_day" | "by_specialty" | "by_doctor",
    value: string,
    priority: string,
  ): Promise<RequestOutcome> {
    return this.call("POST", "/requests", { filter: { kind, value }, priority });
  }

  // -- inbox & history ------------------------------------------------------

  notifications(patientId: string): Promise<NotificationView[]> {
    return this.call("GET", `/patients/${encodeURIComponent(patientId)}/notifications`);
  }

  history(patientId: string): Promise<HistoryEntryView[]> {
    return this.call("GET", `/patients/${encodeURIComponent(patientId)}/history`);
  }

  routes(): Promise<unknown[]> {
    return this.call("GET", "/routes");
  }
}
