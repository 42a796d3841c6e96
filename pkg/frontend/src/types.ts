// Wire types mirroring the backend's JSON bodies exactly.

export interface SlotView {
  slot_id: string;
  doctor_id: string;
  start: string; // RFC 3339
  date: string;
  time: string;
  duration_minutes: number;
  state: string;
  hour_position: number;
}

export interface SpecialtyView {
  specialty_id: string;
  name: string;
  doctor_count: number;
}

export interface DoctorView {
  doctor_id: string;
  name: string;
  specialty_id: string;
  specialty: string;
  on_duty: boolean;
}

export interface ScheduleView {
  doctor_id: string;
  name: string;
  specialty_id: string;
  specialty: string;
  on_duty: boolean;
  date: string;
  slots: SlotView[];
}

export interface SessionView {
  token: string;
  role: "patient" | "doctor";
  account_id: string;
  doctor_id: string | null;
}

export interface HoldView {
  ticket_id: string;
  slot_id: string;
  patient_id: string;
  issued_at: string;
  expires_at: string;
}

export interface AppointmentView {
  appointment_id: string;
  patient_id: string;
  doctor_id: string;
  slot_id: string;
  start: string;
  state: string;
  recorded_at: string;
}

export interface OfferView {
  request_id: string;
  slot_id: string;
  patient_id: string;
}

export interface CancelOutcome {
  cancelled: string;
  freed_slot: string;
  cause: string;
  offers: OfferView[];
}

export interface PostponeOutcome {
  released: number;
  retired: number;
  notified_patients: string[];
  offers: OfferView[];
}

export interface RequestOutcome {
  request_id: string;
  priority: string;
  candidates: SlotView[];
}

export interface NotificationView {
  id: string;
  kind: "reminder" | "slot_available" | "postponement" | "offer";
  recipient: string;
  due_at: string;
  payload: Record<string, unknown>;
}

export interface HistoryEntryView {
  entry_id: string;
  appointment_id: string;
  clinic_id: string;
  summary: string;
  recorded_at: string;
}
