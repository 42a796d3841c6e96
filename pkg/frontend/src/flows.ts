// Screen controllers. BookingFlow mirrors the booking procedure end to end:
// pick a doctor directly (by day) or via specialty, read the schedule, hold a
// slot, confirm inside the TTL. A 409/410 on hold/confirm refreshes the slot
// list and sends the user back to picking.

import { ApiClient, ApiError } from "./api";
import { HoldCountdown } from "./countdown";
import { SLOT_CACHE_FRESH_MS, ViewStore } from "./state";
import type {
  AppointmentView,
  DoctorView,
  HoldView,
  ScheduleView,
  SlotView,
  SpecialtyView,
} from "./types";

export type BookingOutcome =
  | { kind: "booked"; appointment: AppointmentView }
  | { kind: "retry"; reason: string; slots: SlotView[] }
  | { kind: "held"; hold: HoldView };

export class BookingFlow {
  doctor: DoctorView | null = null;
  schedule: ScheduleView | null = null;
  hold: HoldView | null = null;
  countdown: HoldCountdown | null = null;
  appointment: AppointmentView | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly store: ViewStore,
    private readonly clock: () => number = Date.now,
  ) {}

  private scheduleKey(doctorId: string, date: string): string {
    return `${doctorId}:${date}`;
  }

  async listSpecialties(): Promise<SpecialtyView[]> {
    return this.api.specialties();
  }

  async listDoctors(specialty?: string): Promise<DoctorView[]> {
    return this.api.doctors(specialty);
  }

  pickDoctor(doctor: DoctorView) {
    this.doctor = doctor;
    this.schedule = null;
    this.hold = null;
    this.countdown = null;
  }

  /** Fetch (or re-fetch) the day's free slots; every fetch refreshes the cache. */
  async loadSchedule(date: string): Promise<ScheduleView> {
    if (!this.doctor) throw new Error("pick a doctor first");
    const schedule = await this.api.schedule(this.doctor.doctor_id, date);
    this.schedule = schedule;
    this.store.cacheSlots(this.scheduleKey(schedule.doctor_id, date), schedule.slots, this.clock());
    return schedule;
  }

  /** Hold one slot. A stale cached list is re-fetched first; if the slot is
   * gone by then (or sniped), the caller gets a retry with the fresh list. */
  async selectSlot(slotId: string): Promise<BookingOutcome> {
    if (!this.doctor || !this.schedule) throw new Error("no schedule loaded");
    const date = this.schedule.date;
    const key = this.scheduleKey(this.doctor.doctor_id, date);
    if (!this.store.isFresh(key, this.clock(), SLOT_CACHE_FRESH_MS)) {
      await this.loadSchedule(date);
      if (!this.schedule.slots.some((s) => s.slot_id === slotId)) {
        return { kind: "retry", reason: "SLOT_GONE", slots: this.schedule.slots };
      }
    }
    try {
      const hold = await this.api.hold(slotId);
      this.hold = hold;
      this.countdown = new HoldCountdown(hold.expires_at, this.clock);
      return { kind: "held", hold };
    } catch (error) {
      if (error instanceof ApiError && (error.status === 409 || error.status === 410)) {
        const schedule = await this.loadSchedule(date);
        return { kind: "retry", reason: error.code, slots: schedule.slots };
      }
      throw error;
    }
  }

  /** Confirm the live hold. Locally refused once the countdown hits zero. */
  async confirmHold(): Promise<BookingOutcome> {
    if (!this.hold || !this.countdown || !this.schedule) throw new Error("nothing held");
    const date = this.schedule.date;
    if (this.countdown.expired()) {
      const schedule = await this.loadSchedule(date);
      this.hold = null;
      this.countdown = null;
      return { kind: "retry", reason: "HOLD_EXPIRED", slots: schedule.slots };
    }
    try {
      const appointment = await this.api.confirm(this.hold.ticket_id);
      this.appointment = appointment;
      this.hold = null;
      this.countdown = null;
      await this.loadSchedule(date); // booked slot drops out of the rendered list
      return { kind: "booked", appointment };
    } catch (error) {
      if (error instanceof ApiError && (error.status === 409 || error.status === 410)) {
        const schedule = await this.loadSchedule(date);
        this.hold = null;
        this.countdown = null;
        return { kind: "retry", reason: error.code, slots: schedule.slots };
      }
      throw error;
    }
  }

  async cancelAppointment(appointmentId: string) {
    const outcome = await this.api.cancel(appointmentId);
    if (this.appointment?.appointment_id === appointmentId) this.appointment = null;
    return outcome;
  }
}

export class DoctorPanel {
  constructor(private readonly api: ApiClient) {}

  /** Postpone a window; returns the summary line the panel shows. */
  async postpone(doctorId: string, windowFrom: string, windowTo: string) {
    const outcome = await this.api.postpone(doctorId, windowFrom, windowTo);
    const affected = outcome.notified_patients.length;
    const summary =
      affected === 0
        ? "0 affected"
        : `${affected} patient${affected === 1 ? "" : "s"} notified`;
    return { outcome, summary };
  }
}
