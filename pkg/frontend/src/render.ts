// Pure HTML renderers, one per screen. Strings only — the browser glue in
// main.ts injects them — so every screen renders exactly what the API
// returned and nothing else.

import type {
  DoctorView,
  HistoryEntryView,
  NotificationView,
  ScheduleView,
  SlotView,
  SpecialtyView,
} from "./types";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderLogin(error?: string): string {
  const notice = error ? `<p class="error">${escapeHtml(error)}</p>` : "";
  return `
<section class="login">
  <h1>Clinic appointments</h1>
  ${notice}
  <form id="login-form">
    <input name="username" placeholder="username" autocomplete="username">
    <input name="credential" type="password" placeholder="password" autocomplete="current-password">
    <button type="submit" data-action="login">Log in</button>
    <button type="button" data-action="signup">Sign up</button>
  </form>
</section>`;
}

export function renderWelcome(username: string): string {
  return `
<section class="welcome">
  <h1>Welcome, ${escapeHtml(username)}</h1>
  <div class="tiles">
    <button class="tile" data-nav="by_day">Appointment by day</button>
    <button class="tile" data-nav="by_specialty">Appointment by specialty</button>
    <button class="tile" data-nav="history">Appointment history</button>
  </div>
  <button data-nav="inbox">Notifications</button>
</section>`;
}

export function renderSpecialties(specialties: SpecialtyView[]): string {
  const rows = specialties
    .map(
      (s) =>
        `<li><button data-specialty="${escapeHtml(s.specialty_id)}">` +
        `${escapeHtml(s.name)} (${s.doctor_count} doctors)</button></li>`,
    )
    .join("");
  return `<section class="specialties"><h2>Specialties</h2><ul>${rows}</ul></section>`;
}

export function renderDoctors(doctors: DoctorView[]): string {
  const rows = doctors
    .map(
      (d) =>
        `<li><button data-doctor="${escapeHtml(d.doctor_id)}">` +
        `${escapeHtml(d.name)} — ${escapeHtml(d.specialty)}` +
        `${d.on_duty ? "" : " (off duty)"}</button></li>`,
    )
    .join("");
  return `<section class="doctors"><h2>Doctors</h2><ul>${rows}</ul></section>`;
}

export function renderSchedule(schedule: ScheduleView): string {
  const slots = schedule.slots
    .map(
      (s) =>
        `<li><button data-slot="${escapeHtml(s.slot_id)}">` +
        `${escapeHtml(s.time)} · ${s.duration_minutes} min</button></li>`,
    )
    .join("");
  const status = schedule.on_duty ? "on duty" : "off duty";
  return `
<section class="schedule">
  <h2>${escapeHtml(schedule.name)} — ${escapeHtml(schedule.specialty)} (${status})</h2>
  <p>${escapeHtml(schedule.date)} · ${schedule.slots.length} free slots</p>
  <ul class="slots">${slots}</ul>
</section>`;
}

export function renderConfirm(slot: SlotView, remainingSeconds: number): string {
  const disabled = remainingSeconds === 0 ? " disabled" : "";
  return `
<section class="confirm">
  <h2>Confirm your slot</h2>
  <p>${escapeHtml(slot.date)} at ${escapeHtml(slot.time)} (${slot.duration_minutes} min)
     with ${escapeHtml(slot.doctor_id)}</p>
  <p class="countdown" data-remaining="${remainingSeconds}">${remainingSeconds}s to confirm</p>
  <button data-action="confirm"${disabled}>Confirm appointment</button>
  <button data-action="back">Pick another slot</button>
</section>`;
}

export function renderAppointmentCard(appointmentId: string, slot: SlotView): string {
  return `
<section class="appointment-card">
  <h2>Appointment confirmed</h2>
  <p>${escapeHtml(slot.date)} at ${escapeHtml(slot.time)} with ${escapeHtml(slot.doctor_id)}</p>
  <button data-cancel="${escapeHtml(appointmentId)}">Cancel this appointment</button>
</section>`;
}

export function renderInbox(notifications: NotificationView[]): string {
  if (notifications.length === 0) {
    return `<section class="inbox"><h2>Notifications</h2><p class="empty">Nothing yet.</p></section>`;
  }
  const rows = notifications
    .map((n) => {
      const slot = n.payload["slot_id"] ? ` · slot ${escapeHtml(n.payload["slot_id"])}` : "";
      const offer =
        n.kind === "offer" && n.payload["ticket_id"]
          ? ` <button data-offer-ticket="${escapeHtml(n.payload["ticket_id"])}">Take it</button>`
          : "";
      return `<li class="notification ${escapeHtml(n.kind)}">[${escapeHtml(n.kind)}]${slot}${offer}</li>`;
    })
    .join("");
  return `<section class="inbox"><h2>Notifications</h2><ul>${rows}</ul></section>`;
}

export function renderHistory(entries: HistoryEntryView[]): string {
  if (entries.length === 0) {
    return `<section class="history"><h2>History</h2><p class="empty">No visits recorded.</p></section>`;
  }
  const rows = entries
    .map(
      (e) =>
        `<li>${escapeHtml(e.recorded_at)} · ${escapeHtml(e.clinic_id)}: ${escapeHtml(e.summary)}</li>`,
    )
    .join("");
  return `<section class="history"><h2>History</h2><ol>${rows}</ol></section>`;
}

export function renderDoctorPanel(doctorId: string, summary?: string): string {
  const result = summary ? `<p class="postpone-result">${escapeHtml(summary)}</p>` : "";
  return `
<section class="doctor-panel">
  <h2>Doctor panel — ${escapeHtml(doctorId)}</h2>
  <form id="postpone-form">
    <label>From <input type="datetime-local" name="window_from"></label>
    <label>To <input type="datetime-local" name="window_to"></label>
    <button type="submit" data-action="postpone">Postpone window</button>
  </form>
  ${result}
</section>`;
}

export function renderToast(kind: "info" | "error", text: string): string {
  return `<div class="toast ${kind}">${escapeHtml(text)}</div>`;
}
