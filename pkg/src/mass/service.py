"""Facade wiring the registry, slot engine, request desk, and notifier.

This is the object the HTTP layer and CLI drive. Each public method sweeps
lapsed holds and past slots first, so TTL expiry and retirement behave as if
a background janitor ran; lapsed offer-holds put their requests back in the
pending queue.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path

from .desk import AppointmentRequest, PriorityClass, RequestFilter, SchedulingDesk
from .engine import DEFAULT_HOLD_TTL, SlotEngine, SlotOffer
from .errors import HoldExpired, InvalidFilter
from .notify import DEFAULT_REMINDER_LEADS, NotificationHub
from .registry import Appointment, AppointmentState, DoctorRecord, Registry, utcnow
from .slots import FreedSlotEvent, TimeSlot, WaveTemplate

MAX_QUERY_DAYS = 90


@dataclass(frozen=True)
class PostponeOutcome:
    events: list[FreedSlotEvent]
    offers: list[SlotOffer]
    notified_patients: list[str]
    retired_slots: int


class ClinicService:
    def __init__(
        self,
        data_dir: str | Path | None = None,
        *,
        hold_ttl: timedelta = DEFAULT_HOLD_TTL,
        template: WaveTemplate | None = None,
        reminder_leads=DEFAULT_REMINDER_LEADS,
        clock=utcnow,
        sinks=(),
        scrypt_n: int | None = None,
    ):
        path = Path(data_dir) / "registry.jsonl" if data_dir is not None else None
        self.clock = clock
        self.reminder_leads = tuple(reminder_leads)
        registry_options = {} if scrypt_n is None else {"scrypt_n": scrypt_n}
        self.registry = Registry(path, clock=clock, **registry_options)
        self.hub = NotificationHub(sinks=sinks)
        self.engine = SlotEngine(self.registry, self.hub, hold_ttl=hold_ttl, template=template)
        self.desk = SchedulingDesk(self.registry, self.engine)
        self._restore()

    def _restore(self):
        # rebuild booked slot state for appointments replayed from the journal
        for appointment in self.registry.active_appointments():
            self.engine.ensure_day(appointment.doctor_id, appointment.slot_start.date())

    def _now(self, now: datetime | None) -> datetime:
        return now or self.clock()

    def sweep(self, now: datetime | None = None):
        """Expire lapsed holds (requeueing their offers) and retire past slots."""
        now = self._now(now)
        expired = self.engine.expire_holds(now)
        self.desk.note_expired([e.ticket_id for e in expired])
        self.engine.retire_past(now)
        return expired

    # ------------------------------------------------------------------
    # accounts
    # ------------------------------------------------------------------

    def signup(self, username: str, credential: str, now: datetime | None = None) -> str:
        return self.registry.register_user(username, credential, self._now(now))

    def login(self, username: str, credential: str, now: datetime | None = None) -> str:
        return self.registry.authenticate(username, credential, self._now(now))

    def account_for(self, token: str, now: datetime | None = None):
        return self.registry.resolve_session(token, self._now(now))

    # ------------------------------------------------------------------
    # catalog
    # ------------------------------------------------------------------

    def specialties(self):
        return self.desk.list_specialties()

    def doctors(self, specialty_id: str | None = None):
        return self.desk.list_doctors(specialty_id)

    def doctor_schedule(self, doctor_id: str, day: date, now: datetime | None = None):
        self.sweep(now)
        return self.desk.get_doctor_schedule(doctor_id, day)

    def available_slots(
        self, doctor_id: str, start: datetime, end: datetime, now: datetime | None = None
    ) -> list[TimeSlot]:
        if end <= start:
            raise InvalidFilter("range end must be after its start")
        if end - start > timedelta(days=MAX_QUERY_DAYS):
            raise InvalidFilter(f"range wider than {MAX_QUERY_DAYS} days")
        self.sweep(now)
        day = start.date()
        last = (end - timedelta(microseconds=1)).date()  # end is exclusive
        while day <= last:
            self.engine.ensure_day(doctor_id, day)
            day += timedelta(days=1)
        return self.engine.establish_available(doctor_id, start, end)

    # ------------------------------------------------------------------
    # booking lifecycle
    # ------------------------------------------------------------------

    def hold_slot(self, slot_id: str, patient_id: str, now: datetime | None = None):
        now = self._now(now)
        self.sweep(now)
        self.registry.get_patient(patient_id)
        return self.engine.hold_slot(slot_id, patient_id, now)

    def confirm_hold(self, ticket_id: str, now: datetime | None = None) -> Appointment:
        # confirm before the sweep so a stale ticket reports HoldExpired,
        # not UnknownTicket; the engine lapses it and frees the slot itself
        now = self._now(now)
        try:
            appointment = self.engine.confirm_hold(ticket_id, now)
        except HoldExpired:
            self.desk.note_expired([ticket_id])
            self.sweep(now)
            raise
        self.desk.note_confirmed(ticket_id)
        self.hub.schedule_reminders(appointment, self.reminder_leads, now)
        self.sweep(now)
        return appointment

    def cancel_appointment(self, appointment_id: str, now: datetime | None = None):
        """Cancel and immediately re-dispatch the freed slot: best pending
        request gets an offer, otherwise the availability is broadcast."""
        now = self._now(now)
        self.sweep(now)
        event = self.engine.cancel_appointment(appointment_id, now)
        offers = self._match([event], now)
        return event, offers

    def postpone_doctor(
        self,
        doctor_id: str,
        window_start: datetime,
        window_end: datetime,
        now: datetime | None = None,
    ) -> PostponeOutcome:
        now = self._now(now)
        self.sweep(now)
        day = window_start.date()
        while day <= window_end.date():
            self.engine.ensure_day(doctor_id, day)
            day += timedelta(days=1)
        before = {s.slot_id: s.state for s in self.engine.slots_snapshot(doctor_id)}
        notified = [
            self.registry.get_appointment(s.appointment_id).patient_id
            for s in self.engine.slots_snapshot(doctor_id)
            if s.appointment_id and window_start <= s.start < window_end
        ]
        events = self.engine.postpone_doctor(doctor_id, window_start, window_end, now)
        after = self.engine.slots_snapshot(doctor_id)
        retired = sum(
            1 for s in after
            if s.state.value == "retired" and before.get(s.slot_id, s.state).value != "retired"
        )
        offers = self._match(events, now)
        return PostponeOutcome(events, offers, notified, retired)

    def _match(self, events: list[FreedSlotEvent], now: datetime) -> list[SlotOffer]:
        offers = self.engine.match_freed_slots(events, self.desk.pending_queue_snapshot(), now)
        self.desk.note_offered(offers)
        return offers

    # ------------------------------------------------------------------
    # requests
    # ------------------------------------------------------------------

    def submit_request(
        self,
        patient_id: str,
        request_filter: RequestFilter,
        priority: PriorityClass,
        now: datetime | None = None,
    ) -> tuple[str, list[TimeSlot]]:
        now = self._now(now)
        self.sweep(now)
        request_id = self.desk.submit_request(patient_id, request_filter, priority, now)
        return request_id, self.desk.resolve_request(request_id, today=now.date())

    def request_candidates(self, request_id: str, now: datetime | None = None) -> list[TimeSlot]:
        now = self._now(now)
        self.sweep(now)
        return self.desk.resolve_request(request_id, today=now.date())

    def pending_requests(self) -> list[AppointmentRequest]:
        return self.desk.pending_queue_snapshot()

    def withdraw_request(self, request_id: str):
        self.desk.withdraw_request(request_id)

    # ------------------------------------------------------------------
    # history & notifications
    # ------------------------------------------------------------------

    def record_visit(
        self, appointment_id: str, clinic_id: str, summary: str, now: datetime | None = None
    ):
        return self.registry.record_history(appointment_id, clinic_id, summary, self._now(now))

    def complete_appointment(self, appointment_id: str, outcome_note: str | None = None):
        return self.registry.set_appointment_state(
            appointment_id, AppointmentState.COMPLETED, outcome_note
        )

    def history(self, patient_id: str):
        return self.registry.fetch_history(patient_id)

    def notifications(self, patient_id: str, now: datetime | None = None):
        self.registry.get_patient(patient_id)
        return self.hub.inbox(patient_id, self._now(now))

    # ------------------------------------------------------------------
    # seeding
    # ------------------------------------------------------------------

    def seed_doctor(
        self,
        record: DoctorRecord,
        specialty_name: str | None = None,
        username: str | None = None,
        credential: str | None = None,
    ):
        if specialty_name is not None:
            self.registry.add_specialty(record.specialty_id, specialty_name)
        self.registry.add_doctor(record)
        if username and credential:
            self.registry.register_doctor_account(username, credential, record.doctor_id)

    def close(self):
        self.registry.close()
