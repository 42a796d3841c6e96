"""Slot lifecycle engine: holds, confirmations, releases, freed-slot matching.

Every mutation runs under one re-entrant lock, so concurrent callers observe
a linearized history and racing holds on a single slot resolve to exactly one
winner. Reads hand back copies, never live slot objects.

State transitions funnel through ``_transition``, which rejects anything not
in ``LEGAL_TRANSITIONS`` and reports each move to registered observers (the
test suite uses this to audit legality).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from datetime import date, datetime, timedelta

from .errors import (
    AlreadyStarted,
    HoldExpired,
    SlotExpired,
    SlotTaken,
    UnknownAppointment,
    UnknownSlot,
    UnknownTicket,
    WindowInPast,
)
from .notify import NotificationHub
from .registry import Appointment, AppointmentState, Registry
from .slots import (
    LEGAL_TRANSITIONS,
    FreedCause,
    FreedSlotEvent,
    HoldTicket,
    SlotState,
    TimeSlot,
    WaveTemplate,
    generate_slots,
)

DEFAULT_HOLD_TTL = timedelta(seconds=120)


@dataclass(frozen=True)
class HoldExpiry:
    """A lapsed hold; the desk uses it to requeue offered requests."""

    slot_id: str
    ticket_id: str
    patient_id: str


@dataclass(frozen=True)
class SlotOffer:
    """A freed slot placed on hold for the winning pending request."""

    request_id: str
    slot_id: str
    ticket: HoldTicket


class SlotEngine:
    def __init__(
        self,
        registry: Registry,
        hub: NotificationHub | None = None,
        hold_ttl: timedelta = DEFAULT_HOLD_TTL,
        template: WaveTemplate | None = None,
    ):
        self._registry = registry
        self._hub = hub
        self._hold_ttl = hold_ttl
        self.template = template or WaveTemplate()
        self._lock = threading.RLock()
        self._slots: dict[str, TimeSlot] = {}
        self._tickets: dict[str, HoldTicket] = {}
        self._ticket_by_slot: dict[str, str] = {}
        self._days: set[tuple[str, date]] = set()
        self._ticket_seq = 0
        self._observers: list = []

    def add_observer(self, callback):
        """callback(slot_id, from_state, to_state) on every transition."""
        self._observers.append(callback)

    # ------------------------------------------------------------------
    # state machine core
    # ------------------------------------------------------------------

    def _transition(self, slot: TimeSlot, to_state: SlotState, **fields):
        move = (slot.state, to_state)
        if move not in LEGAL_TRANSITIONS:
            raise RuntimeError(f"illegal transition {move[0].value} -> {move[1].value} on {slot.slot_id}")
        for observer in self._observers:
            observer(slot.slot_id, slot.state, to_state)
        slot.state = to_state
        slot.held_by = fields.get("held_by")
        slot.hold_expires_at = fields.get("hold_expires_at")
        slot.appointment_id = fields.get("appointment_id")

    def _expire_ticket(self, ticket: HoldTicket, now: datetime, notify: bool = True) -> HoldExpiry:
        """Void one hold: slot back to Available, availability notice out.

        ``notify=False`` is for holds voided because the slot itself is being
        withdrawn; announcing availability there would mislead."""
        slot = self._slots[ticket.slot_id]
        del self._tickets[ticket.ticket_id]
        del self._ticket_by_slot[ticket.slot_id]
        self._transition(slot, SlotState.AVAILABLE)
        if notify and self._hub is not None:
            self._hub.publish_slot_available(slot, cause="hold_expired", now=now)
        return HoldExpiry(slot.slot_id, ticket.ticket_id, ticket.patient_id)

    # ------------------------------------------------------------------
    # slot inventory
    # ------------------------------------------------------------------

    def register_slots(self, slots: list[TimeSlot]):
        with self._lock:
            for slot in slots:
                if slot.slot_id in self._slots:
                    raise ValueError(f"slot {slot.slot_id} already registered")
            for slot in slots:
                self._slots[slot.slot_id] = slot

    def ensure_day(self, doctor_id: str, day: date) -> list[TimeSlot]:
        """Materialize the doctor's calendar for one day (idempotent).

        Active appointments replayed from the journal are re-bound to their
        regenerated slots, so a restarted service shows them as booked.
        """
        with self._lock:
            doctor = self._registry.get_doctor(doctor_id)
            if (doctor_id, day) in self._days:
                return []
            slots = generate_slots(doctor_id, doctor.intervals_for(day), self.template)
            self.register_slots(slots)
            self._days.add((doctor_id, day))
            for slot in slots:
                appt = self._registry.active_appointment_for_slot(slot.slot_id)
                if appt is not None:
                    slot.state = SlotState.BOOKED
                    slot.appointment_id = appt.appointment_id
            return slots

    def get_slot(self, slot_id: str) -> TimeSlot:
        with self._lock:
            slot = self._slots.get(slot_id)
            if slot is None:
                raise UnknownSlot(f"no slot {slot_id!r}")
            return replace(slot)

    def slots_snapshot(self, doctor_id: str | None = None) -> list[TimeSlot]:
        with self._lock:
            found = [
                replace(s) for s in self._slots.values()
                if doctor_id is None or s.doctor_id == doctor_id
            ]
            return sorted(found, key=lambda s: (s.start, s.hour_position, s.slot_id))

    # ------------------------------------------------------------------
    # lifecycle operations
    # ------------------------------------------------------------------

    def establish_available(
        self,
        doctor_id: str,
        start: datetime | None = None,
        end: datetime | None = None,
    ) -> list[TimeSlot]:
        """Bookable slots (Available or Released) in range, sorted by start."""
        with self._lock:
            self._registry.get_doctor(doctor_id)
            found = [
                replace(s)
                for s in self._slots.values()
                if s.doctor_id == doctor_id
                and s.state in (SlotState.AVAILABLE, SlotState.RELEASED)
                and (start is None or s.start >= start)
                and (end is None or s.start < end)
            ]
            return sorted(found, key=lambda s: (s.start, s.hour_position, s.slot_id))

    def hold_slot(self, slot_id: str, patient_id: str, now: datetime) -> HoldTicket:
        with self._lock:
            slot = self._slots.get(slot_id)
            if slot is None:
                raise UnknownSlot(f"no slot {slot_id!r}")
            if slot.start < now:
                raise SlotExpired(f"slot {slot_id} started at {slot.start.isoformat()}")
            if slot.state is SlotState.RETIRED:
                raise SlotExpired(f"slot {slot_id} was withdrawn")
            if slot.state is SlotState.BOOKED:
                raise SlotTaken(f"slot {slot_id} is booked")
            if slot.state is SlotState.HELD:
                ticket = self._tickets[self._ticket_by_slot[slot_id]]
                if ticket.expires_at >= now:
                    raise SlotTaken(f"slot {slot_id} is held until {ticket.expires_at.isoformat()}")
                self._expire_ticket(ticket, now)  # stale hold; lapse it and fall through
            self._ticket_seq += 1
            ticket = HoldTicket(
                ticket_id=f"t{self._ticket_seq:06d}",
                slot_id=slot_id,
                patient_id=patient_id,
                issued_at=now,
                expires_at=now + self._hold_ttl,
            )
            self._transition(slot, SlotState.HELD, held_by=patient_id, hold_expires_at=ticket.expires_at)
            self._tickets[ticket.ticket_id] = ticket
            self._ticket_by_slot[slot_id] = ticket.ticket_id
            return ticket

    def confirm_hold(self, ticket_id: str, now: datetime) -> Appointment:
        with self._lock:
            ticket = self._tickets.get(ticket_id)
            if ticket is None:
                raise UnknownTicket(f"no live hold {ticket_id!r}")
            if now > ticket.expires_at:
                self._expire_ticket(ticket, now)
                raise HoldExpired(f"hold {ticket_id} lapsed at {ticket.expires_at.isoformat()}")
            slot = self._slots[ticket.slot_id]
            appointment = self._registry.create_appointment(
                patient_id=ticket.patient_id,
                doctor_id=slot.doctor_id,
                slot_id=slot.slot_id,
                slot_start=slot.start,
                now=now,
            )
            self._transition(slot, SlotState.BOOKED, appointment_id=appointment.appointment_id)
            del self._tickets[ticket_id]
            del self._ticket_by_slot[slot.slot_id]
            return appointment

    def expire_holds(self, now: datetime) -> list[HoldExpiry]:
        """Return every hold past its TTL to Available, one notice per slot."""
        with self._lock:
            stale = [t for t in self._tickets.values() if t.expires_at < now]
            return [self._expire_ticket(t, now) for t in sorted(stale, key=lambda t: t.ticket_id)]

    def cancel_appointment(self, appointment_id: str, now: datetime) -> FreedSlotEvent:
        """Patient-initiated cancellation; the slot is released for others."""
        with self._lock:
            appointment = self._registry.get_appointment(appointment_id)
            if appointment.state is not AppointmentState.ACTIVE:
                raise UnknownAppointment(f"appointment {appointment_id} is not active")
            slot = self._slots.get(appointment.slot_id)
            if slot is None:
                raise UnknownSlot(f"slot {appointment.slot_id} not materialized")
            if slot.start <= now:
                raise AlreadyStarted(f"slot began at {slot.start.isoformat()}")
            self._registry.set_appointment_state(appointment_id, AppointmentState.CANCELLED)
            self._transition(slot, SlotState.RELEASED)
            if self._hub is not None:
                self._hub.cancel_for_appointment(appointment_id)
            return FreedSlotEvent(slot.slot_id, FreedCause.CANCELLATION, now)

    def postpone_doctor(
        self,
        doctor_id: str,
        window_start: datetime,
        window_end: datetime,
        now: datetime,
    ) -> list[FreedSlotEvent]:
        """Doctor pulls out of a window: booked slots are released (patients
        notified), unbooked ones are retired. Held slots lapse first so every
        step stays inside the legal transition set."""
        with self._lock:
            self._registry.get_doctor(doctor_id)
            if window_end <= window_start or window_start <= now:
                raise WindowInPast("postponement window must lie in the future")
            events = []
            affected = [
                s for s in self._slots.values()
                if s.doctor_id == doctor_id and window_start <= s.start < window_end
            ]
            for slot in sorted(affected, key=lambda s: (s.start, s.slot_id)):
                if slot.state is SlotState.BOOKED:
                    appointment = self._registry.get_appointment(slot.appointment_id)
                    self._registry.set_appointment_state(
                        slot.appointment_id, AppointmentState.POSTPONED_BY_DOCTOR
                    )
                    self._transition(slot, SlotState.RELEASED)
                    if self._hub is not None:
                        self._hub.cancel_for_appointment(appointment.appointment_id)
                        self._hub.postponement_notice(
                            appointment.patient_id, slot, appointment.appointment_id, now
                        )
                    events.append(FreedSlotEvent(slot.slot_id, FreedCause.POSTPONEMENT, now))
                elif slot.state is SlotState.HELD:
                    self._expire_ticket(
                        self._tickets[self._ticket_by_slot[slot.slot_id]], now, notify=False
                    )
                    self._transition(slot, SlotState.RETIRED)
                elif slot.state in (SlotState.AVAILABLE, SlotState.RELEASED):
                    self._transition(slot, SlotState.RETIRED)
            return events

    def retire_past(self, now: datetime) -> int:
        """Housekeeping: unbooked slots whose start passed stop being offered."""
        with self._lock:
            count = 0
            for slot in self._slots.values():
                if slot.state in (SlotState.AVAILABLE, SlotState.RELEASED) and slot.start < now:
                    self._transition(slot, SlotState.RETIRED)
                    count += 1
            return count

    # ------------------------------------------------------------------
    # freed-slot matching
    # ------------------------------------------------------------------

    def request_matches_slot(self, request, slot: TimeSlot) -> bool:
        """Does a pending request's filter accept this slot?"""
        f = request.filter
        if f.doctor_id is not None and slot.doctor_id != f.doctor_id:
            return False
        if f.day is not None and slot.start.date() != f.day:
            return False
        if f.specialty_id is not None:
            if self._registry.get_doctor(slot.doctor_id).specialty_id != f.specialty_id:
                return False
        if f.window is not None:
            lo, hi = f.window
            if not (lo <= slot.start < hi):
                return False
        return True

    def match_freed_slots(self, events: list[FreedSlotEvent], pending, now: datetime) -> list[SlotOffer]:
        """Offer each freed slot to the best compatible pending request.

        Best = highest priority class, then earliest submitted_at (request id
        breaks exact ties). An offer holds the slot for that patient under the
        standard TTL; slots nobody wants are broadcast as available. Matches
        exactly what a brute-force scan of the full pending list would pick.
        """
        from .desk import RequestStatus

        with self._lock:
            queue = sorted(
                (r for r in pending if r.status is RequestStatus.PENDING),
                key=lambda r: (-int(r.priority), r.submitted_at, r.request_id),
            )
            matched: set[str] = set()
            offers: list[SlotOffer] = []
            for event in events:
                slot = self._slots.get(event.slot_id)
                if slot is None or slot.state not in (SlotState.AVAILABLE, SlotState.RELEASED):
                    continue
                winner = None
                if slot.start > now:
                    for request in queue:
                        if request.request_id in matched:
                            continue
                        if self.request_matches_slot(request, slot):
                            winner = request
                            break
                if winner is None:
                    if self._hub is not None:
                        self._hub.publish_slot_available(slot, cause=event.cause.value, now=now)
                    continue
                ticket = self.hold_slot(slot.slot_id, winner.patient_id, now)
                matched.add(winner.request_id)
                offers.append(SlotOffer(winner.request_id, slot.slot_id, ticket))
                if self._hub is not None:
                    self._hub.offer_notice(
                        winner.patient_id, self._slots[slot.slot_id], ticket, now,
                        request_id=winner.request_id,
                    )
            return offers
