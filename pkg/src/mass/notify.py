"""Reminder and availability notices with pluggable delivery sinks.

The hub queues notifications until they are due; ``drain_due`` hands each one
out exactly once and fans it into per-recipient inboxes (broadcasts land in a
shared feed every patient sees). Delivery is pull-based so SMS or call
channels can later be bolted on as sinks without touching the engine.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from .registry import Appointment
from .slots import HoldTicket, SlotState, TimeSlot

logger = logging.getLogger(__name__)

BROADCAST = "*"

DEFAULT_REMINDER_LEADS = (timedelta(hours=24), timedelta(hours=1))


@dataclass
class Notification:
    notification_id: str
    kind: str  # reminder | slot_available | postponement | offer
    recipient: str  # patient id, or "*" for broadcast
    payload: dict
    due_at: datetime
    delivered: bool = False
    appointment_id: str | None = None
    seq: int = field(default=0, repr=False)
    delivered_seq: int = field(default=0, repr=False)


class WebhookSink:
    """POSTs each delivered notification as JSON to one fixed URL.

    Failures are logged and swallowed; a dead webhook must not stall
    in-process delivery.
    """

    def __init__(self, url: str, timeout: float = 5.0):
        self.url = url
        self.timeout = timeout

    def __call__(self, notification: Notification):
        import requests

        body = {
            "id": notification.notification_id,
            "kind": notification.kind,
            "recipient": notification.recipient,
            "due_at": notification.due_at.isoformat(),
            "payload": notification.payload,
        }
        try:
            requests.post(self.url, json=body, timeout=self.timeout)
        except Exception:
            logger.warning("webhook delivery failed for %s", notification.notification_id)


class NotificationHub:
    def __init__(self, sinks=()):
        self._lock = threading.RLock()
        self._sinks = list(sinks)
        self._pending: dict[str, Notification] = {}
        self._inboxes: dict[str, list[Notification]] = {}
        self._seq = 0
        self._delivered_seq = 0

    def add_sink(self, sink):
        self._sinks.append(sink)

    def _enqueue(self, kind: str, recipient: str, payload: dict, due_at: datetime,
                 appointment_id: str | None = None) -> Notification:
        with self._lock:
            self._seq += 1
            notification = Notification(
                notification_id=f"n{self._seq:06d}",
                kind=kind,
                recipient=recipient,
                payload=payload,
                due_at=due_at,
                appointment_id=appointment_id,
                seq=self._seq,
            )
            self._pending[notification.notification_id] = notification
            return notification

    # ------------------------------------------------------------------
    # producers
    # ------------------------------------------------------------------

    def schedule_reminders(
        self,
        appointment: Appointment,
        lead_times=DEFAULT_REMINDER_LEADS,
        now: datetime | None = None,
    ) -> list[Notification]:
        """One reminder per lead, due at start minus lead; past leads are skipped."""
        now = now or datetime.now(appointment.slot_start.tzinfo)
        reminders = []
        for lead in lead_times:
            if lead <= timedelta(0):
                continue
            due = appointment.slot_start - lead
            if due < now:
                continue
            reminders.append(
                self._enqueue(
                    "reminder",
                    appointment.patient_id,
                    {
                        "appointment_id": appointment.appointment_id,
                        "slot_id": appointment.slot_id,
                        "start": appointment.slot_start.isoformat(),
                    },
                    due_at=due,
                    appointment_id=appointment.appointment_id,
                )
            )
        return reminders

    def publish_slot_available(self, slot: TimeSlot, cause: str, now: datetime) -> Notification:
        if slot.state not in (SlotState.AVAILABLE, SlotState.RELEASED):
            raise ValueError(f"slot {slot.slot_id} is {slot.state.value}, not open")
        return self._enqueue(
            "slot_available",
            BROADCAST,
            {
                "slot_id": slot.slot_id,
                "doctor_id": slot.doctor_id,
                "start": slot.start.isoformat(),
                "cause": cause,
            },
            due_at=now,
        )

    def offer_notice(
        self, patient_id: str, slot: TimeSlot, ticket: HoldTicket, now: datetime,
        request_id: str | None = None,
    ) -> Notification:
        return self._enqueue(
            "offer",
            patient_id,
            {
                "slot_id": slot.slot_id,
                "doctor_id": slot.doctor_id,
                "start": slot.start.isoformat(),
                "ticket_id": ticket.ticket_id,
                "expires_at": ticket.expires_at.isoformat(),
                "request_id": request_id,
            },
            due_at=now,
        )

    def postponement_notice(
        self, patient_id: str, slot: TimeSlot, appointment_id: str, now: datetime
    ) -> Notification:
        return self._enqueue(
            "postponement",
            patient_id,
            {
                "appointment_id": appointment_id,
                "slot_id": slot.slot_id,
                "doctor_id": slot.doctor_id,
                "start": slot.start.isoformat(),
            },
            due_at=now,
        )

    def cancel_for_appointment(self, appointment_id: str) -> int:
        """Drop undelivered reminders for a dead appointment."""
        with self._lock:
            doomed = [
                n.notification_id
                for n in self._pending.values()
                if n.appointment_id == appointment_id and n.kind == "reminder"
            ]
            for notification_id in doomed:
                del self._pending[notification_id]
            return len(doomed)

    # ------------------------------------------------------------------
    # delivery
    # ------------------------------------------------------------------

    def drain_due(self, now: datetime) -> list[Notification]:
        """Deliver every undelivered notification due by ``now``, exactly once."""
        with self._lock:
            due = sorted(
                (n for n in self._pending.values() if n.due_at <= now),
                key=lambda n: (n.due_at, n.seq),
            )
            for notification in due:
                del self._pending[notification.notification_id]
                notification.delivered = True
                self._delivered_seq += 1
                notification.delivered_seq = self._delivered_seq
                self._inboxes.setdefault(notification.recipient, []).append(notification)
            delivered = list(due)
        for notification in delivered:
            for sink in self._sinks:
                sink(notification)
        return delivered

    def inbox(self, patient_id: str, now: datetime | None = None) -> list[Notification]:
        """Everything delivered to this patient plus the broadcast feed."""
        if now is not None:
            self.drain_due(now)
        with self._lock:
            mine = self._inboxes.get(patient_id, []) + self._inboxes.get(BROADCAST, [])
            return sorted(mine, key=lambda n: n.delivered_seq)

    def pending_count(self) -> int:
        with self._lock:
            return len(self._pending)

    def pending_snapshot(self) -> list[Notification]:
        with self._lock:
            return sorted(self._pending.values(), key=lambda n: n.seq)
