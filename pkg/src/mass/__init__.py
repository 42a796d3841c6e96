"""Medical appointment scheduling service.

Wave-template slot booking with hold/confirm semantics, priority-ordered
request matching, reminder notifications, a durable registry, an HTTP facade,
and a discrete-event simulator comparing the slot policy against a walk-in
queue baseline.
"""

from .desk import AppointmentRequest, PriorityClass, RequestFilter, SchedulingDesk
from .engine import SlotEngine, SlotOffer
from .notify import NotificationHub, WebhookSink
from .registry import Account, Appointment, DoctorRecord, Registry
from .service import ClinicService
from .slots import FreedSlotEvent, HoldTicket, SlotState, TimeSlot, WaveTemplate, generate_slots

__version__ = "0.1.0"

__all__ = [
    "Account",
    "Appointment",
    "AppointmentRequest",
    "ClinicService",
    "DoctorRecord",
    "FreedSlotEvent",
    "HoldTicket",
    "NotificationHub",
    "PriorityClass",
    "Registry",
    "RequestFilter",
    "SchedulingDesk",
    "SlotEngine",
    "SlotOffer",
    "SlotState",
    "TimeSlot",
    "WaveTemplate",
    "WebhookSink",
    "generate_slots",
    "__version__",
]
