"""Domain errors shared across the service.

Each error carries a stable machine-readable ``code`` so transport layers
(HTTP, CLI) can map failures without matching on message text.
"""


class SchedulingError(Exception):
    """Base class for every domain failure."""

    code = "SCHEDULING_ERROR"

    def __init__(self, message: str | None = None):
        super().__init__(message or self.code)


class UnknownDoctor(SchedulingError):
    code = "UNKNOWN_DOCTOR"


class UnknownPatient(SchedulingError):
    code = "UNKNOWN_PATIENT"


class UnknownSlot(SchedulingError):
    code = "UNKNOWN_SLOT"


class UnknownTicket(SchedulingError):
    code = "UNKNOWN_TICKET"


class UnknownAppointment(SchedulingError):
    code = "UNKNOWN_APPOINTMENT"


class UnknownRequest(SchedulingError):
    code = "UNKNOWN_REQUEST"


class UnknownSpecialty(SchedulingError):
    code = "UNKNOWN_SPECIALTY"


class SlotTaken(SchedulingError):
    """The slot is held or booked by someone else."""

    code = "SLOT_TAKEN"


class SlotExpired(SchedulingError):
    """The slot's start time has passed or the slot was withdrawn."""

    code = "SLOT_EXPIRED"


class HoldExpired(SchedulingError):
    """The confirmation arrived after the hold's TTL lapsed."""

    code = "HOLD_EXPIRED"


class AlreadyStarted(SchedulingError):
    """The appointment's slot has already begun; too late to cancel."""

    code = "ALREADY_STARTED"


class WindowInPast(SchedulingError):
    code = "WINDOW_IN_PAST"


class MisalignedHours(SchedulingError):
    """Working-hour intervals must sit on whole-hour boundaries."""

    code = "MISALIGNED_HOURS"


class InvalidTemplate(SchedulingError):
    code = "INVALID_TEMPLATE"


class InvalidFilter(SchedulingError):
    code = "INVALID_FILTER"


class UsernameTaken(SchedulingError):
    code = "USERNAME_TAKEN"


class WeakCredential(SchedulingError):
    code = "WEAK_CREDENTIAL"


class InvalidCredentials(SchedulingError):
    """Uniform for unknown username and wrong password alike."""

    code = "INVALID_CREDENTIALS"


class InvalidConfig(SchedulingError):
    code = "INVALID_CONFIG"
