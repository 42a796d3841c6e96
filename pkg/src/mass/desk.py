"""Request intake and dispatch: the scheduling front desk.

Receives appointment requests, keeps the pending queue ordered by priority
class then submission time, resolves by-day / by-specialty / by-doctor
filters against the live calendar, and tracks offer state as freed slots are
handed back out.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from enum import Enum, IntEnum

from .errors import InvalidFilter, UnknownRequest
from .registry import Registry


RESOLVE_HORIZON_DAYS = 7


class PriorityClass(IntEnum):
    """Total order: EMERGENCY > URGENT > ROUTINE."""

    ROUTINE = 0
    URGENT = 1
    EMERGENCY = 2

    @classmethod
    def from_label(cls, label: str) -> "PriorityClass":
        try:
            return cls[label.upper()]
        except KeyError:
            raise InvalidFilter(f"unknown priority {label!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


class FilterKind(str, Enum):
    BY_DAY = "by_day"
    BY_SPECIALTY = "by_specialty"
    BY_DOCTOR = "by_doctor"


@dataclass(frozen=True)
class RequestFilter:
    """Exactly one of day / specialty_id / doctor_id is set, per ``kind``.

    ``window`` optionally narrows acceptable slot starts to [lo, hi).
    """

    kind: FilterKind
    day: date | None = None
    specialty_id: str | None = None
    doctor_id: str | None = None
    window: tuple[datetime, datetime] | None = None

    def __post_init__(self):
        populated = [v is not None for v in (self.day, self.specialty_id, self.doctor_id)]
        if sum(populated) != 1:
            raise InvalidFilter("exactly one filter variant must be populated")
        expected = {
            FilterKind.BY_DAY: self.day,
            FilterKind.BY_SPECIALTY: self.specialty_id,
            FilterKind.BY_DOCTOR: self.doctor_id,
        }[self.kind]
        if expected is None:
            raise InvalidFilter(f"filter kind {self.kind.value} missing its value")
        if self.window is not None and self.window[1] <= self.window[0]:
            raise InvalidFilter("preferred window must end after it starts")

    @classmethod
    def by_day(cls, day: date, window=None) -> "RequestFilter":
        return cls(FilterKind.BY_DAY, day=day, window=window)

    @classmethod
    def by_specialty(cls, specialty_id: str, window=None) -> "RequestFilter":
        return cls(FilterKind.BY_SPECIALTY, specialty_id=specialty_id, window=window)

    @classmethod
    def by_doctor(cls, doctor_id: str, window=None) -> "RequestFilter":
        return cls(FilterKind.BY_DOCTOR, doctor_id=doctor_id, window=window)


class RequestStatus(str, Enum):
    PENDING = "pending"
    OFFERED = "offered"
    FULFILLED = "fulfilled"
    WITHDRAWN = "withdrawn"


@dataclass
class AppointmentRequest:
    request_id: str
    patient_id: str
    filter: RequestFilter
    priority: PriorityClass
    submitted_at: datetime
    status: RequestStatus = RequestStatus.PENDING
    offered_ticket_id: str | None = None


def queue_key(request: AppointmentRequest):
    return (-int(request.priority), request.submitted_at, request.request_id)


@dataclass(frozen=True)
class SpecialtySummary:
    specialty_id: str
    name: str
    doctor_count: int


@dataclass(frozen=True)
class DoctorSummary:
    doctor_id: str
    name: str
    specialty_id: str
    specialty_name: str
    on_duty: bool


@dataclass(frozen=True)
class ScheduleView:
    doctor_id: str
    name: str
    specialty_id: str
    specialty_name: str
    on_duty: bool
    day: date
    slots: list = field(default_factory=list)


class SchedulingDesk:
    def __init__(self, registry: Registry, engine):
        self._registry = registry
        self._engine = engine
        self._lock = threading.RLock()
        self._requests: dict[str, AppointmentRequest] = {}
        self._by_ticket: dict[str, str] = {}
        self._seq = 0

    # ------------------------------------------------------------------
    # intake
    # ------------------------------------------------------------------

    def submit_request(
        self,
        patient_id: str,
        request_filter: RequestFilter,
        priority: PriorityClass,
        now: datetime,
    ) -> str:
        self._registry.get_patient(patient_id)
        self._validate_filter(request_filter)
        with self._lock:
            self._seq += 1
            request = AppointmentRequest(
                request_id=f"r{self._seq:06d}",
                patient_id=patient_id,
                filter=request_filter,
                priority=priority,
                submitted_at=now,
            )
            self._requests[request.request_id] = request
            return request.request_id

    def _validate_filter(self, request_filter: RequestFilter):
        # a filter naming an unknown doctor or specialty can never match
        if request_filter.doctor_id is not None:
            try:
                self._registry.get_doctor(request_filter.doctor_id)
            except Exception:
                raise InvalidFilter(f"filter names unknown doctor {request_filter.doctor_id!r}") from None
        if request_filter.specialty_id is not None:
            try:
                self._registry.specialty_name(request_filter.specialty_id)
            except Exception:
                raise InvalidFilter(
                    f"filter names unknown specialty {request_filter.specialty_id!r}"
                ) from None

    def get_request(self, request_id: str) -> AppointmentRequest:
        with self._lock:
            request = self._requests.get(request_id)
            if request is None:
                raise UnknownRequest(f"no request {request_id!r}")
            return request

    def withdraw_request(self, request_id: str):
        with self._lock:
            request = self.get_request(request_id)
            if request.status in (RequestStatus.PENDING, RequestStatus.OFFERED):
                request.status = RequestStatus.WITHDRAWN

    def pending_queue_snapshot(self) -> list[AppointmentRequest]:
        """Pending requests ordered by (priority desc, submitted_at asc)."""
        with self._lock:
            pending = [r for r in self._requests.values() if r.status is RequestStatus.PENDING]
            return sorted(pending, key=queue_key)

    # ------------------------------------------------------------------
    # catalog views
    # ------------------------------------------------------------------

    def list_specialties(self) -> list[SpecialtySummary]:
        counts: dict[str, int] = {}
        for doctor in self._registry.doctors():
            counts[doctor.specialty_id] = counts.get(doctor.specialty_id, 0) + 1
        return [
            SpecialtySummary(specialty_id, name, counts.get(specialty_id, 0))
            for specialty_id, name in self._registry.specialties()
        ]

    def list_doctors(self, specialty_id: str | None = None) -> list[DoctorSummary]:
        return [
            DoctorSummary(
                d.doctor_id,
                d.name,
                d.specialty_id,
                self._registry.specialty_name(d.specialty_id),
                d.on_duty,
            )
            for d in self._registry.doctors(specialty_id)
        ]

    def get_doctor_schedule(self, doctor_id: str, day: date) -> ScheduleView:
        doctor = self._registry.get_doctor(doctor_id)
        self._engine.ensure_day(doctor_id, day)
        start = datetime.combine(day, time(0), tzinfo=timezone.utc)
        slots = self._engine.establish_available(doctor_id, start, start + timedelta(days=1))
        return ScheduleView(
            doctor_id=doctor.doctor_id,
            name=doctor.name,
            specialty_id=doctor.specialty_id,
            specialty_name=self._registry.specialty_name(doctor.specialty_id),
            on_duty=doctor.on_duty,
            day=day,
            slots=slots,
        )

    # ------------------------------------------------------------------
    # resolution
    # ------------------------------------------------------------------

    def resolve_request(self, request_id: str, today: date | None = None) -> list:
        """Candidate slots for one request, sorted by start then doctor.

        With ``today`` given, doctor/specialty filters materialize the next
        RESOLVE_HORIZON_DAYS of the relevant calendars first, so a fresh
        system still answers with real availability."""
        request = self.get_request(request_id)
        f = request.filter

        def establish(doctor_id):
            if today is not None:
                for offset in range(RESOLVE_HORIZON_DAYS):
                    self._engine.ensure_day(doctor_id, today + timedelta(days=offset))
            return self._engine.establish_available(doctor_id)

        if f.kind is FilterKind.BY_DOCTOR:
            candidates = establish(f.doctor_id)
        elif f.kind is FilterKind.BY_SPECIALTY:
            candidates = []
            for doctor in self._registry.doctors(f.specialty_id):
                candidates.extend(establish(doctor.doctor_id))
        else:
            start = datetime.combine(f.day, time(0), tzinfo=timezone.utc)
            end = start + timedelta(days=1)
            candidates = []
            for doctor in self._registry.doctors():
                self._engine.ensure_day(doctor.doctor_id, f.day)
                candidates.extend(self._engine.establish_available(doctor.doctor_id, start, end))
        if f.window is not None:
            lo, hi = f.window
            candidates = [s for s in candidates if lo <= s.start < hi]
        return sorted(candidates, key=lambda s: (s.start, s.doctor_id, s.hour_position))

    # ------------------------------------------------------------------
    # offer bookkeeping (driven by the service layer)
    # ------------------------------------------------------------------

    def note_offered(self, offers):
        with self._lock:
            for offer in offers:
                request = self._requests[offer.request_id]
                request.status = RequestStatus.OFFERED
                request.offered_ticket_id = offer.ticket.ticket_id
                self._by_ticket[offer.ticket.ticket_id] = offer.request_id

    def note_confirmed(self, ticket_id: str) -> str | None:
        """Hold confirmed; if it backed an offer, the request is fulfilled."""
        with self._lock:
            request_id = self._by_ticket.pop(ticket_id, None)
            if request_id is not None:
                request = self._requests[request_id]
                request.status = RequestStatus.FULFILLED
                request.offered_ticket_id = None
            return request_id

    def note_expired(self, ticket_ids) -> list[str]:
        """Lapsed offers go back to Pending without losing queue position."""
        with self._lock:
            reverted = []
            for ticket_id in ticket_ids:
                request_id = self._by_ticket.pop(ticket_id, None)
                if request_id is None:
                    continue
                request = self._requests[request_id]
                if request.status is RequestStatus.OFFERED:
                    request.status = RequestStatus.PENDING
                    request.offered_ticket_id = None
                    reverted.append(request_id)
            return reverted
