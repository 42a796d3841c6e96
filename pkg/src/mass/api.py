"""HTTP/JSON facade over the clinic service.

Timestamps on the wire are RFC 3339 strings; durations are integer minutes.
Mutating routes require an ``X-Session-Token`` header; doctor routes
additionally require a doctor-role session. Every engine error maps to one
stable machine code via ``ERROR_STATUS``.
"""

from __future__ import annotations

from datetime import date, datetime, timezone

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import errors
from .desk import PriorityClass, RequestFilter
from .notify import Notification
from .registry import Account, Appointment, Role
from .service import ClinicService
from .slots import TimeSlot

ERROR_STATUS = {
    errors.UnknownDoctor: 404,
    errors.UnknownPatient: 404,
    errors.UnknownSlot: 404,
    errors.UnknownTicket: 404,
    errors.UnknownAppointment: 404,
    errors.UnknownRequest: 404,
    errors.UnknownSpecialty: 404,
    errors.SlotTaken: 409,
    errors.UsernameTaken: 409,
    errors.AlreadyStarted: 409,
    errors.SlotExpired: 410,
    errors.HoldExpired: 410,
    errors.InvalidCredentials: 401,
    errors.WeakCredential: 422,
    errors.WindowInPast: 422,
    errors.MisalignedHours: 422,
    errors.InvalidTemplate: 422,
    errors.InvalidFilter: 422,
    errors.InvalidConfig: 422,
}

ROUTE_TABLE = [
    {"method": "POST", "path": "/signup", "auth": "none", "description": "create a patient account"},
    {"method": "POST", "path": "/login", "auth": "none", "description": "exchange credentials for a session token"},
    {"method": "GET", "path": "/specialties", "auth": "none", "description": "specialties with doctor counts"},
    {"method": "GET", "path": "/doctors", "auth": "none", "description": "doctors, optionally ?specialty="},
    {"method": "GET", "path": "/doctors/{doctor_id}/schedule", "auth": "none", "description": "doctor detail plus free slots for ?date="},
    {"method": "GET", "path": "/doctors/{doctor_id}/slots", "auth": "none", "description": "free slots between ?from= and ?to="},
    {"method": "POST", "path": "/slots/{slot_id}/hold", "auth": "patient", "description": "claim a slot pending confirmation"},
    {"method": "POST", "path": "/holds/{ticket_id}/confirm", "auth": "patient", "description": "turn a live hold into an appointment"},
    {"method": "DELETE", "path": "/appointments/{appointment_id}", "auth": "patient", "description": "cancel an appointment; the slot is re-offered"},
    {"method": "POST", "path": "/doctors/{doctor_id}/postpone", "auth": "doctor", "description": "release a window of the doctor's calendar"},
    {"method": "POST", "path": "/requests", "auth": "patient", "description": "queue an appointment request (filter + priority)"},
    {"method": "GET", "path": "/patients/{patient_id}/history", "auth": "patient or doctor", "description": "visit history, oldest first"},
    {"method": "GET", "path": "/patients/{patient_id}/notifications", "auth": "patient", "description": "reminders, offers and availability notices"},
    {"method": "GET", "path": "/routes", "auth": "none", "description": "this table"},
]


class WrongRole(Exception):
    """Authenticated, but the session's role may not use this route."""


class SignupBody(BaseModel):
    username: str
    credential: str


class LoginBody(BaseModel):
    username: str
    credential: str


class FilterBody(BaseModel):
    kind: str
    value: str
    window_from: datetime | None = None
    window_to: datetime | None = None


class RequestBody(BaseModel):
    filter: FilterBody
    priority: str = "routine"


class PostponeBody(BaseModel):
    window_from: datetime
    window_to: datetime


def _ts(value: datetime) -> str:
    return value.astimezone(timezone.utc).isoformat()


def _aware(value: datetime) -> datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def slot_json(slot: TimeSlot) -> dict:
    return {
        "slot_id": slot.slot_id,
        "doctor_id": slot.doctor_id,
        "start": _ts(slot.start),
        "date": slot.start.date().isoformat(),
        "time": slot.start.strftime("%H:%M"),
        "duration_minutes": slot.duration,
        "state": slot.state.value,
        "hour_position": slot.hour_position,
    }


def appointment_json(appointment: Appointment) -> dict:
    return {
        "appointment_id": appointment.appointment_id,
        "patient_id": appointment.patient_id,
        "doctor_id": appointment.doctor_id,
        "slot_id": appointment.slot_id,
        "start": _ts(appointment.slot_start),
        "state": appointment.state.value,
        "recorded_at": _ts(appointment.recorded_at),
    }


def notification_json(notification: Notification) -> dict:
    return {
        "id": notification.notification_id,
        "kind": notification.kind,
        "recipient": notification.recipient,
        "due_at": _ts(notification.due_at),
        "payload": notification.payload,
    }


def _parse_filter(body: FilterBody) -> RequestFilter:
    window = None
    if body.window_from is not None and body.window_to is not None:
        window = (_aware(body.window_from), _aware(body.window_to))
    if body.kind == "by_day":
        try:
            day = date.fromisoformat(body.value)
        except ValueError:
            raise errors.InvalidFilter(f"bad date {body.value!r}") from None
        return RequestFilter.by_day(day, window)
    if body.kind == "by_specialty":
        return RequestFilter.by_specialty(body.value, window)
    if body.kind == "by_doctor":
        return RequestFilter.by_doctor(body.value, window)
    raise errors.InvalidFilter(f"unknown filter kind {body.kind!r}")


def create_app(service: ClinicService) -> FastAPI:
    app = FastAPI(title="clinic scheduling service", version="0.1.0")

    def session(x_session_token: str | None = Header(default=None)) -> Account:
        if not x_session_token:
            raise errors.InvalidCredentials("missing X-Session-Token header")
        return service.account_for(x_session_token)

    def patient_session(account: Account = Depends(session)) -> Account:
        if account.role is not Role.PATIENT:
            raise WrongRole()
        return account

    def doctor_session(account: Account = Depends(session)) -> Account:
        if account.role is not Role.DOCTOR:
            raise WrongRole()
        return account

    @app.exception_handler(errors.SchedulingError)
    def domain_error(request: Request, exc: errors.SchedulingError):
        status = 401 if isinstance(exc, errors.InvalidCredentials) else ERROR_STATUS.get(type(exc), 422)
        return JSONResponse(status_code=status, content={"code": exc.code, "message": str(exc)})

    @app.exception_handler(WrongRole)
    def role_error(request: Request, exc: WrongRole):
        return JSONResponse(status_code=403, content={"code": "WRONG_ROLE", "message": "role not allowed here"})

    # ------------------------------------------------------------------

    @app.get("/routes")
    def routes():
        return ROUTE_TABLE

    @app.post("/signup", status_code=201)
    def signup(body: SignupBody):
        return {"patient_id": service.signup(body.username, body.credential)}

    @app.post("/login")
    def login(body: LoginBody):
        token = service.login(body.username, body.credential)
        account = service.account_for(token)
        return {
            "token": token,
            "role": account.role.value,
            "account_id": account.account_id,
            "doctor_id": account.doctor_id,
        }

    @app.get("/specialties")
    def specialties():
        return [
            {"specialty_id": s.specialty_id, "name": s.name, "doctor_count": s.doctor_count}
            for s in service.specialties()
        ]

    @app.get("/doctors")
    def doctors(specialty: str | None = None):
        return [
            {
                "doctor_id": d.doctor_id,
                "name": d.name,
                "specialty_id": d.specialty_id,
                "specialty": d.specialty_name,
                "on_duty": d.on_duty,
            }
            for d in service.doctors(specialty)
        ]

    @app.get("/doctors/{doctor_id}/schedule")
    def doctor_schedule(doctor_id: str, date: date):
        view = service.doctor_schedule(doctor_id, date)
        return {
            "doctor_id": view.doctor_id,
            "name": view.name,
            "specialty_id": view.specialty_id,
            "specialty": view.specialty_name,
            "on_duty": view.on_duty,
            "date": view.day.isoformat(),
            "slots": [slot_json(s) for s in view.slots],
        }

    @app.get("/doctors/{doctor_id}/slots")
    def doctor_slots(
        doctor_id: str,
        from_: datetime = Query(alias="from"),
        to: datetime = Query(),
    ):
        slots = service.available_slots(doctor_id, _aware(from_), _aware(to))
        return [slot_json(s) for s in slots]

    @app.post("/slots/{slot_id}/hold")
    def hold(slot_id: str, account: Account = Depends(patient_session)):
        ticket = service.hold_slot(slot_id, account.account_id)
        return {
            "ticket_id": ticket.ticket_id,
            "slot_id": ticket.slot_id,
            "patient_id": ticket.patient_id,
            "issued_at": _ts(ticket.issued_at),
            "expires_at": _ts(ticket.expires_at),
        }

    @app.post("/holds/{ticket_id}/confirm")
    def confirm(ticket_id: str, account: Account = Depends(patient_session)):
        return appointment_json(service.confirm_hold(ticket_id))

    @app.delete("/appointments/{appointment_id}")
    def cancel(appointment_id: str, account: Account = Depends(session)):
        event, offers = service.cancel_appointment(appointment_id)
        return {
            "cancelled": appointment_id,
            "freed_slot": event.slot_id,
            "cause": event.cause.value,
            "offers": [
                {"request_id": o.request_id, "slot_id": o.slot_id, "patient_id": o.ticket.patient_id}
                for o in offers
            ],
        }

    @app.post("/doctors/{doctor_id}/postpone")
    def postpone(doctor_id: str, body: PostponeBody, account: Account = Depends(doctor_session)):
        if account.doctor_id is not None and account.doctor_id != doctor_id:
            raise WrongRole()
        outcome = service.postpone_doctor(doctor_id, _aware(body.window_from), _aware(body.window_to))
        return {
            "released": len(outcome.events),
            "retired": outcome.retired_slots,
            "notified_patients": outcome.notified_patients,
            "offers": [
                {"request_id": o.request_id, "slot_id": o.slot_id, "patient_id": o.ticket.patient_id}
                for o in outcome.offers
            ],
        }

    @app.post("/requests", status_code=201)
    def submit_request(body: RequestBody, account: Account = Depends(patient_session)):
        request_filter = _parse_filter(body.filter)
        priority = PriorityClass.from_label(body.priority)
        request_id, candidates = service.submit_request(account.account_id, request_filter, priority)
        return {
            "request_id": request_id,
            "priority": priority.label,
            "candidates": [slot_json(s) for s in candidates],
        }

    @app.get("/patients/{patient_id}/history")
    def history(patient_id: str, account: Account = Depends(session)):
        if account.role is Role.PATIENT and account.account_id != patient_id:
            raise WrongRole()
        return [
            {
                "entry_id": e.entry_id,
                "appointment_id": e.appointment_id,
                "clinic_id": e.clinic_id,
                "summary": e.summary,
                "recorded_at": _ts(e.recorded_at),
            }
            for e in service.history(patient_id)
        ]

    @app.get("/patients/{patient_id}/notifications")
    def notifications(patient_id: str, account: Account = Depends(session)):
        if account.role is not Role.PATIENT or account.account_id != patient_id:
            raise WrongRole()
        return [notification_json(n) for n in service.notifications(patient_id)]

    return app
