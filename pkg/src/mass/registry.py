"""Durable registry: accounts, doctor roster, appointments, visit history.

State lives in memory and is rebuilt on open by replaying an append-only
JSON-lines journal (one file, one record per line, fsynced before a mutation
is acknowledged). Pass ``path=None`` for a volatile in-memory registry, which
the simulator and most tests use.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import secrets
import threading
from dataclasses import dataclass, replace
from datetime import date, datetime, timedelta, timezone
from enum import Enum
from pathlib import Path

from .errors import (
    InvalidCredentials,
    MisalignedHours,
    SlotTaken,
    UnknownAppointment,
    UnknownDoctor,
    UnknownPatient,
    UnknownSpecialty,
    UsernameTaken,
    WeakCredential,
)

SCHEMA_VERSION = 1

MIN_CREDENTIAL_LENGTH = 8
SESSION_TTL = timedelta(hours=24)

_SCRYPT_N = 2**14
_SCRYPT_R = 8
_SCRYPT_P = 1


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


def hash_credential(credential: str, salt: bytes | None = None, n: int = _SCRYPT_N) -> str:
    salt = salt or secrets.token_bytes(16)
    digest = hashlib.scrypt(credential.encode(), salt=salt, n=n, r=_SCRYPT_R, p=_SCRYPT_P)
    return f"scrypt${n}${salt.hex()}${digest.hex()}"


def verify_credential(credential: str, stored: str) -> bool:
    try:
        _, n, salt_hex, digest_hex = stored.split("$")
        digest = hashlib.scrypt(
            credential.encode(), salt=bytes.fromhex(salt_hex), n=int(n), r=_SCRYPT_R, p=_SCRYPT_P
        )
    except (ValueError, TypeError):
        return False
    return hmac.compare_digest(digest.hex(), digest_hex)


class JournalStore:
    """Append-only JSON-lines journal with a schema-version header line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fresh = not self.path.exists() or self.path.stat().st_size == 0
        self._fh = open(self.path, "a+", encoding="utf-8")
        if fresh:
            self._write({"schema": SCHEMA_VERSION})

    def _write(self, record: dict):
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def append(self, family: str, op: str, record: dict):
        self._write({"family": family, "op": op, "record": record})

    def entries(self):
        """Replay every journaled mutation, oldest first."""
        self._fh.seek(0)
        header = json.loads(self._fh.readline())
        if header.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported journal schema {header.get('schema')!r}")
        for line in self._fh:
            if line.strip():
                entry = json.loads(line)
                yield entry["family"], entry["op"], entry["record"]
        self._fh.seek(0, os.SEEK_END)

    def close(self):
        self._fh.close()


class Role(str, Enum):
    PATIENT = "patient"
    DOCTOR = "doctor"


class AppointmentState(str, Enum):
    ACTIVE = "active"
    COMPLETED = "completed"
    CANCELLED = "cancelled"
    POSTPONED_BY_DOCTOR = "postponed_by_doctor"


@dataclass(frozen=True)
class Account:
    account_id: str
    username: str
    credential_hash: str
    created_at: datetime
    role: Role = Role.PATIENT
    doctor_id: str | None = None


@dataclass(frozen=True)
class DoctorRecord:
    """A doctor plus their weekly working hours.

    ``working_hours`` maps weekday (0=Monday .. 6=Sunday) to whole-hour
    intervals, e.g. ``{0: ((8, 12), (14, 17))}``.
    """

    doctor_id: str
    name: str
    specialty_id: str
    working_hours: dict[int, tuple[tuple[int, int], ...]]
    on_duty: bool = True

    def __post_init__(self):
        for weekday, spans in self.working_hours.items():
            if not 0 <= weekday <= 6:
                raise MisalignedHours(f"weekday {weekday} out of range")
            last_end = 0
            for start, end in sorted(spans):
                if not (isinstance(start, int) and isinstance(end, int)):
                    raise MisalignedHours("working hours must be whole hours")
                if not 0 <= start < end <= 24:
                    raise MisalignedHours(f"bad working span {start}-{end}")
                if start < last_end:
                    raise MisalignedHours("working spans overlap")
                last_end = end

    def intervals_for(self, day: date) -> list[tuple[datetime, datetime]]:
        spans = self.working_hours.get(day.weekday(), ())
        out = []
        for start_h, end_h in sorted(spans):
            base = datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
            out.append((base + timedelta(hours=start_h), base + timedelta(hours=end_h)))
        return out


@dataclass(frozen=True)
class Appointment:
    appointment_id: str
    patient_id: str
    doctor_id: str
    slot_id: str
    slot_start: datetime
    state: AppointmentState
    recorded_at: datetime
    outcome_note: str | None = None


@dataclass(frozen=True)
class HistoryEntry:
    entry_id: str
    appointment_id: str
    patient_id: str
    clinic_id: str
    summary: str
    recorded_at: datetime


@dataclass(frozen=True)
class Session:
    token: str
    account: Account
    expires_at: datetime


def _dt(value: str) -> datetime:
    return datetime.fromisoformat(value)


class Registry:
    """Single source of truth for accounts, the roster, and records.

    Mutations are serialized under one lock; reads return copies or frozen
    records so callers always observe consistent snapshots.
    """

    def __init__(
        self,
        path: str | Path | None = None,
        clock=utcnow,
        session_ttl: timedelta = SESSION_TTL,
        scrypt_n: int = _SCRYPT_N,
    ):
        self._clock = clock
        self._session_ttl = session_ttl
        self._scrypt_n = scrypt_n  # stored per hash, so mixed costs verify fine
        self._lock = threading.RLock()
        self._accounts: dict[str, Account] = {}
        self._by_username: dict[str, str] = {}
        self._specialties: dict[str, str] = {}
        self._doctors: dict[str, DoctorRecord] = {}
        self._appointments: dict[str, Appointment] = {}
        self._active_by_slot: dict[str, str] = {}
        self._history: dict[str, list[HistoryEntry]] = {}
        self._sessions: dict[str, Session] = {}
        self._patient_seq = 0
        self._appointment_seq = 0
        self._history_seq = 0
        self._store = JournalStore(path) if path is not None else None
        if self._store is not None:
            for family, op, record in self._store.entries():
                self._apply(family, op, record)

    # ------------------------------------------------------------------
    # journal plumbing
    # ------------------------------------------------------------------

    def _log(self, family: str, op: str, record: dict):
        if self._store is not None:
            self._store.append(family, op, record)

    def _apply(self, family: str, op: str, record: dict):
        if family == "account":
            account = Account(
                account_id=record["account_id"],
                username=record["username"],
                credential_hash=record["credential_hash"],
                created_at=_dt(record["created_at"]),
                role=Role(record["role"]),
                doctor_id=record.get("doctor_id"),
            )
            self._accounts[account.account_id] = account
            self._by_username[account.username] = account.account_id
            if account.role is Role.PATIENT:
                self._patient_seq = max(self._patient_seq, int(account.account_id[1:]))
        elif family == "specialty":
            self._specialties[record["specialty_id"]] = record["name"]
        elif family == "doctor":
            hours = {int(k): tuple(tuple(span) for span in v) for k, v in record["working_hours"].items()}
            self._doctors[record["doctor_id"]] = DoctorRecord(
                doctor_id=record["doctor_id"],
                name=record["name"],
                specialty_id=record["specialty_id"],
                working_hours=hours,
                on_duty=record["on_duty"],
            )
        elif family == "appointment" and op == "add":
            appt = Appointment(
                appointment_id=record["appointment_id"],
                patient_id=record["patient_id"],
                doctor_id=record["doctor_id"],
                slot_id=record["slot_id"],
                slot_start=_dt(record["slot_start"]),
                state=AppointmentState(record["state"]),
                recorded_at=_dt(record["recorded_at"]),
            )
            self._appointments[appt.appointment_id] = appt
            if appt.state is AppointmentState.ACTIVE:
                self._active_by_slot[appt.slot_id] = appt.appointment_id
            self._appointment_seq = max(self._appointment_seq, int(appt.appointment_id[1:]))
        elif family == "appointment" and op == "state":
            appt = self._appointments[record["appointment_id"]]
            updated = replace(
                appt,
                state=AppointmentState(record["state"]),
                outcome_note=record.get("outcome_note", appt.outcome_note),
            )
            self._appointments[appt.appointment_id] = updated
            if updated.state is not AppointmentState.ACTIVE:
                self._active_by_slot.pop(appt.slot_id, None)
        elif family == "history":
            entry = HistoryEntry(
                entry_id=record["entry_id"],
                appointment_id=record["appointment_id"],
                patient_id=record["patient_id"],
                clinic_id=record["clinic_id"],
                summary=record["summary"],
                recorded_at=_dt(record["recorded_at"]),
            )
            self._history.setdefault(entry.patient_id, []).append(entry)
            self._history_seq = max(self._history_seq, int(entry.entry_id[1:]))
        else:
            raise ValueError(f"unknown journal entry {family}/{op}")

    # ------------------------------------------------------------------
    # accounts & sessions
    # ------------------------------------------------------------------

    def register_user(self, username: str, credential: str, now: datetime | None = None) -> str:
        if len(credential) < MIN_CREDENTIAL_LENGTH:
            raise WeakCredential(f"credential shorter than {MIN_CREDENTIAL_LENGTH} characters")
        with self._lock:
            if username in self._by_username:
                raise UsernameTaken(f"username {username!r} already registered")
            self._patient_seq += 1
            account = Account(
                account_id=f"p{self._patient_seq:06d}",
                username=username,
                credential_hash=hash_credential(credential, n=self._scrypt_n),
                created_at=now or self._clock(),
            )
            self._commit_account(account)
            return account.account_id

    def register_doctor_account(
        self, username: str, credential: str, doctor_id: str, now: datetime | None = None
    ) -> str:
        if len(credential) < MIN_CREDENTIAL_LENGTH:
            raise WeakCredential(f"credential shorter than {MIN_CREDENTIAL_LENGTH} characters")
        with self._lock:
            self.get_doctor(doctor_id)
            if username in self._by_username:
                raise UsernameTaken(f"username {username!r} already registered")
            account = Account(
                account_id=f"acct-{doctor_id}",
                username=username,
                credential_hash=hash_credential(credential, n=self._scrypt_n),
                created_at=now or self._clock(),
                role=Role.DOCTOR,
                doctor_id=doctor_id,
            )
            self._commit_account(account)
            return account.account_id

    def _commit_account(self, account: Account):
        self._accounts[account.account_id] = account
        self._by_username[account.username] = account.account_id
        self._log(
            "account",
            "add",
            {
                "account_id": account.account_id,
                "username": account.username,
                "credential_hash": account.credential_hash,
                "created_at": account.created_at.isoformat(),
                "role": account.role.value,
                "doctor_id": account.doctor_id,
            },
        )

    def authenticate(self, username: str, credential: str, now: datetime | None = None) -> str:
        now = now or self._clock()
        with self._lock:
            account_id = self._by_username.get(username)
            if account_id is None:
                # burn a hash anyway so unknown users cost the same as wrong passwords
                verify_credential(credential, hash_credential("placeholder", n=self._scrypt_n))
                raise InvalidCredentials("invalid username or password")
            account = self._accounts[account_id]
            if not verify_credential(credential, account.credential_hash):
                raise InvalidCredentials("invalid username or password")
            token = secrets.token_urlsafe(24)
            self._sessions[token] = Session(token, account, now + self._session_ttl)
            return token

    def resolve_session(self, token: str, now: datetime | None = None) -> Account:
        now = now or self._clock()
        with self._lock:
            session = self._sessions.get(token)
            if session is None or now > session.expires_at:
                self._sessions.pop(token, None)
                raise InvalidCredentials("session missing or expired")
            return session.account

    def get_patient(self, patient_id: str) -> Account:
        account = self._accounts.get(patient_id)
        if account is None or account.role is not Role.PATIENT:
            raise UnknownPatient(f"no patient {patient_id!r}")
        return account

    # ------------------------------------------------------------------
    # roster
    # ------------------------------------------------------------------

    def add_specialty(self, specialty_id: str, name: str):
        with self._lock:
            if specialty_id not in self._specialties:
                self._specialties[specialty_id] = name
                self._log("specialty", "add", {"specialty_id": specialty_id, "name": name})

    def add_doctor(self, record: DoctorRecord):
        with self._lock:
            if record.specialty_id not in self._specialties:
                raise UnknownSpecialty(f"no specialty {record.specialty_id!r}")
            self._doctors[record.doctor_id] = record
            self._log(
                "doctor",
                "add",
                {
                    "doctor_id": record.doctor_id,
                    "name": record.name,
                    "specialty_id": record.specialty_id,
                    "working_hours": {str(k): [list(span) for span in v] for k, v in record.working_hours.items()},
                    "on_duty": record.on_duty,
                },
            )

    def get_doctor(self, doctor_id: str) -> DoctorRecord:
        record = self._doctors.get(doctor_id)
        if record is None:
            raise UnknownDoctor(f"no doctor {doctor_id!r}")
        return record

    def doctors(self, specialty_id: str | None = None) -> list[DoctorRecord]:
        with self._lock:
            if specialty_id is not None and specialty_id not in self._specialties:
                raise UnknownSpecialty(f"no specialty {specialty_id!r}")
            records = [
                d for d in self._doctors.values()
                if specialty_id is None or d.specialty_id == specialty_id
            ]
            return sorted(records, key=lambda d: d.doctor_id)

    def specialties(self) -> list[tuple[str, str]]:
        with self._lock:
            return sorted(self._specialties.items())

    def specialty_name(self, specialty_id: str) -> str:
        name = self._specialties.get(specialty_id)
        if name is None:
            raise UnknownSpecialty(f"no specialty {specialty_id!r}")
        return name

    # ------------------------------------------------------------------
    # appointments & history
    # ------------------------------------------------------------------

    def create_appointment(
        self,
        patient_id: str,
        doctor_id: str,
        slot_id: str,
        slot_start: datetime,
        now: datetime | None = None,
    ) -> Appointment:
        with self._lock:
            self.get_patient(patient_id)
            self.get_doctor(doctor_id)
            if slot_id in self._active_by_slot:
                raise SlotTaken(f"slot {slot_id} already has an active appointment")
            self._appointment_seq += 1
            appt = Appointment(
                appointment_id=f"a{self._appointment_seq:06d}",
                patient_id=patient_id,
                doctor_id=doctor_id,
                slot_id=slot_id,
                slot_start=slot_start,
                state=AppointmentState.ACTIVE,
                recorded_at=now or self._clock(),
            )
            self._appointments[appt.appointment_id] = appt
            self._active_by_slot[slot_id] = appt.appointment_id
            self._log(
                "appointment",
                "add",
                {
                    "appointment_id": appt.appointment_id,
                    "patient_id": appt.patient_id,
                    "doctor_id": appt.doctor_id,
                    "slot_id": appt.slot_id,
                    "slot_start": appt.slot_start.isoformat(),
                    "state": appt.state.value,
                    "recorded_at": appt.recorded_at.isoformat(),
                },
            )
            return appt

    def get_appointment(self, appointment_id: str) -> Appointment:
        appt = self._appointments.get(appointment_id)
        if appt is None:
            raise UnknownAppointment(f"no appointment {appointment_id!r}")
        return appt

    def set_appointment_state(
        self, appointment_id: str, state: AppointmentState, outcome_note: str | None = None
    ) -> Appointment:
        with self._lock:
            appt = self.get_appointment(appointment_id)
            if appt.state is not AppointmentState.ACTIVE:
                raise UnknownAppointment(f"appointment {appointment_id} is not active")
            updated = replace(appt, state=state, outcome_note=outcome_note)
            self._appointments[appointment_id] = updated
            self._active_by_slot.pop(appt.slot_id, None)
            self._log(
                "appointment",
                "state",
                {"appointment_id": appointment_id, "state": state.value, "outcome_note": outcome_note},
            )
            return updated

    def active_appointment_for_slot(self, slot_id: str) -> Appointment | None:
        appt_id = self._active_by_slot.get(slot_id)
        return self._appointments[appt_id] if appt_id else None

    def appointments_for(self, patient_id: str) -> list[Appointment]:
        with self._lock:
            self.get_patient(patient_id)
            found = [a for a in self._appointments.values() if a.patient_id == patient_id]
            return sorted(found, key=lambda a: a.recorded_at)

    def active_appointments(self) -> list[Appointment]:
        with self._lock:
            return [a for a in self._appointments.values() if a.state is AppointmentState.ACTIVE]

    def record_history(
        self, appointment_id: str, clinic_id: str, summary: str, now: datetime | None = None
    ) -> HistoryEntry:
        with self._lock:
            appt = self.get_appointment(appointment_id)
            self._history_seq += 1
            entry = HistoryEntry(
                entry_id=f"h{self._history_seq:06d}",
                appointment_id=appointment_id,
                patient_id=appt.patient_id,
                clinic_id=clinic_id,
                summary=summary,
                recorded_at=now or self._clock(),
            )
            self._history.setdefault(entry.patient_id, []).append(entry)
            self._log(
                "history",
                "add",
                {
                    "entry_id": entry.entry_id,
                    "appointment_id": entry.appointment_id,
                    "patient_id": entry.patient_id,
                    "clinic_id": entry.clinic_id,
                    "summary": entry.summary,
                    "recorded_at": entry.recorded_at.isoformat(),
                },
            )
            return entry

    def fetch_history(self, patient_id: str) -> list[HistoryEntry]:
        with self._lock:
            self.get_patient(patient_id)
            entries = list(self._history.get(patient_id, ()))
            return sorted(entries, key=lambda e: (e.recorded_at, e.entry_id))

    def close(self):
        if self._store is not None:
            self._store.close()
