from datetime import date, datetime, timedelta, timezone

import pytest

from mass.registry import DoctorRecord
from mass.service import ClinicService

# 2026-08-10 is a Monday; most tests book within that week
MONDAY = date(2026, 8, 10)
OPENING = datetime(2026, 8, 10, 6, 0, tzinfo=timezone.utc)


class MutableClock:
    """Settable time source shared by the whole service under test."""

    def __init__(self, now=OPENING):
        self.now = now

    def __call__(self):
        return self.now

    def advance(self, **kwargs):
        self.now += timedelta(**kwargs)
        return self.now

    def set(self, now):
        self.now = now


def full_week(start=8, end=16):
    return {weekday: ((start, end),) for weekday in range(7)}


@pytest.fixture
def clock():
    return MutableClock()


@pytest.fixture
def service(clock):
    svc = ClinicService(clock=clock, scrypt_n=2**8)  # light hash cost for test speed
    svc.seed_doctor(
        DoctorRecord("d1", "Dr. Aoki", "cardiology", full_week(8, 11)),
        specialty_name="Cardiology",
        username="dr.aoki",
        credential="aoki-secret",
    )
    svc.seed_doctor(
        DoctorRecord("d2", "Dr. Banda", "cardiology", full_week(8, 11)),
        specialty_name="Cardiology",
    )
    svc.seed_doctor(
        DoctorRecord("d3", "Dr. Chen", "dermatology", full_week(9, 12)),
        specialty_name="Dermatology",
    )
    svc.registry.add_specialty("pediatrics", "Pediatrics")  # no doctors, on purpose
    return svc


@pytest.fixture
def patients(service):
    return [service.signup(f"patient{i}", f"password-{i}") for i in range(4)]
