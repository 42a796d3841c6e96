"""Request queue ordering, filter resolution, and catalog views."""

from datetime import date, datetime, timedelta, timezone

import pytest

from mass.desk import PriorityClass, RequestFilter, RequestStatus
from mass.errors import InvalidFilter, UnknownDoctor, UnknownPatient, UnknownRequest, UnknownSpecialty

from conftest import MONDAY


def submit(service, patient, request_filter, priority, at):
    return service.desk.submit_request(patient, request_filter, priority, at)


def test_priority_queue_ordering(service, patients, clock):
    alice = patients[0]
    t = clock.now
    r1 = submit(service, alice, RequestFilter.by_doctor("d1"), PriorityClass.ROUTINE, t + timedelta(minutes=1))
    r2 = submit(service, alice, RequestFilter.by_doctor("d1"), PriorityClass.ROUTINE, t + timedelta(minutes=2))
    r3 = submit(service, alice, RequestFilter.by_doctor("d1"), PriorityClass.URGENT, t + timedelta(minutes=3))
    snapshot = service.desk.pending_queue_snapshot()
    assert [r.request_id for r in snapshot] == [r3, r1, r2]

    # deterministic: repeated snapshots with no writes are identical
    assert [r.request_id for r in service.desk.pending_queue_snapshot()] == [r3, r1, r2]


def test_emergency_outranks_urgent(service, patients, clock):
    alice = patients[0]
    t = clock.now
    urgent = submit(service, alice, RequestFilter.by_doctor("d1"), PriorityClass.URGENT, t)
    emergency = submit(service, alice, RequestFilter.by_doctor("d1"), PriorityClass.EMERGENCY, t + timedelta(minutes=9))
    assert [r.request_id for r in service.desk.pending_queue_snapshot()] == [emergency, urgent]
    assert PriorityClass.EMERGENCY > PriorityClass.URGENT > PriorityClass.ROUTINE


def test_unknown_patient_rejected(service, clock):
    with pytest.raises(UnknownPatient):
        submit(service, "p999999", RequestFilter.by_doctor("d1"), PriorityClass.ROUTINE, clock.now)


def test_filter_validation(service, patients, clock):
    alice = patients[0]
    with pytest.raises(InvalidFilter):
        submit(service, alice, RequestFilter.by_doctor("d99"), PriorityClass.ROUTINE, clock.now)
    with pytest.raises(InvalidFilter):
        submit(service, alice, RequestFilter.by_specialty("surgery"), PriorityClass.ROUTINE, clock.now)
    with pytest.raises(InvalidFilter):
        RequestFilter(kind="by_day", day=None)
    with pytest.raises(InvalidFilter):
        RequestFilter(kind="by_day", day=MONDAY, doctor_id="d1")
    lo = datetime(2026, 8, 10, 10, tzinfo=timezone.utc)
    with pytest.raises(InvalidFilter):
        RequestFilter.by_day(MONDAY, window=(lo, lo))


def test_withdrawn_requests_leave_the_queue(service, patients, clock):
    alice = patients[0]
    r1 = submit(service, alice, RequestFilter.by_doctor("d1"), PriorityClass.ROUTINE, clock.now)
    service.desk.withdraw_request(r1)
    assert service.desk.pending_queue_snapshot() == []
    assert service.desk.get_request(r1).status is RequestStatus.WITHDRAWN
    with pytest.raises(UnknownRequest):
        service.desk.get_request("r999999")


def test_list_specialties_with_counts(service):
    summaries = {s.specialty_id: s for s in service.specialties()}
    assert summaries["cardiology"].doctor_count == 2
    assert summaries["dermatology"].doctor_count == 1
    assert summaries["pediatrics"].doctor_count == 0  # degenerate entry kept
    assert len(summaries) == 3


def test_list_doctors(service):
    assert [d.doctor_id for d in service.doctors()] == ["d1", "d2", "d3"]
    cardio = service.doctors("cardiology")
    assert [d.doctor_id for d in cardio] == ["d1", "d2"]
    assert all(d.specialty_name == "Cardiology" for d in cardio)
    with pytest.raises(UnknownSpecialty):
        service.doctors("surgery")


def test_doctor_schedule_view(service):
    view = service.doctor_schedule("d1", MONDAY)
    assert view.doctor_id == "d1"
    assert view.specialty_name == "Cardiology"
    assert view.on_duty is True
    assert len(view.slots) == 18
    with pytest.raises(UnknownDoctor):
        service.doctor_schedule("d9", MONDAY)


def test_fully_booked_day_shows_zero_slots(service, patients):
    alice = patients[0]
    for slot in list(service.doctor_schedule("d1", MONDAY).slots):
        ticket = service.hold_slot(slot.slot_id, alice)
        service.confirm_hold(ticket.ticket_id)
    assert service.doctor_schedule("d1", MONDAY).slots == []


def test_resolve_by_day_unions_all_doctors(service, patients, clock):
    alice = patients[0]
    request_id = submit(service, alice, RequestFilter.by_day(MONDAY), PriorityClass.ROUTINE, clock.now)
    candidates = service.desk.resolve_request(request_id)
    # d1, d2: 18 each (08-11); d3: 18 (09-12)
    assert len(candidates) == 54
    assert candidates == sorted(candidates, key=lambda s: (s.start, s.doctor_id, s.hour_position))
    assert {s.start.date() for s in candidates} == {MONDAY}


def test_resolve_by_doctor_equals_establish_available(service, patients, clock):
    alice = patients[0]
    service.doctor_schedule("d1", MONDAY)
    request_id = submit(service, alice, RequestFilter.by_doctor("d1"), PriorityClass.ROUTINE, clock.now)
    resolved = service.desk.resolve_request(request_id)
    direct = service.engine.establish_available("d1")
    assert [s.slot_id for s in resolved] == [s.slot_id for s in direct]


def test_resolve_by_specialty_unions_member_doctors(service, patients, clock):
    alice = patients[0]
    service.doctor_schedule("d1", MONDAY)
    service.doctor_schedule("d2", MONDAY)
    request_id = submit(service, alice, RequestFilter.by_specialty("cardiology"), PriorityClass.ROUTINE, clock.now)
    assert {s.doctor_id for s in service.desk.resolve_request(request_id)} == {"d1", "d2"}

    empty = submit(service, alice, RequestFilter.by_specialty("pediatrics"), PriorityClass.ROUTINE, clock.now)
    assert service.desk.resolve_request(empty) == []


def test_resolve_excludes_non_bookable_states(service, patients, clock):
    alice, bob = patients[:2]
    slots = service.doctor_schedule("d1", MONDAY).slots
    ticket = service.hold_slot(slots[0].slot_id, alice)
    service.confirm_hold(ticket.ticket_id)
    service.hold_slot(slots[1].slot_id, bob)
    request_id = submit(service, alice, RequestFilter.by_doctor("d1"), PriorityClass.ROUTINE, clock.now)
    resolved_ids = {s.slot_id for s in service.desk.resolve_request(request_id)}
    assert slots[0].slot_id not in resolved_ids
    assert slots[1].slot_id not in resolved_ids
    assert all(s.state.value in ("available", "released") for s in service.desk.resolve_request(request_id))


def test_fulfilled_requests_never_reappear(service, patients, clock):
    alice, bob = patients[:2]
    slots = service.doctor_schedule("d1", MONDAY).slots
    ticket = service.hold_slot(slots[0].slot_id, alice)
    appointment = service.confirm_hold(ticket.ticket_id)

    request_id = submit(service, bob, RequestFilter.by_doctor("d1"), PriorityClass.URGENT, clock.now)
    service.cancel_appointment(appointment.appointment_id)
    offered = service.desk.get_request(request_id)
    assert offered.status is RequestStatus.OFFERED
    assert service.desk.pending_queue_snapshot() == []

    service.confirm_hold(offered.offered_ticket_id)
    assert service.desk.get_request(request_id).status is RequestStatus.FULFILLED
    assert service.desk.pending_queue_snapshot() == []


def test_lapsed_offer_reverts_to_pending_in_place(service, patients, clock):
    alice, bob, carol = patients[:3]
    slots = service.doctor_schedule("d1", MONDAY).slots
    ticket = service.hold_slot(slots[0].slot_id, alice)
    appointment = service.confirm_hold(ticket.ticket_id)

    r_low = submit(service, carol, RequestFilter.by_doctor("d1"), PriorityClass.ROUTINE, clock.now)
    clock.advance(minutes=1)
    r_offer = submit(service, bob, RequestFilter.by_doctor("d1"), PriorityClass.URGENT, clock.now)
    service.cancel_appointment(appointment.appointment_id)
    assert service.desk.get_request(r_offer).status is RequestStatus.OFFERED

    clock.advance(seconds=121)
    service.sweep()
    request = service.desk.get_request(r_offer)
    assert request.status is RequestStatus.PENDING
    assert request.offered_ticket_id is None
    # queue position (priority, submitted_at) is unchanged: urgent still first
    assert [r.request_id for r in service.desk.pending_queue_snapshot()] == [r_offer, r_low]
