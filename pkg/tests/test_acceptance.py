"""Acceptance gate: one test per primary criterion, each printing a verdict
line (run with ``pytest tests/test_acceptance.py -v -s``)."""

import json
import random
import subprocess
import sys
import threading
import time
from datetime import datetime, timedelta, timezone

import pytest

from mass import errors, sim
from mass.cli import main as cli_main
from mass.desk import AppointmentRequest, PriorityClass, RequestFilter, RequestStatus
from mass.engine import SlotEngine
from mass.errors import SchedulingError
from mass.notify import NotificationHub
from mass.registry import DoctorRecord, Registry
from mass.slots import LEGAL_TRANSITIONS, FreedCause, FreedSlotEvent, SlotState, WaveTemplate, generate_slots

from conftest import MONDAY, OPENING, full_week


def announce(name):
    print(f"[PASS] {name}")


# ---------------------------------------------------------------------------
# 1. waiting-time reduction, desk scale
# ---------------------------------------------------------------------------


def test_waiting_time_reduction_desk_scale():
    baseline = sim.SimConfig(
        policy=sim.FcfsWalkIn(), horizon=180, patients=18,
        service_time=sim.Deterministic(10), seed=1,
    )
    treatment = sim.SimConfig(
        policy=sim.ModifiedWave(WaveTemplate()), horizon=180, patients=18,
        service_time=sim.Deterministic(10), seed=1,
    )
    started = time.perf_counter()
    comparison = sim.compare(baseline, treatment, 1)
    elapsed = time.perf_counter() - started

    assert comparison.baseline.mean_wait == 85.0  # hand oracle m(n-1)/2, exact
    assert comparison.baseline.max_wait == 170
    assert comparison.treatment.mean_wait <= 30
    assert comparison.reduction >= 0.73
    assert elapsed < 1.0
    announce(
        "waiting-time reduction: baseline mean 85.0 / max 170, "
        f"treatment mean {comparison.treatment.mean_wait:.2f} <= 30, "
        f"reduction {comparison.reduction:.1%} >= 73%"
    )


# ---------------------------------------------------------------------------
# 2. stochastic robustness
# ---------------------------------------------------------------------------


def test_stochastic_robustness():
    service_time = sim.TruncNormal(10, 2, 5, 20)
    jitter = sim.Uniform(-5, 5)
    baseline = sim.SimConfig(
        policy=sim.FcfsWalkIn(), horizon=480, patients=48,
        service_time=service_time, punctuality_jitter=jitter, seed=2026,
    )
    treatment = sim.SimConfig(
        policy=sim.ModifiedWave(WaveTemplate()), horizon=480, patients=48,
        service_time=service_time, punctuality_jitter=jitter, seed=2026,
    )
    started = time.perf_counter()
    comparison = sim.compare(baseline, treatment, 100)
    elapsed = time.perf_counter() - started

    assert comparison.treatment_wins >= 95
    assert comparison.reduction >= 0.50
    assert elapsed < 10.0
    announce(
        f"stochastic robustness: treatment wins {comparison.treatment_wins}/100, "
        f"pooled reduction {comparison.reduction:.1%} >= 50%"
    )


# ---------------------------------------------------------------------------
# 3. no double booking over randomized operation sequences
# ---------------------------------------------------------------------------

DOCTORS = [f"doc{i}" for i in range(5)]


def build_lifecycle_world():
    registry = Registry(scrypt_n=2**8)  # light hash cost; this test stresses the state machine
    engine = SlotEngine(registry, NotificationHub())
    registry.add_specialty("general", "General")
    for doctor_id in DOCTORS:
        registry.add_doctor(DoctorRecord(doctor_id, doctor_id, "general", full_week(8, 12)))
        engine.ensure_day(doctor_id, MONDAY)
    patients = [registry.register_user(f"pt{i}", f"password{i}", OPENING) for i in range(10)]
    return registry, engine, patients


def state_snapshot(engine):
    # white-box fast path: 10k ops x 90 slots makes copying snapshots the bottleneck
    return tuple(
        (slot_id, s.state, s.held_by, s.appointment_id)
        for slot_id, s in sorted(engine._slots.items())
    )


def assert_no_double_claims(engine, registry):
    for slot_id, slot in engine._slots.items():
        has_ticket = slot_id in engine._ticket_by_slot
        active = registry.active_appointment_for_slot(slot_id)
        assert not (has_ticket and active), f"slot {slot_id} double-claimed"
        if slot.state is SlotState.HELD:
            assert has_ticket and not active
        elif slot.state is SlotState.BOOKED:
            assert active and not has_ticket
        else:
            assert not has_ticket
            if slot.state in (SlotState.AVAILABLE, SlotState.RELEASED):
                assert not active


def test_no_double_booking_over_randomized_sequences():
    total_ops = 0
    violations = []
    sequences = 100
    ops_per_sequence = 100
    for sequence in range(sequences):
        rng = random.Random(1000 + sequence)
        registry, engine, patients = build_lifecycle_world()
        engine.add_observer(
            lambda slot_id, a, b: violations.append((slot_id, a, b))
            if (a, b) not in LEGAL_TRANSITIONS
            else None
        )
        now = OPENING
        slot_ids = [s.slot_id for s in engine.slots_snapshot()]
        live_tickets = []
        appointments = []

        for _ in range(ops_per_sequence):
            total_ops += 1
            op = rng.choices(
                ("hold", "confirm", "expire", "cancel", "postpone", "tick"),
                weights=(35, 25, 10, 12, 8, 10),
            )[0]
            before = state_snapshot(engine)
            try:
                if op == "hold":
                    ticket = engine.hold_slot(rng.choice(slot_ids), rng.choice(patients), now)
                    live_tickets.append(ticket)
                elif op == "confirm":
                    if live_tickets and rng.random() < 0.9:
                        ticket = live_tickets.pop(rng.randrange(len(live_tickets)))
                        appointments.append(engine.confirm_hold(ticket.ticket_id, now))
                    else:
                        engine.confirm_hold(f"t{rng.randrange(999999):06d}", now)
                elif op == "expire":
                    expired = engine.expire_holds(now)
                    gone = {e.ticket_id for e in expired}
                    live_tickets = [t for t in live_tickets if t.ticket_id not in gone]
                elif op == "cancel":
                    if appointments and rng.random() < 0.9:
                        appointment = appointments.pop(rng.randrange(len(appointments)))
                        engine.cancel_appointment(appointment.appointment_id, now)
                    else:
                        engine.cancel_appointment("a999999", now)
                elif op == "postpone":
                    start_hour = rng.randint(8, 11)
                    window_start = OPENING.replace(hour=start_hour, minute=0)
                    if window_start > now:
                        engine.postpone_doctor(
                            rng.choice(DOCTORS),
                            window_start,
                            window_start + timedelta(hours=rng.randint(1, 2)),
                            now,
                        )
                        retired = {
                            s.slot_id for s in engine.slots_snapshot() if s.state is SlotState.RETIRED
                        }
                        live_tickets = [t for t in live_tickets if t.slot_id not in retired]
                        appointments = [
                            a
                            for a in appointments
                            if registry.get_appointment(a.appointment_id).state.value == "active"
                        ]
                else:
                    now += timedelta(seconds=rng.choice((10, 45, 90, 200)))
            except errors.HoldExpired:
                # contractual side effect: the lapsed hold frees its slot
                pass
            except SchedulingError:
                assert state_snapshot(engine) == before, f"failed {op} mutated state"
            assert_no_double_claims(engine, registry)

    assert total_ops == 10_000
    assert violations == []
    announce(f"no-double-booking: {total_ops} randomized ops across 5 doctors, 0 violations")


# ---------------------------------------------------------------------------
# 4. matching oracle equality
# ---------------------------------------------------------------------------

MATCH_SPECIALTIES = {"m1": "cardiology", "m2": "cardiology", "m3": "dermatology"}


def build_matching_world():
    registry = Registry()
    engine = SlotEngine(registry, NotificationHub())
    registry.add_specialty("cardiology", "Cardiology")
    registry.add_specialty("dermatology", "Dermatology")
    for doctor_id, specialty in MATCH_SPECIALTIES.items():
        registry.add_doctor(DoctorRecord(doctor_id, doctor_id, specialty, full_week(8, 12)))
        engine.ensure_day(doctor_id, MONDAY)
    return engine


def brute_force_offers(events, pending, slot_lookup, now):
    def compatible(req, slot):
        f = req.filter
        if slot.start <= now:
            return False
        if f.doctor_id is not None and slot.doctor_id != f.doctor_id:
            return False
        if f.specialty_id is not None and MATCH_SPECIALTIES[slot.doctor_id] != f.specialty_id:
            return False
        if f.day is not None and slot.start.date() != f.day:
            return False
        if f.window is not None and not (f.window[0] <= slot.start < f.window[1]):
            return False
        return True

    order = sorted(
        (r for r in pending if r.status is RequestStatus.PENDING),
        key=lambda r: (-int(r.priority), r.submitted_at, r.request_id),
    )
    taken = set()
    offers = []
    for event in events:
        slot = slot_lookup[event.slot_id]
        if slot.state not in (SlotState.AVAILABLE, SlotState.RELEASED):
            continue
        for req in order:
            if req.request_id not in taken and compatible(req, slot):
                offers.append((req.request_id, event.slot_id))
                taken.add(req.request_id)
                break
    return offers


def test_matching_oracle_equality():
    rng = random.Random(7)
    filters = list(MATCH_SPECIALTIES) + ["cardiology", "dermatology", "day"]
    for round_index in range(1000):
        engine = build_matching_world()
        slot_lookup = {s.slot_id: s for s in engine.slots_snapshot()}
        slot_ids = sorted(slot_lookup)
        pending = []
        for i in range(rng.randint(0, 100)):
            choice = rng.choice(filters)
            if choice in MATCH_SPECIALTIES:
                request_filter = RequestFilter.by_doctor(choice)
            elif choice == "day":
                request_filter = RequestFilter.by_day(MONDAY)
            else:
                request_filter = RequestFilter.by_specialty(choice)
            pending.append(
                AppointmentRequest(
                    request_id=f"r{i:03d}",
                    patient_id=f"px{i}",
                    filter=request_filter,
                    priority=PriorityClass(rng.randrange(3)),
                    submitted_at=OPENING + timedelta(minutes=rng.randrange(60)),
                )
            )
        rng.shuffle(pending)
        events = [
            FreedSlotEvent(slot_id, FreedCause.CANCELLATION, OPENING)
            for slot_id in rng.sample(slot_ids, rng.randint(1, 5))
        ]
        expected = brute_force_offers(events, pending, slot_lookup, OPENING)
        actual = engine.match_freed_slots(events, pending, OPENING)
        assert [(o.request_id, o.slot_id) for o in actual] == expected, f"round {round_index}"
    announce("matching oracle: 1000 random queues (<=100 requests) match brute force exactly")


# ---------------------------------------------------------------------------
# 5. template oracle over an eight-hour day
# ---------------------------------------------------------------------------


def test_template_oracle_eight_hour_day():
    day_start = datetime(2026, 8, 10, 8, 0, tzinfo=timezone.utc)
    day_end = datetime(2026, 8, 10, 16, 0, tzinfo=timezone.utc)
    slots = generate_slots("d1", [(day_start, day_end)], WaveTemplate())

    assert len(slots) == 48

    # independent minute-grid enumeration: for the default template the only
    # legal start minutes are 0 (x2), 10, 20, 30, 40, and [50, 60) stays empty
    expected_minutes = sorted([0, 0, 10, 20, 30, 40])
    for hour in range(8, 16):
        in_hour = [s for s in slots if s.start.hour == hour]
        assert sorted(s.start.minute for s in in_hour) == expected_minutes
        at_hour_start = [s for s in in_hour if s.start.minute == 0]
        assert len(at_hour_start) == 2

    catchup_minutes = set(range(50, 60))
    for slot in slots:
        covered = {slot.start.minute + m for m in range(slot.duration)}
        assert not covered & catchup_minutes, f"{slot.slot_id} intrudes on the catch-up window"
    announce("template oracle: 8h day -> 48 slots, 2 per hour start, catch-up windows empty")


# ---------------------------------------------------------------------------
# 6. CLI determinism
# ---------------------------------------------------------------------------


def test_cli_compare_determinism(tmp_path, capsys):
    base_path = tmp_path / "fcfs.json"
    treat_path = tmp_path / "wave.json"
    base_path.write_text(json.dumps({
        "policy": {"kind": "fcfs_walk_in"}, "horizon": 480, "patients": 48,
        "service_time": {"kind": "trunc_normal", "mean": 10, "sd": 2, "min": 5, "max": 20},
        "punctuality_jitter": {"kind": "uniform", "min": -5, "max": 5}, "seed": 11,
    }))
    treat_path.write_text(json.dumps({
        "policy": {"kind": "modified_wave", "template": {}}, "horizon": 480, "patients": 48,
        "service_time": {"kind": "trunc_normal", "mean": 10, "sd": 2, "min": 5, "max": 20},
        "punctuality_jitter": {"kind": "uniform", "min": -5, "max": 5}, "seed": 11,
    }))
    argv = ["compare", str(base_path), str(treat_path), "--reps", "20", "--format", "csv"]

    in_process = []
    for _ in range(2):
        assert cli_main(argv) == 0
        in_process.append(capsys.readouterr().out.encode())
    assert in_process[0] == in_process[1]

    # byte-for-byte across separate processes as well
    runs = [
        subprocess.run(
            [sys.executable, "-m", "mass.cli", *argv], capture_output=True, check=True
        ).stdout
        for _ in range(2)
    ]
    assert runs[0] == runs[1] == in_process[0]
    announce("determinism: cmd_compare output byte-identical across runs and processes")


# ---------------------------------------------------------------------------
# 7. API linearization under racing holds
# ---------------------------------------------------------------------------


@pytest.fixture
def live_server():
    import uvicorn

    from mass.api import create_app
    from mass.service import ClinicService

    fixed_now = datetime(2026, 8, 10, 6, 0, tzinfo=timezone.utc)
    service = ClinicService(clock=lambda: fixed_now)
    for i in range(3):
        service.seed_doctor(
            DoctorRecord(f"d{i}", f"Dr. {i}", "general", full_week(8, 16)),
            specialty_name="General",
        )
    config = uvicorn.Config(create_app(service), host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server failed to start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_api_linearization_racing_holds(live_server):
    import requests

    base = live_server
    tokens = []
    for name in ("racer-a", "racer-b"):
        requests.post(f"{base}/signup", json={"username": name, "credential": "password123"}, timeout=5)
        response = requests.post(
            f"{base}/login", json={"username": name, "credential": "password123"}, timeout=5
        )
        tokens.append(response.json()["token"])

    slot_ids = []
    for doctor in ("d0", "d1", "d2"):
        listing = requests.get(
            f"{base}/doctors/{doctor}/slots",
            params={"from": "2026-08-10T08:00:00+00:00", "to": "2026-08-11T00:00:00+00:00"},
            timeout=5,
        ).json()
        slot_ids.extend(s["slot_id"] for s in listing)
    assert len(slot_ids) >= 100

    sessions = [requests.Session(), requests.Session()]
    for round_index in range(100):
        slot_id = slot_ids[round_index]
        barrier = threading.Barrier(2)
        statuses = []

        def race(session, token):
            barrier.wait()
            response = session.post(
                f"{base}/slots/{slot_id}/hold",
                headers={"X-Session-Token": token},
                timeout=10,
            )
            statuses.append(response.status_code)

        threads = [
            threading.Thread(target=race, args=(sessions[i], tokens[i])) for i in range(2)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(statuses) == [200, 409], f"round {round_index}: {statuses}"
    announce("api linearization: 100 racing hold rounds, each exactly one 200 and one 409")
