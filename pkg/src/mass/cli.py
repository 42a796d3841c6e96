"""Operator command line: seed the roster, inspect slot layouts, run the
HTTP service, and drive simulations.

Exit codes: 0 success, 1 validation failure, 2 I/O failure. The store
location comes from --data-dir or the MASS_DATA_DIR environment variable;
without either, state is in-memory only (fine for simulate/compare).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from datetime import date

from . import sim
from .errors import SchedulingError
from .registry import DoctorRecord
from .service import ClinicService
from .slots import WaveTemplate, generate_slots

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_seed(args) -> int:
    fixture = _load_json(args.fixture)
    if not isinstance(fixture, list):
        raise SchedulingError("fixture must be a JSON array of doctor records")
    service = ClinicService(args.data_dir)
    doctors = specialties_before = accounts = 0
    specialty_ids = set()
    for i, record in enumerate(fixture):
        try:
            working_hours = {
                int(weekday): tuple(tuple(span) for span in spans)
                for weekday, spans in record["working_hours"].items()
            }
            doctor = DoctorRecord(
                doctor_id=record["doctor_id"],
                name=record["name"],
                specialty_id=record["specialty_id"],
                working_hours=working_hours,
                on_duty=record.get("on_duty", True),
            )
        except KeyError as exc:
            raise SchedulingError(f"doctor record {i}: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise SchedulingError(f"doctor record {i}: {exc}") from None
        service.seed_doctor(
            doctor,
            specialty_name=record.get("specialty", record["specialty_id"]),
            username=record.get("username"),
            credential=record.get("credential"),
        )
        doctors += 1
        specialty_ids.add(doctor.specialty_id)
        if record.get("username"):
            accounts += 1
    print(f"doctors: {doctors}")
    print(f"specialties: {len(specialty_ids)}")
    print(f"doctor accounts: {accounts}")
    service.close()
    return EXIT_OK


def cmd_slots(args) -> int:
    service = ClinicService(args.data_dir)
    doctor = service.registry.get_doctor(args.doctor)
    template = WaveTemplate(
        slot_length=args.slot_length,
        wave_size=args.wave_size,
        catchup_window=args.catchup,
    )
    day = date.fromisoformat(args.date)
    slots = generate_slots(doctor.doctor_id, doctor.intervals_for(day), template)
    print(f"{'slot_id':<24} {'date':<10} {'time':<5} {'mins':>4} {'pos':>3}")
    for slot in slots:
        marker = " wave" if slot.hour_position == 0 else ""
        print(
            f"{slot.slot_id:<24} {slot.start.date().isoformat():<10} "
            f"{slot.start.strftime('%H:%M'):<5} {slot.duration:>4} {slot.hour_position:>3}{marker}"
        )
    print(f"total: {len(slots)}")
    service.close()
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = sim.config_from_json(_load_json(args.config))
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    report = sim.run(config)
    sys.stdout.write(sim.emit_report(report, format=args.format))
    return EXIT_OK


def cmd_compare(args) -> int:
    baseline = sim.config_from_json(_load_json(args.baseline))
    treatment = sim.config_from_json(_load_json(args.treatment))
    if args.seed is not None:
        baseline = replace(baseline, seed=args.seed)
        treatment = replace(treatment, seed=args.seed)
    comparison = sim.compare(baseline, treatment, args.reps)
    sys.stdout.write(sim.emit_report(comparison, format=args.format))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    host, _, port = args.listen.rpartition(":")
    if not port.isdigit():
        raise SchedulingError(f"--listen must be host:port, got {args.listen!r}")
    app = create_app(ClinicService(args.data_dir))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mass", description="appointment scheduling service tools")
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("MASS_DATA_DIR"),
        help="store location (default: $MASS_DATA_DIR, else in-memory)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seed", help="load a JSON array of doctor records")
    p.add_argument("fixture")
    p.set_defaults(fn=cmd_seed)

    p = sub.add_parser("slots", help="print one doctor's slot layout for a date")
    p.add_argument("--doctor", required=True)
    p.add_argument("--date", required=True, help="YYYY-MM-DD")
    p.add_argument("--slot-length", type=int, default=10)
    p.add_argument("--wave-size", type=int, default=2)
    p.add_argument("--catchup", type=int, default=10)
    p.set_defaults(fn=cmd_slots)

    p = sub.add_parser("simulate", help="run one policy config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("compare", help="baseline vs treatment over N replications")
    p.add_argument("baseline")
    p.add_argument("treatment")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--listen", default="127.0.0.1:8000")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON at line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except SchedulingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
