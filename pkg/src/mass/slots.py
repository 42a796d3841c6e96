"""Slot vocabulary and hour-template generation.

The clinic day is laid out hour by hour: a small group of patients is booked
right at the top of each hour (the wave), short back-to-back slots fill the
middle, and the tail of the hour stays unbookable so a doctor who is running
late can recover before the next hour begins.

Every slot carries a lifecycle state; the legal transitions are listed in
``LEGAL_TRANSITIONS`` and enforced by the engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum

from .errors import InvalidTemplate, MisalignedHours

HOUR_MINUTES = 60


class SlotState(str, Enum):
    AVAILABLE = "available"
    HELD = "held"
    BOOKED = "booked"
    RELEASED = "released"  # freed by cancellation or postponement, still bookable
    RETIRED = "retired"    # start time passed, or withdrawn by postponement


#: (from, to) pairs the lifecycle permits; anything else is a bug.
LEGAL_TRANSITIONS = frozenset(
    {
        (SlotState.AVAILABLE, SlotState.HELD),
        (SlotState.HELD, SlotState.BOOKED),
        (SlotState.HELD, SlotState.AVAILABLE),   # expiry or abandon
        (SlotState.BOOKED, SlotState.RELEASED),  # cancellation / postponement
        (SlotState.RELEASED, SlotState.HELD),
        (SlotState.AVAILABLE, SlotState.RETIRED),
        (SlotState.RELEASED, SlotState.RETIRED),
    }
)


class FreedCause(str, Enum):
    CANCELLATION = "cancellation"
    POSTPONEMENT = "postponement"


@dataclass(frozen=True)
class WaveTemplate:
    """Parameters of the hour layout.

    slot_length     minutes per appointment
    wave_size       patients booked together at each hour start (>= 2)
    catchup_window  minutes at the hour end left unbookable
    hour_length     fixed at 60; template arithmetic assumes clock hours
    """

    slot_length: int = 10
    wave_size: int = 2
    catchup_window: int = 10
    hour_length: int = HOUR_MINUTES

    def __post_init__(self):
        if self.hour_length != HOUR_MINUTES:
            raise InvalidTemplate("hour_length is fixed at 60 minutes")
        if self.slot_length < 1:
            raise InvalidTemplate("slot_length must be at least 1 minute")
        if self.wave_size < 2:
            raise InvalidTemplate("wave_size must book more than one patient")
        if self.catchup_window < 0:
            raise InvalidTemplate("catchup_window cannot be negative")
        if self.slot_length + self.catchup_window > self.hour_length:
            raise InvalidTemplate("slot does not fit before the catch-up window")

    def start_offsets(self) -> list[int]:
        """Minute offsets of slot starts within one hour (wave counted once)."""
        offsets = []
        minute = 0
        while minute + self.slot_length <= self.hour_length - self.catchup_window:
            offsets.append(minute)
            minute += self.slot_length
        return offsets

    def slots_per_hour(self) -> int:
        return self.wave_size + len(self.start_offsets()) - 1


@dataclass
class TimeSlot:
    """One bookable interval on a doctor's calendar.

    ``hour_position`` is the ordinal within the hour block: 0 for every wave
    slot (they intentionally share a start), 1.. for the sequential slots.
    Hold and booking details are populated by the engine alongside ``state``.
    """

    slot_id: str
    doctor_id: str
    start: datetime
    duration: int
    state: SlotState = SlotState.AVAILABLE
    hour_position: int = 0
    held_by: str | None = None
    hold_expires_at: datetime | None = None
    appointment_id: str | None = None

    @property
    def end(self) -> datetime:
        return self.start + timedelta(minutes=self.duration)


@dataclass(frozen=True)
class HoldTicket:
    """A time-limited exclusive claim on a slot, pending confirmation."""

    ticket_id: str
    slot_id: str
    patient_id: str
    issued_at: datetime
    expires_at: datetime


@dataclass(frozen=True)
class FreedSlotEvent:
    """A booked slot came free again; carries why and when."""

    slot_id: str
    cause: FreedCause
    occurred_at: datetime


def _check_interval(start: datetime, end: datetime):
    for point, name in ((start, "start"), (end, "end")):
        if point.minute or point.second or point.microsecond:
            raise MisalignedHours(f"interval {name} {point.isoformat()} is not on an hour boundary")
    if end <= start:
        raise MisalignedHours("interval end must be after its start")


def generate_slots(
    doctor_id: str,
    working_hours: list[tuple[datetime, datetime]],
    template: WaveTemplate | None = None,
) -> list[TimeSlot]:
    """Lay out one day's bookable slots over the given working-hour intervals.

    Per hour: ``wave_size`` slots at minute 0, then one slot every
    ``slot_length`` minutes until the catch-up window begins. All slots start
    Available. Intervals must be whole-hour aligned and non-overlapping.
    """
    template = template or WaveTemplate()
    intervals = sorted(working_hours, key=lambda pair: pair[0])
    for interval in intervals:
        _check_interval(*interval)
    for (_, prev_end), (next_start, _) in zip(intervals, intervals[1:]):
        if next_start < prev_end:
            raise MisalignedHours("working-hour intervals overlap")

    offsets = template.start_offsets()
    slots: list[TimeSlot] = []
    for start, end in intervals:
        hour = start
        while hour < end:
            index = 0
            for position, offset in enumerate(offsets):
                copies = template.wave_size if position == 0 else 1
                for _ in range(copies):
                    slots.append(
                        TimeSlot(
                            slot_id=f"{doctor_id}:{hour:%Y%m%d%H}:{index}",
                            doctor_id=doctor_id,
                            start=hour + timedelta(minutes=offset),
                            duration=template.slot_length,
                            hour_position=position,
                        )
                    )
                    index += 1
            hour += timedelta(hours=1)
    return slots
