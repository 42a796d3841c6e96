"""Deterministic discrete-event comparison of two front-door policies.

``fcfs_walk_in`` models the walk-in clinic: everyone shows up when the
doors open and queues in arrival order. ``modified_wave`` books patients onto
the hour-template slots and lets an early-finishing doctor pull the next
present patient forward, using the unbookable hour tail to absorb overruns.

Everything is quantized to whole minutes and all randomness flows through one
seeded ``random.Random``, so identical configs produce byte-identical
reports on every platform.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import InvalidConfig
from .slots import WaveTemplate

FCFS_WALK_IN = "fcfs_walk_in"
MODIFIED_WAVE = "modified_wave"


# ---------------------------------------------------------------------------
# distribution specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Deterministic:
    value: int

    def sample(self, rng: random.Random) -> int:
        return int(self.value)

    def to_json(self) -> dict:
        return {"kind": "deterministic", "value": self.value}


@dataclass(frozen=True)
class TruncNormal:
    mean: float
    sd: float
    lo: float
    hi: float

    def __post_init__(self):
        if self.sd < 0 or self.hi < self.lo:
            raise InvalidConfig("trunc_normal needs sd >= 0 and max >= min")

    def sample(self, rng: random.Random) -> int:
        while True:
            x = rng.gauss(self.mean, self.sd)
            if self.lo <= x <= self.hi:
                return int(round(x))

    def to_json(self) -> dict:
        return {"kind": "trunc_normal", "mean": self.mean, "sd": self.sd, "min": self.lo, "max": self.hi}


@dataclass(frozen=True)
class Exponential:
    mean: float

    def __post_init__(self):
        if self.mean <= 0:
            raise InvalidConfig("exponential needs a positive mean")

    def sample(self, rng: random.Random) -> int:
        return max(0, int(round(rng.expovariate(1.0 / self.mean))))

    def to_json(self) -> dict:
        return {"kind": "exponential", "mean": self.mean}


@dataclass(frozen=True)
class Uniform:
    lo: int
    hi: int

    def __post_init__(self):
        if self.hi < self.lo:
            raise InvalidConfig("uniform needs max >= min")

    def sample(self, rng: random.Random) -> int:
        return rng.randint(self.lo, self.hi)

    def to_json(self) -> dict:
        return {"kind": "uniform", "min": self.lo, "max": self.hi}


def dist_from_json(spec: dict):
    try:
        kind = spec["kind"]
        if kind == "deterministic":
            return Deterministic(int(spec["value"]))
        if kind == "trunc_normal":
            return TruncNormal(spec["mean"], spec["sd"], spec["min"], spec["max"])
        if kind == "exponential":
            return Exponential(spec["mean"])
        if kind == "uniform":
            return Uniform(int(spec["min"]), int(spec["max"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad distribution spec {spec!r}: {exc}") from None
    raise InvalidConfig(f"unknown distribution kind {spec.get('kind')!r}")


# ---------------------------------------------------------------------------
# policies & config
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FcfsWalkIn:
    name: str = FCFS_WALK_IN

    def to_json(self) -> dict:
        return {"kind": FCFS_WALK_IN}


@dataclass(frozen=True)
class ModifiedWave:
    template: WaveTemplate = field(default_factory=WaveTemplate)
    name: str = MODIFIED_WAVE

    def to_json(self) -> dict:
        t = self.template
        return {
            "kind": MODIFIED_WAVE,
            "template": {
                "slot_length": t.slot_length,
                "wave_size": t.wave_size,
                "catchup_window": t.catchup_window,
            },
        }


def policy_from_json(spec: dict):
    kind = spec.get("kind")
    if kind == FCFS_WALK_IN:
        return FcfsWalkIn()
    if kind == MODIFIED_WAVE:
        t = spec.get("template", {})
        try:
            return ModifiedWave(WaveTemplate(**t))
        except TypeError as exc:
            raise InvalidConfig(f"bad wave template {t!r}: {exc}") from None
    raise InvalidConfig(f"unknown policy kind {kind!r}")


@dataclass(frozen=True)
class SimConfig:
    policy: FcfsWalkIn | ModifiedWave
    horizon: int  # clinic-day length in minutes
    patients: int
    service_time: object
    punctuality_jitter: object = field(default_factory=lambda: Deterministic(0))
    doctors: int = 1
    no_show_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.patients < 0:
            raise InvalidConfig("patients must be >= 0")
        if self.horizon <= 0:
            raise InvalidConfig("horizon must be positive minutes")
        if self.doctors < 1:
            raise InvalidConfig("need at least one doctor")
        if not 0.0 <= self.no_show_rate <= 1.0:
            raise InvalidConfig("no_show_rate must be in [0, 1]")

    def to_json(self) -> dict:
        return {
            "policy": self.policy.to_json(),
            "horizon": self.horizon,
            "patients": self.patients,
            "service_time": self.service_time.to_json(),
            "punctuality_jitter": self.punctuality_jitter.to_json(),
            "doctors": self.doctors,
            "no_show_rate": self.no_show_rate,
            "seed": self.seed,
        }


def config_from_json(data: dict) -> SimConfig:
    if not isinstance(data, dict):
        raise InvalidConfig("config must be a JSON object")
    try:
        return SimConfig(
            policy=policy_from_json(data["policy"]),
            horizon=int(data["horizon"]),
            patients=int(data["patients"]),
            service_time=dist_from_json(data["service_time"]),
            punctuality_jitter=dist_from_json(data.get("punctuality_jitter", {"kind": "deterministic", "value": 0})),
            doctors=int(data.get("doctors", 1)),
            no_show_rate=float(data.get("no_show_rate", 0.0)),
            seed=int(data.get("seed", 0)),
        )
    except KeyError as exc:
        raise InvalidConfig(f"config missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad config value: {exc}") from None


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimReport:
    policy: str
    patients: int
    served: int
    waits: tuple[int, ...]
    mean_wait: float
    median_wait: float
    p90_wait: int
    max_wait: int
    idle_minutes: int
    overtime_minutes: int
    reduction_vs_baseline: Optional[float] = None


def _percentile_90(waits: list[int]) -> int:
    if not waits:
        return 0
    ordered = sorted(waits)
    index = max(0, math.ceil(0.9 * len(ordered)) - 1)
    return ordered[index]


def _build_report(policy: str, patients: int, waits: list[int], idle: int, overtime: int) -> SimReport:
    return SimReport(
        policy=policy,
        patients=patients,
        served=len(waits),
        waits=tuple(waits),
        mean_wait=statistics.fmean(waits) if waits else 0.0,
        median_wait=float(statistics.median(waits)) if waits else 0.0,
        p90_wait=_percentile_90(waits),
        max_wait=max(waits) if waits else 0,
        idle_minutes=idle,
        overtime_minutes=overtime,
    )


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PatientDraw:
    jitter: int
    service: int
    shows_up: bool


def draw_patients(config: SimConfig, rng: random.Random) -> list[PatientDraw]:
    """All random draws for one run, in a fixed order (one triple per patient)."""
    draws = []
    for _ in range(config.patients):
        jitter = config.punctuality_jitter.sample(rng)
        service = config.service_time.sample(rng)
        shows = config.no_show_rate == 0.0 or rng.random() >= config.no_show_rate
        draws.append(PatientDraw(jitter, service, shows))
    return draws


def wave_slot_starts(template: WaveTemplate, horizon: int, doctors: int) -> list[tuple[int, int]]:
    """(start_minute, doctor_index) for every template slot in the horizon,
    in assignment order: by start, then doctor, then position in the hour."""
    offsets = template.start_offsets()
    starts = []
    for hour in range(horizon // 60):
        base = hour * 60
        per_hour = [base] * template.wave_size + [base + off for off in offsets[1:]]
        for minute in per_hour:
            for doctor in range(doctors):
                starts.append((minute, doctor))
    starts.sort(key=lambda pair: (pair[0], pair[1]))
    return starts


@dataclass
class _DoctorStats:
    first_start: int | None = None
    last_end: int = 0
    busy: int = 0

    def record(self, start: int, end: int):
        if self.first_start is None:
            self.first_start = start
        self.last_end = max(self.last_end, end)
        self.busy += end - start

    @property
    def idle(self) -> int:
        # gaps between consecutive services; an empty day counts as zero
        if self.first_start is None:
            return 0
        return (self.last_end - self.first_start) - self.busy


def _run_fcfs(config: SimConfig, draws: list[PatientDraw]) -> SimReport:
    arrivals = [
        (max(0, d.jitter), i)
        for i, d in enumerate(draws)
        if d.shows_up
    ]
    arrivals.sort()
    free_at = [0] * config.doctors
    stats = [_DoctorStats() for _ in range(config.doctors)]
    waits = []
    for arrival, index in arrivals:
        doctor = min(range(config.doctors), key=lambda d: (free_at[d], d))
        start = max(arrival, free_at[doctor])
        end = start + draws[index].service
        waits.append(start - arrival)
        free_at[doctor] = end
        stats[doctor].record(start, end)
    return _finish(config, waits, stats)


def _run_modified_wave(config: SimConfig, draws: list[PatientDraw]) -> SimReport:
    template = config.policy.template
    slots = wave_slot_starts(template, config.horizon, config.doctors)
    assigned = min(config.patients, len(slots))
    # per doctor: scheduled patients in slot order, with arrival times
    rosters: list[list[tuple[int, int, int]]] = [[] for _ in range(config.doctors)]
    for i in range(assigned):
        scheduled, doctor = slots[i]
        draw = draws[i]
        if not draw.shows_up:
            continue
        arrival = max(0, scheduled + draw.jitter)
        rosters[doctor].append((i, arrival, draw.service))

    stats = [_DoctorStats() for _ in range(config.doctors)]
    waits = []
    for doctor, roster in enumerate(rosters):
        clock = 0
        remaining = list(roster)  # already in scheduled order
        while remaining:
            present_index = next(
                (k for k, (_, arrival, _) in enumerate(remaining) if arrival <= clock), None
            )
            if present_index is None:
                clock = min(arrival for _, arrival, _ in remaining)
                continue
            _, arrival, service = remaining.pop(present_index)
            waits.append(clock - arrival)
            stats[doctor].record(clock, clock + service)
            clock += service
    return _finish(config, waits, stats)


def _finish(config: SimConfig, waits: list[int], stats: list[_DoctorStats]) -> SimReport:
    idle = sum(s.idle for s in stats)
    overtime = sum(max(0, s.last_end - config.horizon) for s in stats)
    return _build_report(config.policy.name, config.patients, waits, idle, overtime)


def run(config: SimConfig) -> SimReport:
    rng = random.Random(config.seed)
    draws = draw_patients(config, rng)
    if isinstance(config.policy, FcfsWalkIn):
        return _run_fcfs(config, draws)
    return _run_modified_wave(config, draws)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    baseline: SimReport  # pooled over replications
    treatment: SimReport  # pooled; carries reduction_vs_baseline
    replications: int
    rep_means: tuple[tuple[float, float], ...]
    treatment_wins: int
    reduction: float


def compare(baseline: SimConfig, treatment: SimConfig, replications: int) -> Comparison:
    """Run both policies over paired seeds {seed, seed+1, ...} and pool."""
    if replications < 1:
        raise InvalidConfig("need at least one replication")
    if baseline.patients != treatment.patients:
        raise InvalidConfig("configs must schedule the same number of patients")
    if baseline.horizon != treatment.horizon:
        raise InvalidConfig("configs must share the same horizon")
    if baseline.service_time != treatment.service_time:
        raise InvalidConfig("configs must share the service-time distribution")

    base_waits: list[int] = []
    treat_waits: list[int] = []
    base_idle = base_over = treat_idle = treat_over = 0
    rep_means = []
    wins = 0
    for rep in range(replications):
        b = run(replace(baseline, seed=baseline.seed + rep))
        t = run(replace(treatment, seed=treatment.seed + rep))
        base_waits.extend(b.waits)
        treat_waits.extend(t.waits)
        base_idle += b.idle_minutes
        base_over += b.overtime_minutes
        treat_idle += t.idle_minutes
        treat_over += t.overtime_minutes
        rep_means.append((b.mean_wait, t.mean_wait))
        if t.mean_wait < b.mean_wait:
            wins += 1

    pooled_base = _build_report(baseline.policy.name, baseline.patients, base_waits, base_idle, base_over)
    pooled_treat = _build_report(treatment.policy.name, treatment.patients, treat_waits, treat_idle, treat_over)
    reduction = 0.0
    if pooled_base.mean_wait > 0:
        reduction = (pooled_base.mean_wait - pooled_treat.mean_wait) / pooled_base.mean_wait
    pooled_treat = replace(pooled_treat, reduction_vs_baseline=reduction)
    return Comparison(pooled_base, pooled_treat, replications, tuple(rep_means), wins, reduction)


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ("policy", "patients", "mean", "median", "p90", "max", "idle", "overtime", "reduction")


def _report_row(report: SimReport) -> list[str]:
    reduction = ""
    if report.reduction_vs_baseline is not None:
        reduction = f"{report.reduction_vs_baseline * 100:.1f}%"
    return [
        report.policy,
        str(report.patients),
        f"{report.mean_wait:.2f}",
        f"{report.median_wait:.2f}",
        str(report.p90_wait),
        str(report.max_wait),
        str(report.idle_minutes),
        str(report.overtime_minutes),
        reduction,
    ]


def emit_report(report, format: str = "table") -> str:
    """Render a run or comparison; column order is stable across versions."""
    if isinstance(report, Comparison):
        rows = [_report_row(report.baseline), _report_row(report.treatment)]
    elif isinstance(report, SimReport):
        rows = [_report_row(report)]
    elif isinstance(report, (list, tuple)):
        rows = [_report_row(r) for r in report]
    else:
        raise InvalidConfig(f"cannot emit {type(report).__name__}")

    if format == "csv":
        lines = [",".join(REPORT_COLUMNS)] + [",".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    if format != "table":
        raise InvalidConfig(f"unknown report format {format!r}")

    widths = [
        max(len(REPORT_COLUMNS[i]), *(len(row[i]) for row in rows)) if rows else len(REPORT_COLUMNS[i])
        for i in range(len(REPORT_COLUMNS))
    ]
    def fmt(cells):
        padded = [
            cells[i].ljust(widths[i]) if i == 0 else cells[i].rjust(widths[i])
            for i in range(len(cells))
        ]
        return "  ".join(padded).rstrip()

    lines = [fmt(list(REPORT_COLUMNS))] + [fmt(row) for row in rows]
    return "\n".join(lines) + "\n"
