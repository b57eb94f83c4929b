"""Synthetic patients: scripted sessions that replay the published study.

Sessions are synthesized as event tapes and pushed through the real engine
and scoring path; nothing here computes a metric directly. Correct response
times come from a deterministic calibrated ramp so a phase lands on its
published mean and spread while every session still improves on the one
before it. Error timing (commission offsets, quit moments) never reaches
the published measures except through total play time, so those draw from
a seeded stream.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from .engine import (
    NonTargetHit,
    PlayerQuit,
    SessionEvent,
    TargetHit,
    TrialTimeout,
    replay_tape,
)
from .errors import InfeasiblePhaseError, UnreachableTargetError
from .metrics import MetricsReport, correct_crts, sd_crt
from .model import LevelDefinition, SessionRecord, default_level
from .placement import place_objects


class ScheduleMode(Enum):
    RAMP_ACROSS_PHASE = "ramp-across-phase"
    RAMP_PER_SESSION = "ramp-per-session"


@dataclass(frozen=True, slots=True)
class PhaseConfig:
    """Outcome counts every session in the phase repeats."""

    sessions: int
    c: int
    oe: int
    ce: int
    k: int
    label: str = ""

    @property
    def responded(self) -> int:
        return self.c + self.oe + self.ce


@dataclass(frozen=True, slots=True)
class CrtSchedule:
    """Correct-response-time generator: evenly spaced from hi_s down to lo_s."""

    hi_s: float
    lo_s: float
    mode: ScheduleMode = ScheduleMode.RAMP_ACROSS_PHASE


@dataclass(frozen=True, slots=True)
class BehaviorModel:
    """Stochastic trial behavior for fuzzing and free-form synthesis.

    Per trial: quit first with quit_hazard, otherwise commission with
    p_commission, omission with p_omission, else a correct hit whose
    response time is uniform between the two window fractions.
    """

    p_commission: float = 0.1
    p_omission: float = 0.1
    quit_hazard: float = 0.0
    crt_lo_frac: float = 0.02
    crt_hi_frac: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.p_commission <= 1.0 or not 0.0 <= self.p_omission <= 1.0:
            raise ValueError("probabilities are fractions")
        if self.p_commission + self.p_omission > 1.0:
            raise ValueError("error probabilities exceed 1")
        if not 0.0 <= self.quit_hazard <= 1.0:
            raise ValueError("quit_hazard is a fraction")
        if not 0.0 < self.crt_lo_frac <= self.crt_hi_frac <= 1.0:
            raise ValueError("crt fractions must satisfy 0 < lo <= hi <= 1")


def _ramp_values(hi: float, lo: float, n: int) -> list[float]:
    if n <= 0:
        return []
    if n == 1:
        return [(hi + lo) / 2.0]
    step = (hi - lo) / (n - 1)
    return [hi - k * step for k in range(n)]


def _session_crts(phase: PhaseConfig, schedule: CrtSchedule, session_idx: int) -> list[float]:
    """CRTs for one session, slowest first so later trials improve."""
    if schedule.mode is ScheduleMode.RAMP_PER_SESSION:
        return _ramp_values(schedule.hi_s, schedule.lo_s, phase.c)
    values = _ramp_values(schedule.hi_s, schedule.lo_s, phase.sessions * phase.c)
    return values[session_idx * phase.c : (session_idx + 1) * phase.c]


def _outcome_sequence(phase: PhaseConfig) -> list[str]:
    """Round-robin interleave of correct/omission/commission trials."""
    remaining = {"correct": phase.c, "omission": phase.oe, "commission": phase.ce}
    out: list[str] = []
    while any(remaining.values()):
        for kind in ("correct", "omission", "commission"):
            if remaining[kind]:
                remaining[kind] -= 1
                out.append(kind)
    return out


def synth_session(
    phase: PhaseConfig,
    schedule: CrtSchedule,
    session_idx: int,
    seed,
    level: LevelDefinition | None = None,
) -> list[SessionEvent]:
    """Script one session of the phase as an event tape.

    Same seed, same tape. The synthetic player clicks the actual placed
    object positions for that trial's layout.
    """
    level = level or default_level()
    theta = level.trial_time_s
    if phase.sessions < 1 or min(phase.c, phase.oe, phase.ce, phase.k) < 0:
        raise InfeasiblePhaseError("phase counts must be non-negative with sessions >= 1")
    if phase.responded + phase.k != level.trials_per_session:
        raise InfeasiblePhaseError(
            f"counts sum to {phase.responded + phase.k}, level runs {level.trials_per_session} trials"
        )
    if not 0.0 < schedule.lo_s <= schedule.hi_s <= theta:
        raise UnreachableTargetError("schedule outside 0 < lo <= hi <= theta")
    if not 0 <= session_idx < phase.sessions:
        raise InfeasiblePhaseError(f"session {session_idx} outside 0..{phase.sessions - 1}")

    rng = random.Random(f"synth:{seed}")
    crts = iter(_session_crts(phase, schedule, session_idx))
    events: list[SessionEvent] = []
    t = 0.0
    trial_index = 1
    for kind in _outcome_sequence(phase):
        layout = place_objects(level, 0, trial_index)
        target = next(o for o in layout if o.is_target)
        others = [o for o in layout if not o.is_target]
        if kind == "correct":
            crt = next(crts)
            t += crt
            events.append(TargetHit(at_s=t, position=(float(target.x), float(target.y))))
        elif kind == "commission":
            t += rng.uniform(0.25, 0.75) * theta
            hit = others[0] if others else target
            events.append(NonTargetHit(at_s=t, position=(float(hit.x), float(hit.y))))
        else:
            t += theta
            events.append(TrialTimeout(at_s=t))
        trial_index += 1
    if phase.k:
        t += rng.uniform(0.25, 0.75) * theta
        events.append(PlayerQuit(at_s=t))
    return events


@dataclass(frozen=True, slots=True)
class PhaseResult:
    phase: PhaseConfig
    schedule: CrtSchedule
    tapes: tuple[tuple[SessionEvent, ...], ...]
    records: tuple[SessionRecord, ...]
    reports: tuple[MetricsReport, ...]

    @property
    def pi_series(self) -> list[float]:
        return [r.pi for r in self.reports]

    @property
    def pooled_crts(self) -> list[float]:
        out: list[float] = []
        for record in self.records:
            out.extend(correct_crts(record))
        return out

    @property
    def m_s(self) -> float | None:
        crts = self.pooled_crts
        return sum(crts) / len(crts) if crts else None

    @property
    def sd_s(self) -> float | None:
        crts = self.pooled_crts
        return sd_crt(crts) if crts else None

    @property
    def avg_pi(self) -> float:
        return sum(self.pi_series) / len(self.pi_series)


def run_phase(
    phase: PhaseConfig,
    schedule: CrtSchedule,
    seed,
    level: LevelDefinition | None = None,
) -> PhaseResult:
    """Synthesize and score every session of one phase through the engine."""
    level = level or default_level()
    tapes = []
    records = []
    reports = []
    for session_idx in range(phase.sessions):
        tape = synth_session(phase, schedule, session_idx, f"{seed}:{session_idx}", level)
        record, report = replay_tape(
            tape,
            level,
            session_id=f"{phase.label or 'phase'}-s{session_idx + 1:02d}",
            patient_id="synthetic",
        )
        tapes.append(tuple(tape))
        records.append(record)
        reports.append(report)
    return PhaseResult(
        phase=phase,
        schedule=schedule,
        tapes=tuple(tapes),
        records=tuple(records),
        reports=tuple(reports),
    )


def calibrate_schedule(
    target_m: float,
    phase: PhaseConfig,
    *,
    target_sd: float | None = None,
    level: LevelDefinition | None = None,
    mode: ScheduleMode = ScheduleMode.RAMP_ACROSS_PHASE,
    lo_min: float = 0.1,
) -> CrtSchedule:
    """Pick ramp endpoints whose realized phase mean hits target_m.

    An evenly spaced ramp over n values has mean (hi+lo)/2 and sample
    spread step*sqrt(n(n+1)/12), so both moments solve in closed form;
    lo is clamped to lo_min to keep response times positive, trading a
    little spread. Raises UnreachableTargetError when the mean cannot sit
    inside the trial window.
    """
    level = level or default_level()
    theta = level.trial_time_s
    if phase.c < 1:
        raise UnreachableTargetError("phase has no correct tries to schedule")
    if not lo_min < target_m < theta:
        raise UnreachableTargetError(
            f"target mean {target_m} outside the open window ({lo_min}, {theta})"
        )
    n = phase.c if mode is ScheduleMode.RAMP_PER_SESSION else phase.sessions * phase.c
    if target_sd is None or n < 2:
        lo = max(lo_min, 2.0 * target_m - theta)
        hi = 2.0 * target_m - lo
    else:
        step = target_sd / math.sqrt(n * (n + 1) / 12.0)
        half_spread = step * (n - 1) / 2.0
        lo = target_m - half_spread
        hi = target_m + half_spread
        if lo < lo_min:
            lo = lo_min
            hi = 2.0 * target_m - lo
        if hi > theta:
            hi = theta
            lo = 2.0 * target_m - hi
    if not 0.0 < lo <= hi <= theta:
        raise UnreachableTargetError(f"no ramp fits: lo={lo}, hi={hi}, theta={theta}")
    schedule = CrtSchedule(hi_s=hi, lo_s=lo, mode=mode)
    realized = _ramp_values(hi, lo, n)
    if abs(sum(realized) / len(realized) - target_m) > 0.5:
        raise UnreachableTargetError("realized mean drifted from the target")
    return schedule


@dataclass(frozen=True, slots=True)
class PhaseTarget:
    """One published phase: counts plus the response-time moments to hit."""

    config: PhaseConfig
    target_m_s: float
    target_sd_s: float
    avg_pi: float  # published average performance index, fraction


def part_phases(part: int, sessions: int = 20) -> list[PhaseTarget]:
    """The two published study parts (error-mix part 1, quit-mix part 2)."""
    if part == 1:
        rows = [
            (3, 3, 4, 0, 25.13, 14.46, 0.44),
            (5, 3, 2, 0, 23.71, 14.17, 0.55),
            (8, 1, 1, 0, 21.81, 13.58, 0.72),
        ]
    elif part == 2:
        rows = [
            (3, 0, 0, 7, 25.13, 14.46, 0.24),
            (5, 0, 0, 5, 23.93, 14.13, 0.40),
            (7, 0, 0, 3, 22.94, 13.80, 0.57),
            (10, 0, 0, 0, 21.62, 13.18, 0.82),
        ]
    else:
        raise ValueError(f"part must be 1 or 2, got {part}")
    return [
        PhaseTarget(
            config=PhaseConfig(
                sessions=sessions, c=c, oe=oe, ce=ce, k=k, label=f"part{part}-phase{i + 1}"
            ),
            target_m_s=m,
            target_sd_s=sd,
            avg_pi=pi,
        )
        for i, (c, oe, ce, k, m, sd, pi) in enumerate(rows)
    ]


@dataclass(frozen=True, slots=True)
class PhaseRun:
    target: PhaseTarget
    result: PhaseResult


@dataclass(frozen=True, slots=True)
class ExperimentResult:
    part: int
    seed: str
    runs: tuple[PhaseRun, ...]


def run_experiment(
    part: int,
    seed,
    sessions: int = 20,
    level: LevelDefinition | None = None,
) -> ExperimentResult:
    """Replay one study part: calibrate each phase, synthesize, score."""
    level = level or default_level()
    runs = []
    for target in part_phases(part, sessions):
        schedule = calibrate_schedule(
            target.target_m_s, target.config, target_sd=target.target_sd_s, level=level
        )
        result = run_phase(target.config, schedule, f"{seed}:{target.config.label}", level)
        runs.append(PhaseRun(target=target, result=result))
    return ExperimentResult(part=part, seed=str(seed), runs=tuple(runs))


def sample_session(
    model: BehaviorModel,
    level: LevelDefinition | None = None,
    seed=0,
) -> list[SessionEvent]:
    """Draw one free-form session tape from the behavior model."""
    level = level or default_level()
    theta = level.trial_time_s
    rng = random.Random(f"behavior:{seed}")
    events: list[SessionEvent] = []
    t = 0.0
    for _ in range(level.trials_per_session):
        if rng.random() < model.quit_hazard:
            events.append(PlayerQuit(at_s=t + rng.uniform(0.0, 0.5) * theta))
            return events
        roll = rng.random()
        if roll < model.p_commission:
            t += rng.uniform(0.05, 0.95) * theta
            events.append(NonTargetHit(at_s=t, position=(rng.uniform(0, 100), rng.uniform(0, 100))))
        elif roll < model.p_commission + model.p_omission:
            t += theta
            events.append(TrialTimeout(at_s=t))
        else:
            t += rng.uniform(model.crt_lo_frac, model.crt_hi_frac) * theta
            events.append(TargetHit(at_s=t, position=(rng.uniform(0, 100), rng.uniform(0, 100))))
    return events
