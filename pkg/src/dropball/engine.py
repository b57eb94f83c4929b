"""Single-session trial loop: windows, classification, finalization.

The engine runs on a virtual clock carried by the events themselves; wall
time never enters. Each trial owns the window [start, start + theta], both
ends inclusive for responses. A window with no response closes as an
Omission the moment the clock moves strictly past its end (or exactly at
the end via an explicit timeout event), so late events first fast-forward
the session through every expired window. Replaying one tape twice yields
identical records.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import model
from .errors import (
    PlanMismatchError,
    PrematureTimeoutError,
    StateError,
    TimeRegressionError,
    UnknownLevelError,
)
from .metrics import MetricsReport, compute_report
from .model import (
    Commission,
    Correct,
    LevelDefinition,
    Omission,
    PatientProfile,
    SessionRecord,
    TreatmentPlan,
    TrialRecord,
    Uncompleted,
)
from .placement import PlacedObject, place_objects


@dataclass(frozen=True, slots=True)
class TargetHit:
    at_s: float
    position: tuple[float, float] | None = None


@dataclass(frozen=True, slots=True)
class NonTargetHit:
    at_s: float
    position: tuple[float, float] | None = None


@dataclass(frozen=True, slots=True)
class TrialTimeout:
    at_s: float


@dataclass(frozen=True, slots=True)
class PlayerQuit:
    at_s: float


SessionEvent = TargetHit | NonTargetHit | TrialTimeout | PlayerQuit


class EnginePhase(Enum):
    IDLE = "idle"
    BRIEFING = "briefing"
    IN_TRIAL = "in-trial"
    ENDED = "ended"


class SessionEngine:
    """State for one session; single-writer, not thread-safe by itself."""

    def __init__(
        self,
        level: LevelDefinition,
        *,
        session_id: str,
        patient_id: str,
        level_index: int = 1,
        layout_seed: int = 0,
    ):
        self.level = level
        self.theta = level.trial_time_s
        self.trials_total = level.trials_per_session
        self.st_s = level.max_time_s
        self.session_id = session_id
        self.patient_id = patient_id
        self.level_index = level_index
        self.layout_seed = layout_seed
        self._records: list[TrialRecord] = []
        self._layouts: dict[int, list[PlacedObject]] = {}
        self._last_at = 0.0
        # briefing is a display beat, not a wait: the first window opens at 0
        self.phase = EnginePhase.BRIEFING
        self._trial_index = 1
        self._trial_start = 0.0
        self.phase = EnginePhase.IN_TRIAL
        self.layout(1)

    @property
    def trial_index(self) -> int:
        return self._trial_index

    @property
    def trial_start_s(self) -> float:
        return self._trial_start

    @property
    def clock_s(self) -> float:
        """Last virtual-clock reading the engine has seen."""
        return self._last_at

    @property
    def records(self) -> tuple[TrialRecord, ...]:
        return tuple(self._records)

    def layout(self, trial_index: int | None = None) -> list[PlacedObject]:
        """Object layout for a trial (current one by default), cached."""
        index = self._trial_index if trial_index is None else trial_index
        if index not in self._layouts:
            self._layouts[index] = place_objects(self.level, self.layout_seed, index)
        return self._layouts[index]

    def apply(self, event: SessionEvent) -> TrialRecord | None:
        """Advance the session by one event; returns the trial it closed.

        Raises StateError after the session has ended, TimeRegressionError
        when the clock moves backwards, and PrematureTimeoutError for a
        timeout inside a still-open window.
        """
        if self.phase is EnginePhase.ENDED:
            raise StateError("session already ended")
        if event.at_s < self._last_at:
            raise TimeRegressionError(
                f"event at {event.at_s} behind the clock at {self._last_at}"
            )
        self._last_at = event.at_s
        closed = self._advance_clock(event.at_s)
        if self.phase is EnginePhase.ENDED:
            # the event only confirmed windows that had already expired
            if isinstance(event, (TargetHit, NonTargetHit)):
                raise StateError("session ended before this response")
            return closed
        start = self._trial_start
        if isinstance(event, TargetHit):
            if event.at_s == start:
                raise TimeRegressionError("response at the very trial start has no response time")
            return self._close(
                Correct(crt_s=event.at_s - start), start, event.at_s, event.position
            )
        if isinstance(event, NonTargetHit):
            return self._close(
                Commission(elapsed_s=event.at_s - start), start, event.at_s, event.position
            )
        if isinstance(event, TrialTimeout):
            if event.at_s < start + self.theta:
                raise PrematureTimeoutError(
                    f"timeout at {event.at_s} inside the window ending {start + self.theta}"
                )
            return self._close(Omission(), start, start + self.theta, None)
        # PlayerQuit: current and all remaining trials stay uncompleted
        record = self._close(Uncompleted(), start, event.at_s, None, end_session=True)
        return record

    def finalize(self) -> tuple[SessionRecord, MetricsReport]:
        """Normalize the records and score them; session must have ended."""
        if self.phase is not EnginePhase.ENDED:
            raise StateError("cannot finalize a session that has not ended")
        record = model.normalize_session(
            self._records,
            self.level,
            session_id=self.session_id,
            patient_id=self.patient_id,
            level_index=self.level_index,
        )
        return record, compute_report(record)

    def _advance_clock(self, at_s: float) -> TrialRecord | None:
        """Close every window the clock has strictly passed."""
        closed: TrialRecord | None = None
        while self.phase is EnginePhase.IN_TRIAL:
            start = self._trial_start
            window_end = start + self.theta
            if window_end <= self.st_s and at_s > window_end:
                closed = self._close(Omission(), start, window_end, None)
            elif at_s > self.st_s:
                # session cap lands mid-window: cut the trial short there
                closed = self._close(Uncompleted(), start, self.st_s, None, end_session=True)
            else:
                break
        return closed

    def _close(
        self,
        outcome: model.TrialOutcome,
        started_at_s: float,
        ended_at_s: float,
        position: tuple[float, float] | None,
        end_session: bool = False,
    ) -> TrialRecord:
        record = TrialRecord(
            index=self._trial_index,
            outcome=outcome,
            started_at_s=started_at_s,
            ended_at_s=ended_at_s,
            position=position,
        )
        self._records.append(record)
        if end_session or self._trial_index == self.trials_total:
            self.phase = EnginePhase.ENDED
        else:
            # zero inter-trial gap: the next window opens where this one shut
            self._trial_index += 1
            self._trial_start = ended_at_s
        return record


def start_session(
    plan: TreatmentPlan,
    patient: PatientProfile,
    level_index: int,
    *,
    session_id: str,
    layout_seed: int = 0,
) -> SessionEngine:
    """Open a session for a patient on one of the plan's levels."""
    try:
        level = plan.game.level(level_index)
    except IndexError as exc:
        raise UnknownLevelError(str(exc)) from None
    if not 1 <= patient.current_level <= len(plan.game.levels):
        raise PlanMismatchError(
            f"patient level {patient.current_level} outside plan {plan.plan_id}"
        )
    return SessionEngine(
        level,
        session_id=session_id,
        patient_id=patient.patient_id,
        level_index=level_index,
        layout_seed=layout_seed,
    )


def replay_tape(
    events,
    level: LevelDefinition,
    *,
    session_id: str = "replay",
    patient_id: str = "replay",
    level_index: int = 1,
    layout_seed: int = 0,
) -> tuple[SessionRecord, MetricsReport]:
    """Run a recorded tape through a fresh engine and score it.

    A tape that stops before the session ends is treated as the player
    walking away: a quit is injected at the last event time.
    """
    eng = SessionEngine(
        level,
        session_id=session_id,
        patient_id=patient_id,
        level_index=level_index,
        layout_seed=layout_seed,
    )
    for event in events:
        eng.apply(event)
    if eng.phase is not EnginePhase.ENDED:
        eng.apply(PlayerQuit(at_s=eng.clock_s))
    return eng.finalize()
