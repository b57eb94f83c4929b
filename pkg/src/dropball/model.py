"""Domain model: plans, profiles, trial outcomes, and session records.

Everything here is immutable value data. Validation never raises for plan
content problems; it returns a list of violations so callers (CLI, service)
can report every broken field at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import SessionShapeError


class GameType(str, Enum):
    DROP_THE_BALL = "drop-the-ball"
    DRAG_AND_DROP = "drag-and-drop"
    MULTIPLE_CHOICE = "multiple-choice"


class Shape(str, Enum):
    SPHERE = "sphere"
    CUBE = "cube"
    CUSTOM_TAG = "custom-tag"


class Involvement(str, Enum):
    """How far a doctor may reach into a running treatment."""

    REPORTS_ONLY = "reports-only"
    CAN_CONFIGURE = "can-configure"
    CAN_INTERVENE = "can-intervene"


EXPERIENCE_MIN = 1
EXPERIENCE_MAX = 5


@dataclass(frozen=True, slots=True)
class Violation:
    """One failed invariant, addressed by a dotted field path."""

    path: str
    message: str


@dataclass(frozen=True, slots=True)
class SizeRule:
    """Rendered size: base radius grown by closeness to the field center."""

    base_radius: float
    distance_scale: float = 0.0


@dataclass(frozen=True, slots=True)
class Bounds:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min


@dataclass(frozen=True, slots=True)
class ObjectSpec:
    shape: Shape
    size_rule: SizeRule
    placement_bounds: Bounds
    is_target: bool = False
    visibility_order: int = 0


@dataclass(frozen=True, slots=True)
class LevelDefinition:
    """One difficulty step; trial_time_s is the response window theta."""

    objects: tuple[ObjectSpec, ...]
    max_time_s: float
    trial_time_s: float
    trials_per_session: int
    effects: str | None = None


@dataclass(frozen=True, slots=True)
class GameDefinition:
    game_type: GameType
    levels: tuple[LevelDefinition, ...]

    def level(self, index: int) -> LevelDefinition:
        """Return the level at 1-based ``index``; raises IndexError outside."""
        if not 1 <= index <= len(self.levels):
            raise IndexError(f"level index {index} outside 1..{len(self.levels)}")
        return self.levels[index - 1]


@dataclass(frozen=True, slots=True)
class ProgressionRule:
    """Level movement policy over a sliding window of session PI values.

    hold_band documents the width of the hold zone below advance_threshold;
    the decision itself is advance at mean >= advance_threshold, regress at
    mean < regress_below, hold in between.
    """

    window: int = 3
    advance_threshold: float = 0.70
    regress_below: float = 0.30
    hold_band: float | None = None


@dataclass(frozen=True, slots=True)
class TreatmentPlan:
    plan_id: str
    game: GameDefinition
    program_duration: float  # whole-program budget, minutes
    progression: ProgressionRule


@dataclass(frozen=True, slots=True)
class PatientProfile:
    patient_id: str
    current_level: int = 1
    latest_pi: float | None = None
    preferences: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class DoctorProfile:
    doctor_id: str
    experience: int  # tier 1..5
    involvement: Involvement


@dataclass(frozen=True, slots=True)
class Correct:
    """Target hit inside the window; crt_s is the correct response time."""

    crt_s: float


@dataclass(frozen=True, slots=True)
class Commission:
    """Non-target hit; elapsed_s is how far into the window it happened."""

    elapsed_s: float


@dataclass(frozen=True, slots=True)
class Omission:
    """Window elapsed with no response."""


@dataclass(frozen=True, slots=True)
class Uncompleted:
    """Trial never ran to a verdict (player quit or session cap)."""


TrialOutcome = Correct | Commission | Omission | Uncompleted


@dataclass(frozen=True, slots=True)
class TrialRecord:
    index: int  # 1-based
    outcome: TrialOutcome
    started_at_s: float
    ended_at_s: float
    position: tuple[float, float] | None = None


@dataclass(frozen=True, slots=True)
class SessionRecord:
    """Finalized session, self-contained for scoring (theta_s snapshotted)."""

    session_id: str
    patient_id: str
    level_index: int
    trials: tuple[TrialRecord, ...]
    theta_s: float
    gt_s: float  # actual elapsed seconds
    st_s: float  # session cap from the level
    started_at: str | None = None
    ended_at: str | None = None


def validate_plan(plan: TreatmentPlan) -> list[Violation]:
    """Check every plan invariant; empty list means the plan is usable."""
    out: list[Violation] = []
    if not plan.plan_id:
        out.append(Violation("plan_id", "empty id"))
    if plan.program_duration <= 0:
        out.append(Violation("program_duration", "non-positive program duration"))
    out.extend(_validate_progression(plan.progression))
    if not plan.game.levels:
        out.append(Violation("game.levels", "game has no levels"))
    for li, level in enumerate(plan.game.levels):
        out.extend(_validate_level(level, f"game.levels[{li}]"))
    return out


def _validate_progression(rule: ProgressionRule) -> list[Violation]:
    out: list[Violation] = []
    if rule.window < 1:
        out.append(Violation("progression.window", "window must be >= 1"))
    if not 0.0 <= rule.regress_below < rule.advance_threshold <= 1.0:
        out.append(
            Violation(
                "progression",
                "need 0 <= regress_below < advance_threshold <= 1",
            )
        )
    elif rule.hold_band is not None:
        gap = rule.advance_threshold - rule.regress_below
        if not 0.0 <= rule.hold_band <= gap:
            out.append(
                Violation("progression.hold_band", "hold band wider than the threshold gap")
            )
    return out


def _validate_level(level: LevelDefinition, path: str) -> list[Violation]:
    out: list[Violation] = []
    if level.trial_time_s <= 0:
        out.append(Violation(f"{path}.trial_time_s", "non-positive trial time"))
    if level.max_time_s < level.trial_time_s:
        out.append(Violation(f"{path}.max_time_s", "session cap shorter than one trial"))
    if level.trials_per_session < 1:
        out.append(Violation(f"{path}.trials_per_session", "need at least one trial"))
    if not level.objects:
        out.append(Violation(f"{path}.objects", "level has no objects"))
    targets = sum(1 for o in level.objects if o.is_target)
    if level.objects and targets == 0:
        out.append(Violation(f"{path}.objects", "no target object"))
    if targets > 1:
        out.append(Violation(f"{path}.objects", "multiple targets"))
    for oi, obj in enumerate(level.objects):
        out.extend(_validate_object(obj, f"{path}.objects[{oi}]"))
    return out


def _validate_object(obj: ObjectSpec, path: str) -> list[Violation]:
    out: list[Violation] = []
    if obj.size_rule.base_radius <= 0:
        out.append(Violation(f"{path}.size_rule.base_radius", "non-positive radius"))
    if obj.size_rule.distance_scale < 0:
        out.append(Violation(f"{path}.size_rule.distance_scale", "negative distance scale"))
    b = obj.placement_bounds
    if b.width <= 0 or b.height <= 0:
        out.append(Violation(f"{path}.placement_bounds", "bounds have no area"))
    if obj.visibility_order < 0:
        out.append(Violation(f"{path}.visibility_order", "negative visibility order"))
    return out


def validate_patient(patient: PatientProfile, plan: TreatmentPlan | None = None) -> list[Violation]:
    out: list[Violation] = []
    if not patient.patient_id:
        out.append(Violation("patient_id", "empty id"))
    if patient.current_level < 1:
        out.append(Violation("current_level", "levels start at 1"))
    elif plan is not None and patient.current_level > len(plan.game.levels):
        out.append(Violation("current_level", "level outside the assigned plan"))
    if patient.latest_pi is not None and not 0.0 <= patient.latest_pi <= 1.0:
        out.append(Violation("latest_pi", "PI is a fraction in [0, 1]"))
    return out


def validate_doctor(doctor: DoctorProfile) -> list[Violation]:
    out: list[Violation] = []
    if not doctor.doctor_id:
        out.append(Violation("doctor_id", "empty id"))
    if not EXPERIENCE_MIN <= doctor.experience <= EXPERIENCE_MAX:
        out.append(
            Violation("experience", f"tier outside {EXPERIENCE_MIN}..{EXPERIENCE_MAX}")
        )
    return out


def normalize_session(
    trials: list[TrialRecord] | tuple[TrialRecord, ...],
    level: LevelDefinition,
    *,
    session_id: str,
    patient_id: str,
    level_index: int = 1,
    started_at: str | None = None,
    ended_at: str | None = None,
) -> SessionRecord:
    """Build a full-width SessionRecord from raw trials.

    Pads the tail with Uncompleted trials up to trials_per_session, computes
    gt_s as the sum of per-trial elapsed times, snapshots theta/st from the
    level, and rejects shapes that cannot have come from a real session.
    Idempotent: normalizing the trials of a normalized record changes nothing.
    """
    n = level.trials_per_session
    theta = level.trial_time_s
    if len(trials) > n:
        raise SessionShapeError(f"{len(trials)} trials exceed the level's {n}")
    gt = 0.0
    for pos, trial in enumerate(trials):
        if trial.index != pos + 1:
            raise SessionShapeError(
                f"trial indices must run 1..{len(trials)}, got {trial.index} at slot {pos + 1}"
            )
        elapsed = trial.ended_at_s - trial.started_at_s
        if elapsed < 0:
            raise SessionShapeError(f"trial {trial.index} ends before it starts")
        if isinstance(trial.outcome, Correct):
            crt = trial.outcome.crt_s
            if not 0.0 < crt <= theta:
                raise SessionShapeError(
                    f"trial {trial.index} correct response time {crt} outside (0, {theta}]"
                )
        gt += elapsed
    if gt > level.max_time_s:
        raise SessionShapeError(f"session ran {gt} s past the {level.max_time_s} s cap")
    padded = list(trials)
    for index in range(len(trials) + 1, n + 1):
        padded.append(TrialRecord(index=index, outcome=Uncompleted(), started_at_s=gt, ended_at_s=gt))
    return SessionRecord(
        session_id=session_id,
        patient_id=patient_id,
        level_index=level_index,
        trials=tuple(padded),
        theta_s=theta,
        gt_s=gt,
        st_s=level.max_time_s,
        started_at=started_at,
        ended_at=ended_at,
    )


_DEFAULT_BOUNDS = Bounds(x_min=0.0, y_min=0.0, x_max=100.0, y_max=100.0)


def _ball(is_target: bool) -> ObjectSpec:
    return ObjectSpec(
        shape=Shape.SPHERE,
        size_rule=SizeRule(base_radius=4.0, distance_scale=0.5),
        placement_bounds=_DEFAULT_BOUNDS,
        is_target=is_target,
        visibility_order=0,
    )


def default_level(trial_time_s: float = 60.0, trials_per_session: int = 10) -> LevelDefinition:
    """The stock drop-the-ball level: one target and one distractor ball."""
    return LevelDefinition(
        objects=(_ball(True), _ball(False)),
        max_time_s=trial_time_s * trials_per_session,
        trial_time_s=trial_time_s,
        trials_per_session=trials_per_session,
        effects="highlight target on spawn",
    )


def default_plan(plan_id: str = "default") -> TreatmentPlan:
    """Stock plan: three levels with shrinking response windows."""
    return TreatmentPlan(
        plan_id=plan_id,
        game=GameDefinition(
            game_type=GameType.DROP_THE_BALL,
            levels=(default_level(60.0), default_level(45.0), default_level(30.0)),
        ),
        program_duration=20.0,
        progression=ProgressionRule(),
    )
