"""Session platform for the drop-the-ball attention-training game."""

from .engine import (
    EnginePhase,
    NonTargetHit,
    PlayerQuit,
    SessionEngine,
    TargetHit,
    TrialTimeout,
    replay_tape,
    start_session,
)
from .metrics import MetricsReport, compute_report
from .model import (
    Commission,
    Correct,
    DoctorProfile,
    GameDefinition,
    LevelDefinition,
    ObjectSpec,
    Omission,
    PatientProfile,
    ProgressionRule,
    SessionRecord,
    TreatmentPlan,
    TrialRecord,
    Uncompleted,
    default_level,
    default_plan,
    normalize_session,
    validate_plan,
)
from .placement import PlacedObject, place_objects
from .simulate import (
    BehaviorModel,
    CrtSchedule,
    PhaseConfig,
    calibrate_schedule,
    run_experiment,
    run_phase,
    synth_session,
)
from .store import DocumentStore, ProgressionDecision, progression_decision

__version__ = "0.1.0"
