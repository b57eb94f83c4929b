"""Structured-text documents: JSON round-trip for every stored type.

Every top-level document carries schema_version. Parsing is strict and
reports the dotted path of the first bad field so the service can hand
callers a usable 400. serialize(parse(doc)) == doc for documents this
module wrote.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import DocumentError, SchemaVersionError
from .metrics import METRIC_FIELDS, MetricsReport
from .model import (
    Bounds,
    Commission,
    Correct,
    DoctorProfile,
    GameDefinition,
    GameType,
    Involvement,
    LevelDefinition,
    ObjectSpec,
    Omission,
    PatientProfile,
    ProgressionRule,
    SessionRecord,
    Shape,
    SizeRule,
    TreatmentPlan,
    TrialOutcome,
    TrialRecord,
    Uncompleted,
)

SCHEMA_VERSION = 1


def dumps(doc: dict) -> str:
    """Canonical human-readable form; byte-stable for equal documents."""
    return json.dumps(doc, indent=2) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DocumentError("$", "document must be a JSON object")
    return doc


def check_schema_version(doc: dict) -> None:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"expected {SCHEMA_VERSION}, got {version!r}")


def _get(doc: dict, key: str, path: str) -> Any:
    if key not in doc:
        raise DocumentError(f"{path}.{key}" if path else key, "missing field")
    return doc[key]


def _number(doc: dict, key: str, path: str) -> float:
    value = _get(doc, key, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DocumentError(f"{path}.{key}" if path else key, "expected a number")
    return float(value)


def _integer(doc: dict, key: str, path: str) -> int:
    value = _get(doc, key, path)
    if isinstance(value, bool) or not isinstance(value, int):
        raise DocumentError(f"{path}.{key}" if path else key, "expected an integer")
    return value


def _string(doc: dict, key: str, path: str) -> str:
    value = _get(doc, key, path)
    if not isinstance(value, str):
        raise DocumentError(f"{path}.{key}" if path else key, "expected a string")
    return value


def _enum(doc: dict, key: str, path: str, enum_cls):
    raw = _string(doc, key, path)
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise DocumentError(f"{path}.{key}" if path else key, f"must be one of: {allowed}") from None


def _list(doc: dict, key: str, path: str) -> list:
    value = _get(doc, key, path)
    if not isinstance(value, list):
        raise DocumentError(f"{path}.{key}" if path else key, "expected a list")
    return value


def _dict(doc: dict, key: str, path: str) -> dict:
    value = _get(doc, key, path)
    if not isinstance(value, dict):
        raise DocumentError(f"{path}.{key}" if path else key, "expected an object")
    return value


# -- patients ---------------------------------------------------------------

def patient_to_doc(patient: PatientProfile) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "patient_id": patient.patient_id,
        "current_level": patient.current_level,
        "latest_pi": patient.latest_pi,
        "preferences": list(patient.preferences),
    }


def patient_from_doc(doc: dict) -> PatientProfile:
    check_schema_version(doc)
    latest = doc.get("latest_pi")
    if latest is not None and (isinstance(latest, bool) or not isinstance(latest, (int, float))):
        raise DocumentError("latest_pi", "expected a number or null")
    prefs = _list(doc, "preferences", "") if "preferences" in doc else []
    if not all(isinstance(p, str) for p in prefs):
        raise DocumentError("preferences", "expected a list of strings")
    return PatientProfile(
        patient_id=_string(doc, "patient_id", ""),
        current_level=_integer(doc, "current_level", "") if "current_level" in doc else 1,
        latest_pi=None if latest is None else float(latest),
        preferences=tuple(prefs),
    )


# -- doctors ----------------------------------------------------------------

def doctor_to_doc(doctor: DoctorProfile) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "doctor_id": doctor.doctor_id,
        "experience": doctor.experience,
        "involvement": doctor.involvement.value,
    }


def doctor_from_doc(doc: dict) -> DoctorProfile:
    check_schema_version(doc)
    return DoctorProfile(
        doctor_id=_string(doc, "doctor_id", ""),
        experience=_integer(doc, "experience", ""),
        involvement=_enum(doc, "involvement", "", Involvement),
    )


# -- plans ------------------------------------------------------------------

def plan_to_doc(plan: TreatmentPlan) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "plan_id": plan.plan_id,
        "game": {
            "game_type": plan.game.game_type.value,
            "levels": [_level_to_doc(level) for level in plan.game.levels],
        },
        "program_duration": plan.program_duration,
        "progression": {
            "window": plan.progression.window,
            "advance_threshold": plan.progression.advance_threshold,
            "regress_below": plan.progression.regress_below,
            "hold_band": plan.progression.hold_band,
        },
    }


def _level_to_doc(level: LevelDefinition) -> dict:
    return {
        "objects": [
            {
                "shape": obj.shape.value,
                "size_rule": {
                    "base_radius": obj.size_rule.base_radius,
                    "distance_scale": obj.size_rule.distance_scale,
                },
                "placement_bounds": {
                    "x_min": obj.placement_bounds.x_min,
                    "y_min": obj.placement_bounds.y_min,
                    "x_max": obj.placement_bounds.x_max,
                    "y_max": obj.placement_bounds.y_max,
                },
                "is_target": obj.is_target,
                "visibility_order": obj.visibility_order,
            }
            for obj in level.objects
        ],
        "max_time_s": level.max_time_s,
        "trial_time_s": level.trial_time_s,
        "trials_per_session": level.trials_per_session,
        "effects": level.effects,
    }


def plan_from_doc(doc: dict) -> TreatmentPlan:
    check_schema_version(doc)
    game = _dict(doc, "game", "")
    levels = []
    for li, level_doc in enumerate(_list(game, "levels", "game")):
        path = f"game.levels[{li}]"
        if not isinstance(level_doc, dict):
            raise DocumentError(path, "expected an object")
        levels.append(_level_from_doc(level_doc, path))
    progression_doc = _dict(doc, "progression", "") if "progression" in doc else {}
    return TreatmentPlan(
        plan_id=_string(doc, "plan_id", ""),
        game=GameDefinition(
            game_type=_enum(game, "game_type", "game", GameType),
            levels=tuple(levels),
        ),
        program_duration=_number(doc, "program_duration", ""),
        progression=_progression_from_doc(progression_doc),
    )


def _progression_from_doc(doc: dict) -> ProgressionRule:
    defaults = ProgressionRule()
    hold = doc.get("hold_band")
    if hold is not None and (isinstance(hold, bool) or not isinstance(hold, (int, float))):
        raise DocumentError("progression.hold_band", "expected a number or null")
    return ProgressionRule(
        window=_integer(doc, "window", "progression") if "window" in doc else defaults.window,
        advance_threshold=(
            _number(doc, "advance_threshold", "progression")
            if "advance_threshold" in doc
            else defaults.advance_threshold
        ),
        regress_below=(
            _number(doc, "regress_below", "progression")
            if "regress_below" in doc
            else defaults.regress_below
        ),
        hold_band=None if hold is None else float(hold),
    )


def _level_from_doc(doc: dict, path: str) -> LevelDefinition:
    objects = []
    for oi, obj_doc in enumerate(_list(doc, "objects", path)):
        opath = f"{path}.objects[{oi}]"
        if not isinstance(obj_doc, dict):
            raise DocumentError(opath, "expected an object")
        size = _dict(obj_doc, "size_rule", opath)
        bounds = _dict(obj_doc, "placement_bounds", opath)
        is_target = obj_doc.get("is_target", False)
        if not isinstance(is_target, bool):
            raise DocumentError(f"{opath}.is_target", "expected a boolean")
        objects.append(
            ObjectSpec(
                shape=_enum(obj_doc, "shape", opath, Shape),
                size_rule=SizeRule(
                    base_radius=_number(size, "base_radius", f"{opath}.size_rule"),
                    distance_scale=(
                        _number(size, "distance_scale", f"{opath}.size_rule")
                        if "distance_scale" in size
                        else 0.0
                    ),
                ),
                placement_bounds=Bounds(
                    x_min=_number(bounds, "x_min", f"{opath}.placement_bounds"),
                    y_min=_number(bounds, "y_min", f"{opath}.placement_bounds"),
                    x_max=_number(bounds, "x_max", f"{opath}.placement_bounds"),
                    y_max=_number(bounds, "y_max", f"{opath}.placement_bounds"),
                ),
                is_target=is_target,
                visibility_order=(
                    _integer(obj_doc, "visibility_order", opath)
                    if "visibility_order" in obj_doc
                    else 0
                ),
            )
        )
    effects = doc.get("effects")
    if effects is not None and not isinstance(effects, str):
        raise DocumentError(f"{path}.effects", "expected a string or null")
    return LevelDefinition(
        objects=tuple(objects),
        max_time_s=_number(doc, "max_time_s", path),
        trial_time_s=_number(doc, "trial_time_s", path),
        trials_per_session=_integer(doc, "trials_per_session", path),
        effects=effects,
    )


# -- sessions ---------------------------------------------------------------

_OUTCOME_KINDS = {"correct": Correct, "commission": Commission, "omission": Omission, "uncompleted": Uncompleted}


def _outcome_to_doc(outcome: TrialOutcome) -> dict:
    if isinstance(outcome, Correct):
        return {"kind": "correct", "crt_s": outcome.crt_s}
    if isinstance(outcome, Commission):
        return {"kind": "commission", "elapsed_s": outcome.elapsed_s}
    if isinstance(outcome, Omission):
        return {"kind": "omission"}
    return {"kind": "uncompleted"}


def _outcome_from_doc(doc: dict, path: str) -> TrialOutcome:
    kind = _string(doc, "kind", path)
    if kind == "correct":
        return Correct(crt_s=_number(doc, "crt_s", path))
    if kind == "commission":
        return Commission(elapsed_s=_number(doc, "elapsed_s", path))
    if kind == "omission":
        return Omission()
    if kind == "uncompleted":
        return Uncompleted()
    raise DocumentError(f"{path}.kind", f"unknown outcome kind {kind!r}")


def session_to_doc(session: SessionRecord, plan_id: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "session_id": session.session_id,
        "patient_id": session.patient_id,
        "plan_id": plan_id,
        "level_index": session.level_index,
        "theta_s": session.theta_s,
        "gt_s": session.gt_s,
        "st_s": session.st_s,
        "started_at": session.started_at,
        "ended_at": session.ended_at,
        "trials": [
            {
                "index": t.index,
                "outcome": _outcome_to_doc(t.outcome),
                "started_at_s": t.started_at_s,
                "ended_at_s": t.ended_at_s,
                "position": list(t.position) if t.position is not None else None,
            }
            for t in session.trials
        ],
    }


def session_from_doc(doc: dict) -> tuple[SessionRecord, str]:
    """Returns the record plus the plan id the session ran under."""
    check_schema_version(doc)
    trials = []
    for ti, trial_doc in enumerate(_list(doc, "trials", "")):
        path = f"trials[{ti}]"
        if not isinstance(trial_doc, dict):
            raise DocumentError(path, "expected an object")
        position = trial_doc.get("position")
        if position is not None:
            if (
                not isinstance(position, list)
                or len(position) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in position)
            ):
                raise DocumentError(f"{path}.position", "expected [x, y] or null")
            position = (float(position[0]), float(position[1]))
        trials.append(
            TrialRecord(
                index=_integer(trial_doc, "index", path),
                outcome=_outcome_from_doc(_dict(trial_doc, "outcome", path), f"{path}.outcome"),
                started_at_s=_number(trial_doc, "started_at_s", path),
                ended_at_s=_number(trial_doc, "ended_at_s", path),
                position=position,
            )
        )
    for key in ("started_at", "ended_at"):
        value = doc.get(key)
        if value is not None and not isinstance(value, str):
            raise DocumentError(key, "expected a string or null")
    record = SessionRecord(
        session_id=_string(doc, "session_id", ""),
        patient_id=_string(doc, "patient_id", ""),
        level_index=_integer(doc, "level_index", ""),
        trials=tuple(trials),
        theta_s=_number(doc, "theta_s", ""),
        gt_s=_number(doc, "gt_s", ""),
        st_s=_number(doc, "st_s", ""),
        started_at=doc.get("started_at"),
        ended_at=doc.get("ended_at"),
    )
    return record, _string(doc, "plan_id", "")


# -- reports ----------------------------------------------------------------

def report_to_doc(
    report: MetricsReport,
    *,
    session_id: str,
    patient_id: str,
    progression: dict | None = None,
) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "session_id": session_id,
        "patient_id": patient_id,
        "metrics": {name: getattr(report, name) for name in METRIC_FIELDS},
        "gt_over_st": report.gt_over_st,
    }
    if progression is not None:
        doc["progression"] = progression
    return doc


def report_from_doc(doc: dict) -> tuple[MetricsReport, str, str, dict | None]:
    """Returns (report, session_id, patient_id, progression-or-None)."""
    check_schema_version(doc)
    metrics_doc = _dict(doc, "metrics", "")
    kwargs = {}
    for name in METRIC_FIELDS:
        value = metrics_doc.get(name)
        if name in ("m_s", "sd_s") and value is None:
            kwargs[name] = None
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DocumentError(f"metrics.{name}", "expected a number")
        kwargs[name] = value if name in ("t", "c", "i", "k", "oe", "ce") else float(value)
    progression = doc.get("progression")
    if progression is not None and not isinstance(progression, dict):
        raise DocumentError("progression", "expected an object or null")
    return (
        MetricsReport(**kwargs),
        _string(doc, "session_id", ""),
        _string(doc, "patient_id", ""),
        progression,
    )
