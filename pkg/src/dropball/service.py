"""HTTP face of the platform: documents, live sessions, reports.

All routes sit under /v1/. The wire path is a thin shell over the library:
events go straight into a SessionEngine keyed by session id, so a tape
replayed over HTTP finalizes to the same report the library produces.
Event timestamps ride the session's virtual clock; the server only uses
wall time to cap skew and to fire trial timeouts for silent clients, and
both stay lazy (checked on each request, no background timers).
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

from fastapi import Body, Depends, FastAPI, Header, HTTPException
from fastapi.responses import JSONResponse

from . import documents, model
from .engine import (
    EnginePhase,
    NonTargetHit,
    PlayerQuit,
    SessionEngine,
    SessionEvent,
    TargetHit,
    TrialTimeout,
    start_session,
)
from .errors import (
    DocumentError,
    DropballError,
    DuplicateIdError,
    InvalidDocumentError,
    PlacementError,
    PlanMismatchError,
    PrematureTimeoutError,
    ReferentialError,
    StateError,
    TimeRegressionError,
    UnknownIdError,
    UnknownLevelError,
)
from .store import DocumentStore, progression_decision

DEFAULT_SKEW_CAP_S = 2.0


@dataclass(frozen=True, slots=True)
class AppConfig:
    store_root: str = "./store"
    host: str = "127.0.0.1"
    port: int = 8000
    doctor_tokens: dict[str, str] = field(default_factory=dict)
    skew_cap_s: float | None = DEFAULT_SKEW_CAP_S
    default_plan_id: str | None = "default"


def load_config(path: str | Path | None = None) -> AppConfig:
    """Config file plus DROPBALL_* environment overrides."""
    raw: dict = {}
    if path is not None:
        raw = documents.loads(Path(path).read_text())
        raw.pop("schema_version", None)
    defaults = AppConfig()
    cfg = AppConfig(
        store_root=raw.get("store_root", defaults.store_root),
        host=raw.get("host", defaults.host),
        port=int(raw.get("port", defaults.port)),
        doctor_tokens=dict(raw.get("doctor_tokens", {})),
        skew_cap_s=raw.get("skew_cap_s", defaults.skew_cap_s),
        default_plan_id=raw.get("default_plan_id", defaults.default_plan_id),
    )
    env = os.environ
    if "DROPBALL_STORE_ROOT" in env:
        cfg = replace(cfg, store_root=env["DROPBALL_STORE_ROOT"])
    if "DROPBALL_HOST" in env:
        cfg = replace(cfg, host=env["DROPBALL_HOST"])
    if "DROPBALL_PORT" in env:
        cfg = replace(cfg, port=int(env["DROPBALL_PORT"]))
    if "DROPBALL_SKEW_CAP_S" in env:
        value = env["DROPBALL_SKEW_CAP_S"]
        cfg = replace(cfg, skew_cap_s=None if value.lower() in ("none", "off") else float(value))
    if "DROPBALL_DEFAULT_PLAN_ID" in env:
        cfg = replace(cfg, default_plan_id=env["DROPBALL_DEFAULT_PLAN_ID"] or None)
    if "DROPBALL_DOCTOR_TOKENS" in env:
        cfg = replace(cfg, doctor_tokens=dict(json.loads(env["DROPBALL_DOCTOR_TOKENS"])))
    return cfg


@dataclass
class _LiveSession:
    engine: SessionEngine
    plan: model.TreatmentPlan
    patient_id: str
    ticket: dict
    wall_started: float
    lock: threading.Lock = field(default_factory=threading.Lock)


def _event_from_body(body: dict) -> SessionEvent:
    kind = body.get("kind")
    at_s = body.get("at_s")
    if isinstance(at_s, bool) or not isinstance(at_s, (int, float)):
        raise DocumentError("at_s", "expected a number")
    if at_s < 0:
        raise DocumentError("at_s", "negative timestamp")
    position = body.get("position")
    if position is not None:
        if (
            not isinstance(position, (list, tuple))
            or len(position) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in position)
        ):
            raise DocumentError("position", "expected [x, y] or null")
        position = (float(position[0]), float(position[1]))
    at_s = float(at_s)
    if kind == "target_hit":
        return TargetHit(at_s=at_s, position=position)
    if kind == "non_target_hit":
        return NonTargetHit(at_s=at_s, position=position)
    if position is not None:
        raise DocumentError("position", f"event '{kind}' does not carry a position")
    if kind == "trial_timeout":
        return TrialTimeout(at_s=at_s)
    if kind == "player_quit":
        return PlayerQuit(at_s=at_s)
    raise DocumentError("kind", f"unknown event kind {kind!r}")


def _trial_record_doc(record) -> dict:
    doc = documents.session_to_doc(
        model.SessionRecord(
            session_id="", patient_id="", level_index=1, trials=(record,),
            theta_s=1.0, gt_s=0.0, st_s=1.0,
        ),
        plan_id="",
    )
    return doc["trials"][0]


def create_app(
    config: AppConfig | None = None,
    *,
    store: DocumentStore | None = None,
    clock=time.monotonic,
) -> FastAPI:
    cfg = config or AppConfig()
    app = FastAPI(title="dropball service")
    app.state.config = cfg
    app.state.store = store or DocumentStore(cfg.store_root)
    app.state.clock = clock
    app.state.live = {}
    app.state.active_by_patient = {}
    app.state.registry_lock = threading.Lock()

    st: DocumentStore = app.state.store
    if cfg.default_plan_id:
        try:
            st.get_plan(cfg.default_plan_id)
        except UnknownIdError:
            st.put_plan(model.default_plan(cfg.default_plan_id))

    def require_doctor(authorization: str | None = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="doctor credential required")
        token = authorization.removeprefix("Bearer ")
        for doctor_id, expected in cfg.doctor_tokens.items():
            if token == expected:
                return doctor_id
        raise HTTPException(status_code=401, detail="unknown doctor credential")

    @app.exception_handler(DropballError)
    async def _domain_error(_request, exc: DropballError):
        if isinstance(exc, InvalidDocumentError):
            detail = [{"path": v.path, "message": v.message} for v in exc.violations]
            return JSONResponse(status_code=400, content={"detail": detail})
        if isinstance(exc, DocumentError):
            return JSONResponse(
                status_code=400, content={"detail": [{"path": exc.path, "message": exc.message}]}
            )
        if isinstance(exc, UnknownIdError) or isinstance(exc, ReferentialError):
            return JSONResponse(status_code=404, content={"detail": str(exc)})
        if isinstance(exc, (DuplicateIdError, StateError)):
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        if isinstance(
            exc,
            (TimeRegressionError, PrematureTimeoutError, PlanMismatchError, UnknownLevelError, PlacementError),
        ):
            return JSONResponse(status_code=422, content={"detail": str(exc)})
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    # -- document CRUD -------------------------------------------------

    @app.post("/v1/patients", status_code=201)
    def create_patient(body: dict = Body(...)):
        patient = documents.patient_from_doc(body)
        violations = model.validate_patient(patient)
        if violations:
            raise InvalidDocumentError(violations)
        st.put_patient(patient)
        return documents.patient_to_doc(patient)

    @app.get("/v1/patients/{patient_id}")
    def get_patient(patient_id: str):
        return documents.patient_to_doc(st.get_patient(patient_id))

    @app.post("/v1/doctors", status_code=201)
    def create_doctor(body: dict = Body(...)):
        doctor = documents.doctor_from_doc(body)
        violations = model.validate_doctor(doctor)
        if violations:
            raise InvalidDocumentError(violations)
        st.put_doctor(doctor)
        return documents.doctor_to_doc(doctor)

    @app.get("/v1/doctors/{doctor_id}")
    def get_doctor(doctor_id: str):
        return documents.doctor_to_doc(st.get_doctor(doctor_id))

    @app.post("/v1/plans", status_code=201)
    def create_plan(body: dict = Body(...), _doctor: str = Depends(require_doctor)):
        plan = documents.plan_from_doc(body)
        violations = model.validate_plan(plan)
        if violations:
            raise InvalidDocumentError(violations)
        st.put_plan(plan)
        return documents.plan_to_doc(plan)

    @app.get("/v1/plans/suggested")
    def suggested_plan(patient_id: str | None = None):
        """Cold-start stub: always the configured default plan."""
        if not cfg.default_plan_id:
            raise HTTPException(status_code=404, detail="no default plan configured")
        if patient_id is not None:
            st.get_patient(patient_id)  # 404 for unknown patients
        return documents.plan_to_doc(st.get_plan(cfg.default_plan_id))

    @app.get("/v1/plans/{plan_id}")
    def get_plan(plan_id: str):
        return documents.plan_to_doc(st.get_plan(plan_id))

    # -- session lifecycle ----------------------------------------------

    @app.post("/v1/sessions", status_code=201)
    def open_session(body: dict = Body(...)):
        patient_id = body.get("patient_id")
        plan_id = body.get("plan_id")
        if not isinstance(patient_id, str):
            raise DocumentError("patient_id", "expected a string")
        if not isinstance(plan_id, str):
            raise DocumentError("plan_id", "expected a string")
        patient = st.get_patient(patient_id)
        plan = st.get_plan(plan_id)
        level_index = min(max(patient.current_level, 1), len(plan.game.levels))
        session_id = uuid.uuid4().hex
        layout_seed = int(session_id[:8], 16)
        with app.state.registry_lock:
            if patient_id in app.state.active_by_patient:
                raise HTTPException(
                    status_code=409,
                    detail=f"patient {patient_id} already has an active session",
                )
            engine = start_session(
                plan, patient, level_index, session_id=session_id, layout_seed=layout_seed
            )
            ticket = {
                "session_id": session_id,
                "patient_id": patient_id,
                "plan_id": plan_id,
                "level_index": level_index,
                "theta_s": engine.theta,
                "trials_per_session": engine.trials_total,
                "st_s": engine.st_s,
                "layout_seed": layout_seed,
            }
            app.state.live[session_id] = _LiveSession(
                engine=engine,
                plan=plan,
                patient_id=patient_id,
                ticket=ticket,
                wall_started=app.state.clock(),
            )
            app.state.active_by_patient[patient_id] = session_id
        return ticket

    def _live(session_id: str) -> _LiveSession:
        live = app.state.live.get(session_id)
        if live is None:
            raise HTTPException(status_code=404, detail=f"no live session {session_id}")
        return live

    def _catch_up_timeouts(live: _LiveSession) -> None:
        """Server-authoritative omissions for clients that went silent."""
        if cfg.skew_cap_s is None:
            return
        wall = app.state.clock() - live.wall_started
        engine = live.engine
        while (
            engine.phase is EnginePhase.IN_TRIAL
            and wall > engine.trial_start_s + engine.theta + cfg.skew_cap_s
        ):
            engine.apply(TrialTimeout(at_s=engine.trial_start_s + engine.theta))

    @app.post("/v1/sessions/{session_id}/events")
    def post_event(session_id: str, body: dict = Body(...)):
        live = _live(session_id)
        event = _event_from_body(body)
        with live.lock:
            _catch_up_timeouts(live)
            if cfg.skew_cap_s is not None:
                wall = app.state.clock() - live.wall_started
                if event.at_s > wall + cfg.skew_cap_s:
                    raise TimeRegressionError(
                        f"timestamp {event.at_s} runs ahead of the server clock"
                    )
            closed = live.engine.apply(event)
            engine = live.engine
            in_trial = engine.phase is EnginePhase.IN_TRIAL
            return {
                "session_id": session_id,
                "phase": engine.phase.value,
                "trial_index": engine.trial_index if in_trial else None,
                "trial_start_s": engine.trial_start_s if in_trial else None,
                "closed": _trial_record_doc(closed) if closed is not None else None,
                "tally": _running_tally(engine),
            }

    def _running_tally(engine: SessionEngine) -> dict:
        c = oe = ce = k = 0
        for record in engine.records:
            if isinstance(record.outcome, model.Correct):
                c += 1
            elif isinstance(record.outcome, model.Omission):
                oe += 1
            elif isinstance(record.outcome, model.Commission):
                ce += 1
            else:
                k += 1
        return {"c": c, "oe": oe, "ce": ce, "k": k}

    @app.post("/v1/sessions/{session_id}/finalize")
    def finalize_session(session_id: str):
        live = app.state.live.get(session_id)
        if live is None:
            # idempotent repeat: hand back what was stored the first time
            try:
                report, _sid, patient_id, progression = st.get_report(session_id)
            except UnknownIdError:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
            return {
                "report": documents.report_to_doc(
                    report, session_id=session_id, patient_id=patient_id, progression=progression
                ),
                "progression": progression,
            }
        with live.lock:
            engine = live.engine
            _catch_up_timeouts(live)
            if engine.phase is not EnginePhase.ENDED:
                engine.apply(PlayerQuit(at_s=engine.clock_s))
            record, report = engine.finalize()
            patient = st.get_patient(live.patient_id)
            rule = live.plan.progression
            prior = st.pi_history(live.patient_id)
            window = (prior + [report.pi])[-rule.window :]
            decision = progression_decision(
                window, rule, patient.current_level, len(live.plan.game.levels)
            )
            progression = {
                "action": decision.action,
                "new_level": decision.new_level,
                "mean_pi": decision.mean_pi,
                "window_used": decision.window_used,
            }
            st.put_session(record, live.ticket["plan_id"])
            st.put_report(
                report,
                session_id=session_id,
                patient_id=live.patient_id,
                progression=progression,
            )
            st.put_patient(
                replace(patient, latest_pi=report.pi, current_level=decision.new_level)
            )
            with app.state.registry_lock:
                app.state.live.pop(session_id, None)
                app.state.active_by_patient.pop(live.patient_id, None)
            return {
                "report": documents.report_to_doc(
                    report,
                    session_id=session_id,
                    patient_id=live.patient_id,
                    progression=progression,
                ),
                "progression": progression,
            }

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        live = app.state.live.get(session_id)
        if live is not None:
            engine = live.engine
            in_trial = engine.phase is EnginePhase.IN_TRIAL
            return {
                "live": True,
                "ticket": live.ticket,
                "phase": engine.phase.value,
                "trial_index": engine.trial_index if in_trial else None,
                "tally": _running_tally(engine),
            }
        record, plan_id = st.get_session(session_id)
        return {"live": False, "session": documents.session_to_doc(record, plan_id)}

    @app.get("/v1/patients/{patient_id}/report")
    def patient_report(patient_id: str, _doctor: str = Depends(require_doctor)):
        """Course view for the doctor: PI trend plus the factor series."""
        st.get_patient(patient_id)
        rows = st.list_reports(patient_id)
        return {
            "patient_id": patient_id,
            "sessions": [sid for _r, sid, _pid, _prog in rows],
            "pi": [r.pi for r, *_ in rows],
            "gf": [r.gf for r, *_ in rows],
            "iaf": [r.iaf for r, *_ in rows],
            "imf": [r.imf for r, *_ in rows],
            "ef": [r.ef for r, *_ in rows],
            "m_s": [r.m_s for r, *_ in rows],
        }

    return app
