"""File-backed document store plus the level progression policy.

One JSON document per file, one directory per collection, and a per
collection index file that preserves creation order. Sessions and reports
are append-only; profiles and plans may be re-put. Writes go through an
in-process lock and an atomic rename; multi-process writers are out of
scope (run one service per store root).
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from pathlib import Path

from . import documents, model
from .errors import (
    DuplicateIdError,
    InvalidDocumentError,
    ReferentialError,
    UnknownIdError,
)
from .metrics import MetricsReport
from .model import (
    DoctorProfile,
    PatientProfile,
    ProgressionRule,
    SessionRecord,
    TreatmentPlan,
)

_COLLECTIONS = ("patients", "doctors", "plans", "sessions", "reports")


@dataclass(frozen=True, slots=True)
class ProgressionDecision:
    """Outcome of the sliding-window level policy."""

    action: str  # advance | hold | regress
    new_level: int
    mean_pi: float | None
    window_used: int


def progression_decision(
    history: list[float],
    rule: ProgressionRule,
    current_level: int,
    max_level: int,
) -> ProgressionDecision:
    """Pure policy: mean PI over the window against the rule thresholds.

    Fewer sessions than the window uses what exists; no sessions holds.
    The new level is always clamped to 1..max_level.
    """
    window = history[-rule.window :]
    if not window:
        return ProgressionDecision("hold", min(max(current_level, 1), max_level), None, 0)
    mean_pi = sum(window) / len(window)
    if mean_pi >= rule.advance_threshold:
        action = "advance"
        new_level = current_level + 1
    elif mean_pi < rule.regress_below:
        action = "regress"
        new_level = current_level - 1
    else:
        action = "hold"
        new_level = current_level
    new_level = min(max(new_level, 1), max_level)
    return ProgressionDecision(action, new_level, mean_pi, len(window))


class DocumentStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.RLock()
        for name in _COLLECTIONS:
            (self.root / name).mkdir(parents=True, exist_ok=True)

    # -- plumbing ------------------------------------------------------

    def _index_path(self, collection: str) -> Path:
        return self.root / collection / "_index.json"

    def _doc_path(self, collection: str, doc_id: str) -> Path:
        safe = doc_id.replace(os.sep, "_").replace("/", "_")
        return self.root / collection / f"{safe}.json"

    def _read_index(self, collection: str) -> list[str]:
        path = self._index_path(collection)
        if not path.exists():
            return []
        doc = documents.loads(path.read_text())
        documents.check_schema_version(doc)
        return list(doc.get("ids", []))

    def _write_index(self, collection: str, ids: list[str]) -> None:
        body = documents.dumps({"schema_version": documents.SCHEMA_VERSION, "ids": ids})
        self._atomic_write(self._index_path(collection), body)

    def _atomic_write(self, path: Path, body: str) -> None:
        tmp = path.with_suffix(".tmp")
        tmp.write_text(body)
        os.replace(tmp, path)

    def _put(self, collection: str, doc_id: str, doc: dict, *, append_only: bool) -> None:
        with self._lock:
            ids = self._read_index(collection)
            exists = doc_id in ids
            if exists and append_only:
                raise DuplicateIdError(f"{collection}/{doc_id} already stored")
            self._atomic_write(self._doc_path(collection, doc_id), documents.dumps(doc))
            if not exists:
                ids.append(doc_id)
                self._write_index(collection, ids)

    def _get(self, collection: str, doc_id: str) -> dict:
        path = self._doc_path(collection, doc_id)
        if doc_id not in self._read_index(collection) or not path.exists():
            raise UnknownIdError(f"{collection}/{doc_id} not found")
        return documents.loads(path.read_text())

    def _exists(self, collection: str, doc_id: str) -> bool:
        return doc_id in self._read_index(collection)

    # -- profiles and plans ---------------------------------------------

    def put_patient(self, patient: PatientProfile) -> None:
        violations = model.validate_patient(patient)
        if violations:
            raise InvalidDocumentError(violations)
        self._put("patients", patient.patient_id, documents.patient_to_doc(patient), append_only=False)

    def get_patient(self, patient_id: str) -> PatientProfile:
        return documents.patient_from_doc(self._get("patients", patient_id))

    def list_patients(self) -> list[PatientProfile]:
        return [self.get_patient(pid) for pid in self._read_index("patients")]

    def put_doctor(self, doctor: DoctorProfile) -> None:
        violations = model.validate_doctor(doctor)
        if violations:
            raise InvalidDocumentError(violations)
        self._put("doctors", doctor.doctor_id, documents.doctor_to_doc(doctor), append_only=False)

    def get_doctor(self, doctor_id: str) -> DoctorProfile:
        return documents.doctor_from_doc(self._get("doctors", doctor_id))

    def list_doctors(self) -> list[DoctorProfile]:
        return [self.get_doctor(did) for did in self._read_index("doctors")]

    def put_plan(self, plan: TreatmentPlan) -> None:
        violations = model.validate_plan(plan)
        if violations:
            raise InvalidDocumentError(violations)
        self._put("plans", plan.plan_id, documents.plan_to_doc(plan), append_only=False)

    def get_plan(self, plan_id: str) -> TreatmentPlan:
        return documents.plan_from_doc(self._get("plans", plan_id))

    def list_plans(self) -> list[TreatmentPlan]:
        return [self.get_plan(pid) for pid in self._read_index("plans")]

    # -- sessions and reports (append-only) ------------------------------

    def put_session(self, session: SessionRecord, plan_id: str) -> None:
        with self._lock:
            if not self._exists("patients", session.patient_id):
                raise ReferentialError(f"session references unknown patient {session.patient_id}")
            if not self._exists("plans", plan_id):
                raise ReferentialError(f"session references unknown plan {plan_id}")
            self._put(
                "sessions",
                session.session_id,
                documents.session_to_doc(session, plan_id),
                append_only=True,
            )

    def get_session(self, session_id: str) -> tuple[SessionRecord, str]:
        return documents.session_from_doc(self._get("sessions", session_id))

    def list_sessions(self, patient_id: str | None = None) -> list[tuple[SessionRecord, str]]:
        out = []
        for sid in self._read_index("sessions"):
            record, plan_id = self.get_session(sid)
            if patient_id is None or record.patient_id == patient_id:
                out.append((record, plan_id))
        return out

    def put_report(
        self,
        report: MetricsReport,
        *,
        session_id: str,
        patient_id: str,
        progression: dict | None = None,
    ) -> None:
        with self._lock:
            if not self._exists("sessions", session_id):
                raise ReferentialError(f"report references unknown session {session_id}")
            doc = documents.report_to_doc(
                report, session_id=session_id, patient_id=patient_id, progression=progression
            )
            self._put("reports", session_id, doc, append_only=True)

    def get_report(self, session_id: str) -> tuple[MetricsReport, str, str, dict | None]:
        return documents.report_from_doc(self._get("reports", session_id))

    def list_reports(self, patient_id: str | None = None) -> list[tuple[MetricsReport, str, str, dict | None]]:
        out = []
        for sid in self._read_index("reports"):
            parsed = self.get_report(sid)
            if patient_id is None or parsed[2] == patient_id:
                out.append(parsed)
        return out

    # -- derived views ----------------------------------------------------

    def pi_history(self, patient_id: str, window: int | None = None) -> list[float]:
        """Session PI values for a patient, oldest first.

        window keeps only the most recent n; None keeps everything.
        """
        if not self._exists("patients", patient_id):
            raise UnknownIdError(f"patients/{patient_id} not found")
        history = [report.pi for report, _sid, _pid, _prog in self.list_reports(patient_id)]
        if window is not None:
            history = history[-window:]
        return history

    def decide_progression(self, patient: PatientProfile, plan: TreatmentPlan) -> ProgressionDecision:
        """Apply the plan's rule to the patient's stored PI history."""
        history = self.pi_history(patient.patient_id, plan.progression.window)
        return progression_decision(
            history, plan.progression, patient.current_level, len(plan.game.levels)
        )
