"""Persistence: round trips, ordering, referential checks, progression calls."""

import pytest

from dropball.errors import (
    DuplicateIdError,
    InvalidDocumentError,
    ReferentialError,
    UnknownIdError,
)
from dropball.metrics import compute_report
from dropball.model import (
    DoctorProfile,
    Involvement,
    PatientProfile,
    ProgressionRule,
    default_plan,
)
from dropball.store import DocumentStore, progression_decision

from util import make_session


@pytest.fixture
def store(tmp_path):
    return DocumentStore(tmp_path / "store")


def seed(store, patient_id="p-1", plan_id="default"):
    store.put_patient(PatientProfile(patient_id, current_level=1))
    store.put_plan(default_plan(plan_id))
    return patient_id, plan_id


def stash_report(store, patient_id, plan_id, session_id, pi_sessions):
    session = make_session(
        pi_sessions, session_id=session_id, patient_id=patient_id
    )
    store.put_session(session, plan_id=plan_id)
    report = compute_report(session)
    store.put_report(report, session_id=session_id, patient_id=patient_id)
    return report


def test_patient_round_trip_and_upsert(store):
    store.put_patient(PatientProfile("p-1", current_level=1))
    store.put_patient(PatientProfile("p-1", current_level=2, latest_pi=0.4))
    assert store.get_patient("p-1").current_level == 2
    assert store.list_patients() == [store.get_patient("p-1")]


def test_doctor_and_plan_round_trip(store):
    doctor = DoctorProfile("d-1", experience=5, involvement=Involvement.CAN_CONFIGURE)
    store.put_doctor(doctor)
    assert store.get_doctor("d-1") == doctor
    plan = default_plan("plan-a")
    store.put_plan(plan)
    assert store.get_plan("plan-a") == plan


def test_unknown_ids_raise(store):
    with pytest.raises(UnknownIdError):
        store.get_patient("ghost")
    with pytest.raises(UnknownIdError):
        store.get_session("ghost")
    with pytest.raises(UnknownIdError):
        store.pi_history("ghost")


def test_invalid_documents_are_rejected(store):
    with pytest.raises(InvalidDocumentError) as err:
        store.put_patient(PatientProfile("p-1", current_level=0))
    assert err.value.violations
    with pytest.raises(InvalidDocumentError):
        store.put_doctor(DoctorProfile("d", experience=9, involvement=Involvement.REPORTS_ONLY))


def test_sessions_need_existing_patient_and_plan(store):
    session = make_session([5.0], k=9, patient_id="p-1")
    with pytest.raises(ReferentialError):
        store.put_session(session, plan_id="default")
    store.put_patient(PatientProfile("p-1", current_level=1))
    with pytest.raises(ReferentialError):
        store.put_session(session, plan_id="default")
    store.put_plan(default_plan("default"))
    store.put_session(session, plan_id="default")


def test_sessions_are_append_only(store):
    patient_id, plan_id = seed(store)
    session = make_session([5.0], k=9, session_id="s-1", patient_id=patient_id)
    store.put_session(session, plan_id=plan_id)
    with pytest.raises(DuplicateIdError):
        store.put_session(session, plan_id=plan_id)


def test_reports_need_their_session(store):
    patient_id, plan_id = seed(store)
    report = compute_report(make_session([5.0], k=9))
    with pytest.raises(ReferentialError):
        store.put_report(report, session_id="missing", patient_id=patient_id)


def test_listing_keeps_creation_order_per_patient(store):
    patient_id, plan_id = seed(store)
    other = "p-2"
    store.put_patient(PatientProfile(other, current_level=1))
    for i in range(3):
        stash_report(store, patient_id, plan_id, f"s-{i}", [5.0 + i])
    stash_report(store, other, plan_id, "s-x", [9.0])
    mine = store.list_sessions(patient_id)
    assert [record.session_id for record, _plan in mine] == ["s-0", "s-1", "s-2"]
    assert [sid for _r, sid, _pid, _prog in store.list_reports(patient_id)] == [
        "s-0", "s-1", "s-2",
    ]


def test_reopening_the_store_sees_everything(tmp_path):
    first = DocumentStore(tmp_path / "store")
    patient_id, plan_id = seed(first)
    stash_report(first, patient_id, plan_id, "s-1", [10.0, 20.0])
    second = DocumentStore(tmp_path / "store")
    assert second.get_patient(patient_id).patient_id == patient_id
    assert [r.session_id for r, _plan in second.list_sessions(patient_id)] == ["s-1"]
    assert len(second.pi_history(patient_id)) == 1


def test_pi_history_is_oldest_first_with_window(store):
    patient_id, plan_id = seed(store)
    expected = []
    for i in range(5):
        report = stash_report(store, patient_id, plan_id, f"s-{i}", [5.0 + 10 * i])
        expected.append(report.pi)
    assert store.pi_history(patient_id) == pytest.approx(expected)
    assert store.pi_history(patient_id, window=2) == pytest.approx(expected[-2:])


def test_progression_rule_advances_on_high_mean():
    rule = ProgressionRule(window=3, advance_threshold=0.7, regress_below=0.3)
    decision = progression_decision([0.9, 0.8, 0.75], rule, current_level=1, max_level=3)
    assert decision.action == "advance"
    assert decision.new_level == 2
    assert decision.mean_pi == pytest.approx((0.9 + 0.8 + 0.75) / 3)


def test_progression_rule_regresses_on_low_mean():
    rule = ProgressionRule(window=3, advance_threshold=0.7, regress_below=0.3)
    decision = progression_decision([0.1, 0.2, 0.25], rule, current_level=2, max_level=3)
    assert decision.action == "regress"
    assert decision.new_level == 1


def test_progression_rule_holds_in_the_band():
    rule = ProgressionRule(window=3, advance_threshold=0.7, regress_below=0.3)
    decision = progression_decision([0.5, 0.5, 0.5], rule, current_level=2, max_level=3)
    assert decision.action == "hold"
    assert decision.new_level == 2


def test_progression_clamps_at_the_rails():
    # the verdict survives at the rails, the level does not move past them
    rule = ProgressionRule(window=2, advance_threshold=0.7, regress_below=0.3)
    top = progression_decision([0.9, 0.9], rule, current_level=3, max_level=3)
    assert top.action == "advance" and top.new_level == 3
    bottom = progression_decision([0.1, 0.1], rule, current_level=1, max_level=3)
    assert bottom.action == "regress" and bottom.new_level == 1


def test_progression_without_history_holds(store):
    rule = ProgressionRule()
    decision = progression_decision([], rule, current_level=1, max_level=3)
    assert decision.action == "hold"
    assert decision.mean_pi is None


def test_progression_uses_only_the_window():
    rule = ProgressionRule(window=2, advance_threshold=0.7, regress_below=0.3)
    decision = progression_decision(
        [0.1, 0.1, 0.8, 0.9], rule, current_level=1, max_level=3
    )
    assert decision.action == "advance"
    assert decision.window_used == 2


def test_store_decide_progression_reads_history(store):
    patient_id, plan_id = seed(store)
    # three perfect sessions: every trial correct and fast
    for i in range(3):
        stash_report(store, patient_id, plan_id, f"s-{i}", [1.0] * 10)
    patient = store.get_patient(patient_id)
    plan = store.get_plan(plan_id)
    decision = store.decide_progression(patient, plan)
    assert decision.action == "advance"
    assert decision.new_level == 2
