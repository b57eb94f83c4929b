"""Command line surface, exercised through real subprocesses."""

import json
import subprocess
import sys

import pytest

from dropball import documents
from dropball.metrics import compute_report
from dropball.model import PatientProfile, default_plan
from dropball.placement import place_objects
from dropball.model import default_level
from dropball.store import DocumentStore

from util import make_session


def run_cli(*argv, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "dropball", *argv],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def test_entry_point_prints_usage():
    result = run_cli("--help")
    assert result.returncode == 0
    assert "simulate" in result.stdout
    assert "score" in result.stdout


def test_simulate_is_byte_reproducible(tmp_path):
    first = run_cli("simulate", "--part", "1", "--seed", "7", "--sessions", "3",
                    "--out", str(tmp_path / "a"))
    second = run_cli("simulate", "--part", "1", "--seed", "7", "--sessions", "3",
                     "--out", str(tmp_path / "b"))
    assert first.returncode == 0, first.stderr
    assert second.returncode == 0
    for name in ("part1_table.csv", "part1_pi_series.csv", "part1_sessions.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    tapes_a = sorted((tmp_path / "a" / "part1_tapes").iterdir())
    tapes_b = sorted((tmp_path / "b" / "part1_tapes").iterdir())
    assert [p.name for p in tapes_a] == [p.name for p in tapes_b]
    assert all(x.read_bytes() == y.read_bytes() for x, y in zip(tapes_a, tapes_b))
    assert "part 1 synthetic course" in first.stdout


def test_simulate_seed_changes_output(tmp_path):
    run_cli("simulate", "--part", "2", "--seed", "1", "--sessions", "2",
            "--out", str(tmp_path / "a"))
    run_cli("simulate", "--part", "2", "--seed", "2", "--sessions", "2",
            "--out", str(tmp_path / "b"))
    a = (tmp_path / "a" / "part2_sessions.csv").read_text()
    b = (tmp_path / "b" / "part2_sessions.csv").read_text()
    assert a != b


def test_score_matches_the_recorded_run(tmp_path):
    out = tmp_path / "out"
    run = run_cli("simulate", "--part", "1", "--seed", "3", "--sessions", "2",
                  "--out", str(out))
    assert run.returncode == 0, run.stderr
    tape_path = out / "part1_tapes" / "part1-phase2-s01.tape"
    scored = run_cli("score", str(tape_path))
    assert scored.returncode == 0, scored.stderr
    doc = json.loads(scored.stdout)
    # the simulate run recorded this session's metrics in its CSV
    rows = (out / "part1_sessions.csv").read_text().splitlines()
    header = rows[0].split(",")
    match = next(
        r.split(",") for r in rows[1:]
        if r.startswith("part1-phase2,1,")
    )
    csv_metrics = dict(zip(header, match))
    assert doc["metrics"]["c"] == int(csv_metrics["c"])
    assert doc["metrics"]["m_s"] == pytest.approx(float(csv_metrics["m_s"]))
    assert doc["metrics"]["pi"] == pytest.approx(float(csv_metrics["pi"]))


def test_score_rejects_malformed_tape(tmp_path):
    bad = tmp_path / "bad.tape"
    bad.write_text("target_hit nonsense\n")
    result = run_cli("score", str(bad))
    assert result.returncode == 2
    assert "tape error" in result.stderr
    assert run_cli("score", str(tmp_path / "missing.tape")).returncode == 2


def test_plan_add_show_round_trip(tmp_path):
    store_dir = tmp_path / "store"
    plan_doc = documents.plan_to_doc(default_plan("custom"))
    plan_file = tmp_path / "plan.json"
    plan_file.write_text(documents.dumps(plan_doc))
    added = run_cli("plan", "add", str(plan_file), "--store", str(store_dir))
    assert added.returncode == 0
    assert "stored plan custom" in added.stdout
    shown = run_cli("plan", "show", "custom", "--store", str(store_dir))
    assert shown.returncode == 0
    assert json.loads(shown.stdout) == plan_doc


def test_plan_add_prints_violations(tmp_path):
    plan_doc = documents.plan_to_doc(default_plan("broken"))
    plan_doc["game"]["levels"][0]["trial_time_s"] = -5.0
    plan_file = tmp_path / "plan.json"
    plan_file.write_text(documents.dumps(plan_doc))
    result = run_cli("plan", "add", str(plan_file), "--store", str(tmp_path / "store"))
    assert result.returncode == 2
    assert "trial_time_s" in result.stderr


def test_export_writes_patient_csv(tmp_path):
    store = DocumentStore(tmp_path / "store")
    store.put_patient(PatientProfile("alice", current_level=1))
    store.put_plan(default_plan())
    session = make_session([5.0, 10.0], oe=4, ce=4, session_id="s-1", patient_id="alice")
    store.put_session(session, plan_id="default")
    store.put_report(compute_report(session), session_id="s-1", patient_id="alice")

    out = tmp_path / "alice.csv"
    result = run_cli("export", "--patient", "alice", "--store", str(tmp_path / "store"),
                     "--out", str(out))
    assert result.returncode == 0, result.stderr
    rows = out.read_text().splitlines()
    assert rows[0].startswith("session_id,patient,t,c,i,k")
    assert rows[1].startswith("s-1,alice,10,2,8,0")

    masked = run_cli("export", "--patient", "alice", "--store", str(tmp_path / "store"),
                     "--pseudonymize")
    assert masked.returncode == 0
    assert "alice" not in masked.stdout.splitlines()[1]
    assert ",p-" in masked.stdout.splitlines()[1]

    missing = run_cli("export", "--patient", "nobody", "--store", str(tmp_path / "store"))
    assert missing.returncode == 1


def test_layout_json_matches_library(tmp_path):
    out = tmp_path / "layouts.json"
    result = run_cli("layout", "--seed", "5", "--count", "3", "--out", str(out))
    assert result.returncode == 0
    entries = json.loads(out.read_text())
    assert [e["seed"] for e in entries] == [5, 6, 7]
    level = default_level()
    for entry in entries:
        placed = place_objects(level, entry["seed"], entry["trial"])
        assert [(o["x"], o["y"], o["radius"]) for o in entry["objects"]] == [
            (p.x, p.y, p.radius) for p in placed
        ]
    assert run_cli("layout", "--count", "0").returncode == 2
