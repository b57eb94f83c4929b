"""Command line: simulate, score, serve, plan, export, layout.

Exit codes: 0 success, 1 runtime failure, 2 bad input (unparseable tape,
invalid plan file, unusable arguments). Simulation outputs are plain CSV
and tape files written with fixed formatting, so equal seeds give equal
bytes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import documents, tape
from .engine import replay_tape
from .errors import DocumentError, DropballError, InvalidDocumentError, TapeError
from .metrics import METRIC_FIELDS, csv_header, csv_row
from .model import default_level, validate_plan
from .placement import place_objects
from .simulate import ExperimentResult, run_experiment
from .store import DocumentStore


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except TapeError as exc:
        print(f"tape error: {exc}", file=sys.stderr)
        return 2
    except (DocumentError, InvalidDocumentError) as exc:
        print(f"invalid document: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 2
    except DropballError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dropball", description="therapy game sessions: synthesize, score, serve"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize one study part and write CSV tables")
    sim.add_argument("--part", type=int, choices=(1, 2), required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--sessions", type=int, default=20, help="sessions per phase")
    sim.add_argument("--out", default="./out", help="output directory")
    sim.add_argument("--charts", action="store_true", help="also render an SVG chart")
    sim.set_defaults(handler=_cmd_simulate)

    score = sub.add_parser("score", help="replay an event tape and print its report")
    score.add_argument("tape", help="path to a tape file")
    score.add_argument("--theta-s", type=float, default=60.0, help="trial window seconds")
    score.add_argument("--trials", type=int, default=10, help="trials per session")
    score.add_argument("--session-cap", type=float, default=None, help="session cap seconds")
    score.set_defaults(handler=_cmd_score)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", default=None, help="JSON config file")
    serve.set_defaults(handler=_cmd_serve)

    plan = sub.add_parser("plan", help="manage stored treatment plans")
    plan_sub = plan.add_subparsers(dest="plan_command", required=True)
    plan_add = plan_sub.add_parser("add", help="validate and store a plan document")
    plan_add.add_argument("file", help="plan JSON document")
    plan_add.add_argument("--store", default="./store")
    plan_add.set_defaults(handler=_cmd_plan_add)
    plan_show = plan_sub.add_parser("show", help="print a stored plan")
    plan_show.add_argument("plan_id")
    plan_show.add_argument("--store", default="./store")
    plan_show.set_defaults(handler=_cmd_plan_show)

    export = sub.add_parser("export", help="dump a patient's session reports as CSV")
    export.add_argument("--patient", required=True)
    export.add_argument("--store", default="./store")
    export.add_argument("--out", default=None, help="CSV file (default stdout)")
    export.add_argument(
        "--pseudonymize", action="store_true", help="replace the patient id with a stable alias"
    )
    export.set_defaults(handler=_cmd_export)

    layout = sub.add_parser("layout", help="print deterministic object layouts as JSON")
    layout.add_argument("--seed", type=int, default=0)
    layout.add_argument("--count", type=int, default=1, help="number of consecutive seeds")
    layout.add_argument("--trial", type=int, default=1)
    layout.add_argument("--out", default=None, help="JSON file (default stdout)")
    layout.set_defaults(handler=_cmd_layout)

    return parser


def _cmd_simulate(args) -> int:
    if args.sessions < 1:
        print("need at least one session per phase", file=sys.stderr)
        return 2
    result = run_experiment(args.part, args.seed, sessions=args.sessions)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_table_csv(result, out_dir / f"part{args.part}_table.csv")
    _write_pi_series_csv(result, out_dir / f"part{args.part}_pi_series.csv")
    _write_sessions_csv(result, out_dir / f"part{args.part}_sessions.csv")
    _write_tapes(result, out_dir / f"part{args.part}_tapes")
    print(_format_summary(result))
    print(f"wrote CSV tables and tapes under {out_dir}")
    if args.charts:
        chart = out_dir / f"part{args.part}_pi.svg"
        _render_chart(result, chart)
        print(f"wrote chart {chart}")
    return 0


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _open_csv(path: Path):
    return open(path, "w", newline="")


def _write_table_csv(result: ExperimentResult, path: Path) -> None:
    with _open_csv(path) as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(
            ["phase", "sessions", "c", "oe", "ce", "k",
             "iaf", "imf", "ef", "gf", "m_s", "sd_s", "avg_pi"]
        )
        for run in result.runs:
            phase = run.result.phase
            first = run.result.reports[0]
            writer.writerow(
                [
                    phase.label,
                    phase.sessions,
                    phase.c,
                    phase.oe,
                    phase.ce,
                    phase.k,
                    _fmt(first.iaf),
                    _fmt(first.imf),
                    _fmt(first.ef),
                    _fmt(first.gf),
                    _fmt(run.result.m_s),
                    _fmt(run.result.sd_s),
                    _fmt(run.result.avg_pi),
                ]
            )


def _write_pi_series_csv(result: ExperimentResult, path: Path) -> None:
    with _open_csv(path) as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["session_index", "phase", "pi"])
        for run in result.runs:
            for idx, pi in enumerate(run.result.pi_series, start=1):
                writer.writerow([idx, run.result.phase.label, _fmt(pi)])


def _write_sessions_csv(result: ExperimentResult, path: Path) -> None:
    with _open_csv(path) as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["phase", "session_index"] + csv_header())
        for run in result.runs:
            for idx, report in enumerate(run.result.reports, start=1):
                writer.writerow([run.result.phase.label, idx] + csv_row(report))


def _write_tapes(result: ExperimentResult, tapes_dir: Path) -> None:
    tapes_dir.mkdir(parents=True, exist_ok=True)
    for run in result.runs:
        for idx, events in enumerate(run.result.tapes, start=1):
            path = tapes_dir / f"{run.result.phase.label}-s{idx:02d}.tape"
            path.write_text(tape.dumps(events))


def _format_summary(result: ExperimentResult) -> str:
    labels = [run.result.phase.label for run in result.runs]
    width = max(12, max(len(l) for l in labels) + 2)

    def row(name: str, values) -> str:
        return name.ljust(14) + "".join(str(v).rjust(width) for v in values)

    def pct(x: float) -> str:
        return f"{round(x * 100)}%"

    lines = [
        f"part {result.part} synthetic course (seed {result.seed})",
        "=" * (14 + width * len(labels)),
        row("", labels),
        row("sessions", [r.result.phase.sessions for r in result.runs]),
        row("C", [r.result.phase.c for r in result.runs]),
        row("OE", [r.result.phase.oe for r in result.runs]),
        row("CE", [r.result.phase.ce for r in result.runs]),
        row("K", [r.result.phase.k for r in result.runs]),
        row("IAF", [pct(r.result.reports[0].iaf) for r in result.runs]),
        row("IMF", [pct(r.result.reports[0].imf) for r in result.runs]),
        row("EF", [pct(r.result.reports[0].ef) for r in result.runs]),
        row("GF", [pct(r.result.reports[0].gf) for r in result.runs]),
        row("M (s)", [f"{r.result.m_s:.2f}" for r in result.runs]),
        row("SD (s)", [f"{r.result.sd_s:.2f}" for r in result.runs]),
        row("Average PI", [pct(r.result.avg_pi) for r in result.runs]),
    ]
    return "\n".join(lines)


def _render_chart(result: ExperimentResult, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "dropball"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for run in result.runs:
        series = run.result.pi_series
        ax.plot(range(1, len(series) + 1), series, marker="o", markersize=3,
                label=run.result.phase.label)
    ax.set_xlabel("session")
    ax.set_ylabel("performance index")
    ax.set_ylim(0.0, 1.0)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _cmd_score(args) -> int:
    path = Path(args.tape)
    events = tape.loads(path.read_text())
    level = default_level(trial_time_s=args.theta_s, trials_per_session=args.trials)
    if args.session_cap is not None:
        level = replace(level, max_time_s=args.session_cap)
    record, report = replay_tape(events, level, session_id=path.stem, patient_id="tape")
    doc = documents.report_to_doc(report, session_id=record.session_id, patient_id=record.patient_id)
    print(documents.dumps(doc), end="")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_config

    cfg = load_config(args.config)
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return 0


def _cmd_plan_add(args) -> int:
    doc = documents.loads(Path(args.file).read_text())
    plan = documents.plan_from_doc(doc)
    violations = validate_plan(plan)
    if violations:
        for v in violations:
            print(f"{v.path}: {v.message}", file=sys.stderr)
        return 2
    store = DocumentStore(args.store)
    store.put_plan(plan)
    print(f"stored plan {plan.plan_id}")
    return 0


def _cmd_plan_show(args) -> int:
    store = DocumentStore(args.store)
    plan = store.get_plan(args.plan_id)
    print(documents.dumps(documents.plan_to_doc(plan)), end="")
    return 0


def _cmd_export(args) -> int:
    store = DocumentStore(args.store)
    store.get_patient(args.patient)  # fail early on unknown ids
    rows = store.list_reports(args.patient)
    patient_label = args.patient
    if args.pseudonymize:
        digest = hashlib.sha256(args.patient.encode()).hexdigest()[:12]
        patient_label = f"p-{digest}"
    target = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["session_id", "patient"] + csv_header())
        for report, session_id, _pid, _prog in rows:
            writer.writerow([session_id, patient_label] + csv_row(report))
    finally:
        if args.out:
            target.close()
    return 0


def _cmd_layout(args) -> int:
    if args.count < 1 or args.trial < 1:
        print("count and trial must be positive", file=sys.stderr)
        return 2
    level = default_level()
    out = []
    for seed in range(args.seed, args.seed + args.count):
        placed = place_objects(level, seed, args.trial)
        out.append(
            {
                "seed": seed,
                "trial": args.trial,
                "objects": [
                    {
                        "shape": p.shape,
                        "is_target": p.is_target,
                        "visibility_order": p.visibility_order,
                        "x": p.x,
                        "y": p.y,
                        "radius": p.radius,
                    }
                    for p in placed
                ],
            }
        )
    body = json.dumps(out, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(body)
    else:
        print(body, end="")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
