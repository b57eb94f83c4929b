"""Shared builders and oracles for tests: no engine involved."""

from __future__ import annotations

from dropball.model import (
    Commission,
    Correct,
    Omission,
    SessionRecord,
    TrialRecord,
    Uncompleted,
)


def naive_recount(tape, theta=60.0, trials_total=10):
    """Independent single-pass classifier over a well-formed tape."""
    counts = {"c": 0, "oe": 0, "ce": 0, "k": 0}
    crts = []
    start = 0.0
    done = 0
    for event in tape:
        # close any window the event time has fully passed
        while done < trials_total and event.at_s > start + theta:
            counts["oe"] += 1
            start += theta
            done += 1
        if done >= trials_total:
            break
        name = type(event).__name__
        if name == "TargetHit":
            counts["c"] += 1
            crts.append(event.at_s - start)
            start = event.at_s
            done += 1
        elif name == "NonTargetHit":
            counts["ce"] += 1
            start = event.at_s
            done += 1
        elif name == "TrialTimeout":
            counts["oe"] += 1
            start += theta
            done += 1
        else:  # PlayerQuit
            counts["k"] += trials_total - done
            done = trials_total
    counts["k"] += trials_total - done
    return counts, crts


def make_session(
    crts: list[float],
    oe: int = 0,
    ce: int = 0,
    k: int = 0,
    *,
    theta: float = 60.0,
    trials_total: int | None = None,
    commission_elapsed: float = 20.0,
    session_id: str = "s-test",
    patient_id: str = "p-test",
) -> SessionRecord:
    """Build a record directly: correct trials first, then errors, then quits."""
    trials = []
    t = 0.0
    index = 1
    for crt in crts:
        trials.append(TrialRecord(index, Correct(crt_s=crt), t, t + crt))
        t += crt
        index += 1
    for _ in range(oe):
        trials.append(TrialRecord(index, Omission(), t, t + theta))
        t += theta
        index += 1
    for _ in range(ce):
        trials.append(TrialRecord(index, Commission(elapsed_s=commission_elapsed), t, t + commission_elapsed))
        t += commission_elapsed
        index += 1
    for _ in range(k):
        trials.append(TrialRecord(index, Uncompleted(), t, t))
        index += 1
    total = trials_total if trials_total is not None else len(trials)
    assert len(trials) == total, "counts must fill the session"
    return SessionRecord(
        session_id=session_id,
        patient_id=patient_id,
        level_index=1,
        trials=tuple(trials),
        theta_s=theta,
        gt_s=t,
        st_s=theta * total,
    )
