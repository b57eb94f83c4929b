"""Performance measures computed from one finalized session.

Counts: C correct, OE omission errors, CE commission errors, K uncompleted,
I = OE + CE, T = C + I + K. Factors are fractions in [0, 1]; the convention
for a session with no responded trials (C + I = 0) is that every factor and
the performance index are 0.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, fields

from .errors import UndefinedStatisticError
from .model import Commission, Correct, Omission, SessionRecord


@dataclass(frozen=True, slots=True)
class Tally:
    t: int
    c: int
    oe: int
    ce: int
    i: int
    k: int


def tally(session: SessionRecord) -> Tally:
    """Count trial outcomes; t = c + i + k and i = oe + ce by construction."""
    c = oe = ce = k = 0
    for trial in session.trials:
        out = trial.outcome
        if isinstance(out, Correct):
            c += 1
        elif isinstance(out, Omission):
            oe += 1
        elif isinstance(out, Commission):
            ce += 1
        else:
            k += 1
    return Tally(t=len(session.trials), c=c, oe=oe, ce=ce, i=oe + ce, k=k)


def correct_crts(session: SessionRecord) -> list[float]:
    """Correct response times in trial order."""
    return [t.outcome.crt_s for t in session.trials if isinstance(t.outcome, Correct)]


def mean_crt(crts: list[float]) -> float:
    if not crts:
        raise UndefinedStatisticError("mean response time undefined: no correct tries")
    return statistics.fmean(crts)


def sd_crt(crts: list[float]) -> float:
    """Sample standard deviation (divisor n-1); a single try has spread 0."""
    if not crts:
        raise UndefinedStatisticError("response time spread undefined: no correct tries")
    if len(crts) == 1:
        return 0.0
    return statistics.stdev(crts)


def engagement_factor(c: int, i: int, t: int) -> float:
    """Share of trials the patient actually answered, right or wrong."""
    if t < 1:
        raise ValueError("a session has at least one trial")
    return (c + i) / t


def inattention_factor(oe: int, c: int, i: int) -> float:
    return oe / (c + i) if c + i else 0.0


def impulsivity_factor(ce: int, c: int, i: int) -> float:
    return ce / (c + i) if c + i else 0.0


def error_factor(oe: int, ce: int, c: int, i: int) -> float:
    """Errors per responded trial; equals IAF + IMF."""
    return (oe + ce) / (c + i) if c + i else 0.0


def correct_response_factor(crts: list[float], c: int, theta_s: float) -> float:
    """Mean correct response time as a fraction of the trial window."""
    if len(crts) != c:
        raise ValueError("crt list does not match the correct count")
    if c == 0:
        return 0.0
    return sum(crts) / (c * theta_s)


def performance_index(crf: float, ef: float, gf: float) -> float:
    """Overall session score: speed and accuracy averaged, scaled by engagement."""
    return ((1.0 - crf) + (1.0 - ef)) / 2.0 * gf


@dataclass(frozen=True, slots=True)
class MetricsReport:
    """Flat scoring summary for one session; field order is the CSV order."""

    t: int
    c: int
    i: int
    k: int
    oe: int
    ce: int
    m_s: float | None
    sd_s: float | None
    gf: float
    iaf: float
    imf: float
    ef: float
    crf: float
    pi: float
    theta_s: float
    gt_s: float
    st_s: float

    @property
    def gt_over_st(self) -> float:
        """Share of the session cap actually used."""
        return self.gt_s / self.st_s


METRIC_FIELDS: tuple[str, ...] = tuple(f.name for f in fields(MetricsReport))


def compute_report(session: SessionRecord) -> MetricsReport:
    """Score one finalized session."""
    counts = tally(session)
    crts = correct_crts(session)
    m = mean_crt(crts) if counts.c else None
    sd = sd_crt(crts) if counts.c else None
    gf = engagement_factor(counts.c, counts.i, counts.t)
    iaf = inattention_factor(counts.oe, counts.c, counts.i)
    imf = impulsivity_factor(counts.ce, counts.c, counts.i)
    ef = error_factor(counts.oe, counts.ce, counts.c, counts.i)
    crf = correct_response_factor(crts, counts.c, session.theta_s)
    pi = performance_index(crf, ef, gf)
    return MetricsReport(
        t=counts.t,
        c=counts.c,
        i=counts.i,
        k=counts.k,
        oe=counts.oe,
        ce=counts.ce,
        m_s=m,
        sd_s=sd,
        gf=gf,
        iaf=iaf,
        imf=imf,
        ef=ef,
        crf=crf,
        pi=pi,
        theta_s=session.theta_s,
        gt_s=session.gt_s,
        st_s=session.st_s,
    )


def csv_header() -> list[str]:
    return list(METRIC_FIELDS)


def csv_row(report: MetricsReport) -> list[str]:
    """One session per row; floats keep full round-trip precision."""
    out: list[str] = []
    for name in METRIC_FIELDS:
        value = getattr(report, name)
        if value is None:
            out.append("")
        elif isinstance(value, float):
            out.append(repr(value))
        else:
            out.append(str(value))
    return out
