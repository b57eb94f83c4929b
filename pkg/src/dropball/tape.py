"""Line-delimited event tapes.

One event per line: ``kind at_s [x y]``. Kinds are target_hit,
non_target_hit, trial_timeout, player_quit; position is only meaningful on
the two hit kinds. Floats are written with repr so a dumped tape replays
bit-exact. Blank lines and ``#`` comments are ignored; parse errors carry
1-based line numbers.
"""

from __future__ import annotations

from typing import IO, Iterable

from .engine import NonTargetHit, PlayerQuit, SessionEvent, TargetHit, TrialTimeout
from .errors import TapeError

_KIND_NAMES = {
    TargetHit: "target_hit",
    NonTargetHit: "non_target_hit",
    TrialTimeout: "trial_timeout",
    PlayerQuit: "player_quit",
}


def format_event(event: SessionEvent) -> str:
    parts = [_KIND_NAMES[type(event)], repr(event.at_s)]
    position = getattr(event, "position", None)
    if position is not None:
        parts.append(repr(position[0]))
        parts.append(repr(position[1]))
    return " ".join(parts)


def parse_line(line: str, line_no: int) -> SessionEvent | None:
    """Parse one tape line; returns None for blanks and comments."""
    text = line.strip()
    if not text or text.startswith("#"):
        return None
    parts = text.split()
    kind = parts[0]
    if len(parts) < 2:
        raise TapeError(f"event '{kind}' is missing its timestamp", line_no)
    try:
        at_s = float(parts[1])
    except ValueError:
        raise TapeError(f"bad timestamp {parts[1]!r}", line_no) from None
    if at_s < 0:
        raise TapeError("negative timestamp", line_no)
    position: tuple[float, float] | None = None
    if len(parts) > 2:
        if len(parts) != 4:
            raise TapeError("position takes exactly two coordinates", line_no)
        try:
            position = (float(parts[2]), float(parts[3]))
        except ValueError:
            raise TapeError("bad position coordinates", line_no) from None
    if kind == "target_hit":
        return TargetHit(at_s=at_s, position=position)
    if kind == "non_target_hit":
        return NonTargetHit(at_s=at_s, position=position)
    if position is not None:
        raise TapeError(f"event '{kind}' does not carry a position", line_no)
    if kind == "trial_timeout":
        return TrialTimeout(at_s=at_s)
    if kind == "player_quit":
        return PlayerQuit(at_s=at_s)
    raise TapeError(f"unknown event kind {kind!r}", line_no)


def loads(text: str) -> list[SessionEvent]:
    events: list[SessionEvent] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        event = parse_line(line, line_no)
        if event is not None:
            events.append(event)
    return events


def load(fp: IO[str]) -> list[SessionEvent]:
    return loads(fp.read())


def dumps(events: Iterable[SessionEvent]) -> str:
    return "".join(format_event(e) + "\n" for e in events)


def dump(events: Iterable[SessionEvent], fp: IO[str]) -> None:
    fp.write(dumps(events))
