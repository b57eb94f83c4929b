"""Exception types shared across the package.

Each class marks one contract failure the service layer maps to a distinct
HTTP status, so keep them narrow.
"""

from __future__ import annotations


class DropballError(Exception):
    """Base class for all package errors."""


class SessionShapeError(DropballError):
    """Raw trial list cannot be normalized into a valid session record."""


class UnknownLevelError(DropballError):
    """Level index outside the plan's game."""


class PlanMismatchError(DropballError):
    """Patient state is inconsistent with the plan it is paired with."""


class StateError(DropballError):
    """Operation applied in the wrong engine phase (e.g. event after end)."""


class TimeRegressionError(DropballError):
    """Event timestamp moved backwards on the virtual clock."""


class PrematureTimeoutError(DropballError):
    """Timeout event arrived before the trial window elapsed."""


class PlacementError(DropballError):
    """Object layout cannot satisfy bounds plus separation."""


class TapeError(DropballError):
    """Malformed event tape line."""

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message)
        self.line_no = line_no

    def __str__(self) -> str:
        base = super().__str__()
        if self.line_no is None:
            return base
        return f"line {self.line_no}: {base}"


class DocumentError(DropballError):
    """Structured document failed to parse; path points at the bad field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class SchemaVersionError(DocumentError):
    """Document schema_version is missing or unsupported."""

    def __init__(self, message: str):
        super().__init__("schema_version", message)


class StoreError(DropballError):
    """Base class for document store failures."""


class UnknownIdError(StoreError):
    """Document id not present in its collection."""


class DuplicateIdError(StoreError):
    """Write would overwrite an append-only document."""


class ReferentialError(StoreError):
    """Document references an id that does not exist."""


class InvalidDocumentError(StoreError):
    """Document failed core-model validation on write."""

    def __init__(self, violations):
        lines = "; ".join(f"{v.path}: {v.message}" for v in violations)
        super().__init__(lines or "invalid document")
        self.violations = list(violations)


class UndefinedStatisticError(DropballError):
    """Statistic has no value for the given inputs (e.g. mean of nothing)."""


class UnreachableTargetError(DropballError):
    """Schedule calibration target cannot be met inside the trial window."""


class InfeasiblePhaseError(DropballError):
    """Phase outcome counts do not fit the level's trial count."""
