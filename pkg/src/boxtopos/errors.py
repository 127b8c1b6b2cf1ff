"""Exception hierarchy and the small diagnostic record returned by validators."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

DEFAULT_CAP = 20
CAP_ENV = "BOXTOPOS_CAP"


class BoxToposError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InputError(BoxToposError, ValueError):
    """Malformed or inconsistent input data."""


class ValidationError(InputError):
    """Input parsed fine but violates a structural law."""


class ShapeError(InputError):
    """Operation requires a presentation of a specific shape."""


class ResourceError(BoxToposError):
    """An enumeration would exceed the configured cap."""

    exit_code = 2

    def __init__(self, message: str, cap: int | None = None):
        super().__init__(message)
        self.cap = cap


def default_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None or raw == "":
        return DEFAULT_CAP
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{CAP_ENV} must be an integer, got {raw!r}") from None


def resolve_cap(cap: int | None) -> int:
    return default_cap() if cap is None else int(cap)


@dataclass
class Check:
    """Outcome of a validation routine.

    Truthy iff ``ok``. ``failed`` collects the names of the violated clauses so
    callers can compare which laws two independent validators rejected.
    """

    ok: bool = True
    messages: list[str] = field(default_factory=list)
    failed: set[str] = field(default_factory=set)

    def fail(self, clause: str, message: str) -> None:
        self.ok = False
        self.failed.add(clause)
        self.messages.append(f"{clause}: {message}")

    def __bool__(self) -> bool:
        return self.ok
