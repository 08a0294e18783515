"""Exception hierarchy shared by every module.

The command line front end maps these onto exit codes, so the split matters:
``InputError`` is a malformed request (exit 2), ``Indeterminate`` means a
search budget ran out (exit 3), and the remaining classes describe a
validated negative or a structured failure of a construction (exit 1).
"""

from __future__ import annotations

from typing import Any


class HamRobustError(Exception):
    """Base class; carries an optional ``step`` tag and a details mapping."""

    def __init__(self, message: str, *, step: str | None = None, **details: Any):
        super().__init__(message)
        self.step = step
        self.details = details

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"error": type(self).__name__, "message": str(self)}
        if self.step is not None:
            out["step"] = self.step
        if self.details:
            out["details"] = {k: _jsonable(v) for k, v in sorted(self.details.items())}
        return out


class InputError(HamRobustError, ValueError):
    """Malformed input: bad vertex ids, unparsable files, inconsistent sizes."""


class PreconditionError(HamRobustError):
    """A documented hypothesis of an operation does not hold for the input."""


class ConstructionError(HamRobustError):
    """A generator could not realise the requested object."""


class RefinementError(HamRobustError):
    """Partition refinement ended with a violated degree condition."""


class SearchFailure(HamRobustError):
    """An exhaustive search finished and found nothing (a definitive negative)."""


class StepFailure(HamRobustError):
    """A named sub-step of a builder was infeasible on this instance."""


class Indeterminate(HamRobustError):
    """A budgeted search stopped before reaching a verdict."""


def _jsonable(value: Any) -> Any:
    if isinstance(value, (set, frozenset)):
        return sorted(_jsonable(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)
