"""Named-condition reports returned by every validator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .errors import _jsonable


@dataclass
class Report:
    """An ordered set of named boolean conditions plus free-form witnesses.

    ``holds`` is the conjunction of all conditions; ``failed`` lists the names
    of the ones that do not hold, in insertion order.
    """

    kind: str
    conditions: dict[str, bool] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, ok: bool, /, **details: Any) -> bool:
        self.conditions[name] = bool(ok)
        for key, val in details.items():
            self.details[f"{name}.{key}"] = val
        return bool(ok)

    @property
    def holds(self) -> bool:
        return all(self.conditions.values())

    @property
    def failed(self) -> list[str]:
        return [name for name, ok in self.conditions.items() if not ok]

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "holds": self.holds,
            "conditions": dict(self.conditions),
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }
