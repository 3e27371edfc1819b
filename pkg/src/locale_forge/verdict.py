from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Verdict:
    """Outcome of a check. ``ok`` is None when the check could not be decided."""

    ok: bool | None
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    flagged: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.ok)

    @property
    def status(self) -> str:
        if self.ok is None:
            return "budget-exceeded" if "budget" in self.flagged else "inapplicable"
        return "pass" if self.ok else "fail"

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"verdict": self.status, "witnesses": self.witnesses}
        if self.details:
            out["details"] = self.details
        if self.flagged:
            out["flagged"] = self.flagged
        return out
