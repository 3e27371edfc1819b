"""Budgets for the exponential enumerations, adjustable per call site or per run."""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, replace

from .errors import BudgetExceeded


@dataclass(frozen=True)
class Limits:
    arrows: int = 20_000       # size of any derived category
    sieves: int = 2 ** 16      # sieves enumerated per object
    maps: int = 200_000        # candidate maps tried by brute-force enumerations
    oracle: str = "auto"       # always | auto | never


_current = contextvars.ContextVar("locale_forge_limits", default=Limits())


def current() -> Limits:
    return _current.get()


@contextlib.contextmanager
def limits(**overrides):
    token = _current.set(replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)


def guard(count: int, which: str, what: str = "") -> None:
    cap = getattr(current(), which)
    if count > cap:
        raise BudgetExceeded(f"{what or which}: {count} exceeds budget {cap}",
                             {"budget": which, "cap": cap, "count": count})
