"""Exception hierarchy. Every error carries a JSON-friendly ``witness``."""
from __future__ import annotations

from typing import Any


class LocaleForgeError(Exception):
    """Base class; ``witness`` locates the failure."""

    kind = "error"

    def __init__(self, message: str = "", witness: Any = None):
        super().__init__(message or self.kind)
        self.witness = witness


class MalformedInput(LocaleForgeError):
    kind = "malformed-input"


class MalformedTables(MalformedInput):
    kind = "malformed-tables"

    def __init__(self, violations: list, message: str = ""):
        super().__init__(message or f"{len(violations)} table violation(s)", violations)
        self.violations = violations


class NotAFunctor(MalformedInput):
    kind = "not-a-functor"


class TargetMismatch(MalformedInput):
    kind = "target-mismatch"


class NotAPoset(MalformedInput):
    kind = "not-a-poset"


class NotALattice(MalformedInput):
    kind = "not-a-lattice"


class NotDistributive(MalformedInput):
    kind = "not-distributive"


class NotAHom(MalformedInput):
    kind = "not-a-hom"


class NoLeftAdjoint(LocaleForgeError):
    kind = "no-left-adjoint"


class NotOpen(LocaleForgeError):
    kind = "not-open"


class TopologyError(MalformedInput):
    kind = "not-a-topology"


class NotMaximal(TopologyError):
    kind = "not-maximal"


class NotStable(TopologyError):
    kind = "not-stable"


class NotTransitive(TopologyError):
    kind = "not-transitive"


class NotFunctorial(MalformedInput):
    kind = "not-functorial"


class NotAnAction(NotFunctorial):
    kind = "not-an-action"


class NotInternalLocale(LocaleForgeError):
    kind = "not-internal-locale"


class NotNatural(LocaleForgeError):
    kind = "not-natural"


class NotAdjointNatural(LocaleForgeError):
    kind = "not-adjoint-natural"


class NotANucleus(LocaleForgeError):
    kind = "not-a-nucleus"


class MissingTerminal(MalformedInput):
    kind = "missing-terminal"


class NotCartesianLift(LocaleForgeError):
    kind = "not-cartesian-lift"


class CoverLiftFail(LocaleForgeError):
    kind = "cover-lift-fail"


class BudgetExceeded(LocaleForgeError):
    kind = "budget-exceeded"


class InternalInconsistency(LocaleForgeError):
    """Two routes that must agree did not. Always a bug, never bad input."""

    kind = "internal-inconsistency"


class UnsupportedDocument(MalformedInput):
    kind = "unsupported-document"
