"""Finite verification of internal locales over presheaf toposes."""
from .errors import LocaleForgeError
from .verdict import Verdict

__version__ = "0.1.0"
__all__ = ["LocaleForgeError", "Verdict", "__version__"]
