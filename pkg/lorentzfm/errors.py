"""Exception roots shared by every LorentzFM module.

Each family maps to a distinct process exit code so batch operators can
tell configuration mistakes from bad data and from numerical failures.
Modules define their own specific subclasses next to the code that
raises them.
"""

from __future__ import annotations


class LorentzFMError(Exception):
    """Base exception for all LorentzFM errors."""

    exit_code: int = 1


class ConfigError(LorentzFMError):
    """Raised when configuration is invalid or inconsistent."""

    exit_code = 2


class DataError(LorentzFMError):
    """Raised when input data or an on-disk artifact is unusable."""

    exit_code = 3


class NumericError(LorentzFMError):
    """Raised on non-finite values or manifold-constraint violations."""

    exit_code = 4
