# fourthdown/core/errors.py
"""
Error hierarchy shared by every module.

Each error carries a machine-readable ``code`` (e.g. ``COORD_OUT_OF_RANGE``)
and a ``details`` dict so the CLI can emit a JSON error document and map
the failure onto an exit code.
"""

from typing import Any, Dict, Optional


class FourthDownError(Exception):
    exit_code = 1

    def __init__(self, code: str, message: str = "", details: Optional[Dict[str, Any]] = None):
        self.code = code
        self.message = message or code
        self.details = details or {}
        super().__init__(f"{code}: {self.message}")

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "message": self.message, "details": self.details}


class ValidationError(FourthDownError):
    """Input violates a domain rule (bad coordinates, bad config values...)."""
    exit_code = 2


class ConfigError(ValidationError):
    exit_code = 2


class DataError(FourthDownError):
    """Data is present but unusable for the requested analysis."""
    exit_code = 3


class VerificationError(FourthDownError):
    exit_code = 4
