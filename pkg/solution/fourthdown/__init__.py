# fourthdown/__init__.py
"""Fourth-down decision analysis on player-tracking data."""

from .config import AnalysisConfig, load_config
from .core.errors import ConfigError, DataError, FourthDownError, ValidationError, VerificationError

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "ConfigError", "DataError", "FourthDownError", "ValidationError",
    "VerificationError", "load_config",
]
