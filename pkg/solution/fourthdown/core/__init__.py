# fourthdown/core/__init__.py
from .errors import ConfigError, DataError, FourthDownError, ValidationError, VerificationError
from .types import (
    BALL,
    FIELD_LENGTH,
    FIELD_WIDTH,
    FIELD_WIDTH_EXACT,
    AnalysisMode,
    Direction,
    FieldPoint,
    GoDecision,
    PlayKey,
    PlayRecord,
    PlayType,
    PreciseYardage,
    TrackingFrame,
    YardageSource,
)
from .validation import validate_frame

__all__ = [
    "BALL", "FIELD_LENGTH", "FIELD_WIDTH", "FIELD_WIDTH_EXACT",
    "AnalysisMode", "Direction", "FieldPoint", "GoDecision", "PlayKey", "PlayRecord",
    "PlayType", "PreciseYardage", "TrackingFrame", "YardageSource",
    "ConfigError", "DataError", "FourthDownError", "ValidationError", "VerificationError",
    "validate_frame",
]
