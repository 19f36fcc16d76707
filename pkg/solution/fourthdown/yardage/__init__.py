# fourthdown/yardage/__init__.py
from .compute import YardageResult, compute_yardage, game_yardage, yardage_table
from .density import DensityCurves, distance_density
from .distance import (
    Derivation,
    SeriesContext,
    bucket_center,
    integer_bucket,
    line_to_gain,
    precise_distance,
    split_series,
)

__all__ = [
    "Derivation", "DensityCurves", "SeriesContext", "YardageResult",
    "bucket_center", "compute_yardage", "distance_density", "game_yardage", "integer_bucket",
    "line_to_gain", "precise_distance", "split_series", "yardage_table",
]
