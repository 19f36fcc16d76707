# fourthdown/core/validation.py
import logging
from typing import Optional

import numpy as np
import pandas as pd

from .errors import ValidationError
from .types import COORD_TOL, FIELD_LENGTH, FIELD_WIDTH, GRID_SCALE, TrackingFrame

logger = logging.getLogger(__name__)

FRAME_SPACING = 0.1
FRAME_SPACING_TOL = 0.02


def validate_frame(frame: TrackingFrame, predecessor: Optional[TrackingFrame] = None) -> TrackingFrame:
    """
    Check one frame against the field bounds and, when the previous frame of
    the same track is given, against the 10 Hz spacing contract.
    Returns the frame untouched or raises ValidationError with the rule code.
    """
    if not frame.point.in_bounds():
        raise ValidationError(
            "COORD_OUT_OF_RANGE",
            f"({frame.point.x}, {frame.point.y}) outside [0, {FIELD_LENGTH}] x [0, {FIELD_WIDTH:.4f}]",
            {"play_key": [frame.game_id, frame.play_id], "entity_id": frame.entity_id, "frame_index": frame.frame_index},
        )
    if frame.direction is not None and not (0.0 <= frame.direction < 360.0):
        raise ValidationError("BAD_DIRECTION", f"direction {frame.direction} not in [0, 360)")

    if predecessor is not None:
        if frame.frame_index <= predecessor.frame_index:
            raise ValidationError(
                "BAD_FRAME_SPACING",
                f"frame_index {frame.frame_index} does not follow {predecessor.frame_index}",
            )
        gap = frame.timestamp - predecessor.timestamp
        if abs(gap - FRAME_SPACING) > FRAME_SPACING_TOL + 1e-12:
            raise ValidationError(
                "BAD_FRAME_SPACING",
                f"{gap:.3f}s between frames {predecessor.frame_index} and {frame.frame_index}",
                {"entity_id": frame.entity_id},
            )
    return frame


def snap_array(values):
    """Vectorised snap onto the coordinate grid; NaN stays NaN."""
    if not isinstance(values, (pd.Series, pd.DataFrame, np.ndarray)):
        values = np.asarray(values, dtype=float)
    return np.round(values * GRID_SCALE) / GRID_SCALE


def out_of_range_mask(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    bad = (x < -COORD_TOL) | (x > FIELD_LENGTH + COORD_TOL) | (y < -COORD_TOL) | (y > FIELD_WIDTH + COORD_TOL)
    return bad | ~np.isfinite(x) | ~np.isfinite(y)


def spacing_violations(frames: pd.DataFrame) -> pd.Series:
    """
    Boolean mask over a sorted frame table (columns game_id, play_id,
    entity_id, frame_index, timestamp) flagging frames whose gap to their
    predecessor breaks the 10 Hz contract or whose index does not increase.
    """
    keys = ["game_id", "play_id", "entity_id"]
    same_track = (frames[keys] == frames[keys].shift()).all(axis=1)
    gap = frames["timestamp"].diff()
    step = frames["frame_index"].diff()
    bad = same_track & (((gap - FRAME_SPACING).abs() > FRAME_SPACING_TOL + 1e-12) | (step <= 0))
    return bad
