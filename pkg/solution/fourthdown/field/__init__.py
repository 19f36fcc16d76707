# fourthdown/field/__init__.py
from .direction import StadiumConvention, has_snap_event, infer_offense_direction, snap_frame
from .kinematics import SpeedSummary, compute_kinematics, frame_kinematics, max_speed
from .normalize import (
    flip_frame,
    flip_frames,
    normalize_dataset,
    normalize_play_direction,
    speed_calibration_metadata,
    standardize_to_los,
)

__all__ = [
    "StadiumConvention", "SpeedSummary",
    "compute_kinematics", "flip_frame", "flip_frames", "frame_kinematics", "has_snap_event",
    "infer_offense_direction", "max_speed", "normalize_dataset", "normalize_play_direction",
    "snap_frame", "speed_calibration_metadata", "standardize_to_los",
]
