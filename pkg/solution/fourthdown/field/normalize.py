# fourthdown/field/normalize.py
"""
Direction normalization: after it every offense moves toward increasing x.

Coordinates are stored on the binary grid of ``core.types``; on that grid
the flip needs no rounding and applying it twice returns the input exactly.
"""

import logging
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd

from ..core.errors import DataError
from ..core.types import FIELD_LENGTH, FLIP_WIDTH, Direction, PlayKey, TrackingFrame
from ..ingest.assemble import GameDataset
from .direction import StadiumConvention, infer_offense_direction

logger = logging.getLogger(__name__)

Frames = Union[pd.DataFrame, Sequence[TrackingFrame]]


def _flip_direction(direction):
    return (direction + 180.0) % 360.0


def flip_frame(frame: TrackingFrame) -> TrackingFrame:
    """Rotate a frame 180 degrees about the field center."""
    direction = None if frame.direction is None else _flip_direction(frame.direction)
    return TrackingFrame(
        game_id=frame.game_id,
        play_id=frame.play_id,
        entity_id=frame.entity_id,
        frame_index=frame.frame_index,
        timestamp=frame.timestamp,
        point=type(frame.point)(FIELD_LENGTH - frame.point.x, FLIP_WIDTH - frame.point.y),
        speed=frame.speed,
        direction=direction,
        event=frame.event,
    )


def flip_frames(frames: pd.DataFrame) -> pd.DataFrame:
    out = frames.copy()
    out["x"] = FIELD_LENGTH - frames["x"]
    out["y"] = FLIP_WIDTH - frames["y"]
    if "direction" in frames.columns:
        out["direction"] = _flip_direction(frames["direction"])
    return out


def normalize_play_direction(frames: Frames, offense_direction: Direction) -> Frames:
    if offense_direction == Direction.RIGHT:
        return frames.copy() if isinstance(frames, pd.DataFrame) else list(frames)
    if isinstance(frames, pd.DataFrame):
        return flip_frames(frames)
    return [flip_frame(f) for f in frames]


def standardize_to_los(frames: Frames, los_x: float) -> Frames:
    """Shift x so the line of scrimmage sits at 0. Not idempotent."""
    if isinstance(frames, pd.DataFrame):
        out = frames.copy()
        out["x"] = frames["x"] - los_x
        return out
    return [f.with_point(f.point.x - los_x, f.point.y) for f in frames]


def normalize_dataset(dataset: GameDataset, convention: Optional[StadiumConvention] = None) -> GameDataset:
    """
    Direction-normalize every tracked play of a GameDataset.
    Plays whose direction cannot be decided keep raw coordinates and are
    listed under the DIRECTION_UNKNOWN flag.
    """
    directions: Dict[PlayKey, Direction] = {}
    methods: Dict[str, int] = {}
    unknown: List[str] = []
    parts = []
    frames = dataset.frames
    tracked = dataset.tracked_play_ids()
    for play in dataset.plays:
        if play.play_id not in tracked:
            continue
        play_frames = dataset.play_frames(play.play_id)
        try:
            direction, method = infer_offense_direction(
                play, dataset.ball_track(play.play_id), dataset.directions.get(play.key), convention
            )
        except DataError as exc:
            if exc.code != "DIRECTION_UNKNOWN":
                raise
            unknown.append(play.play_id)
            parts.append(play_frames)
            continue
        directions[play.key] = direction
        methods[method] = methods.get(method, 0) + 1
        parts.append(flip_frames(play_frames) if direction == Direction.LEFT else play_frames)

    normalized = pd.concat(parts, ignore_index=True) if parts else frames.iloc[0:0]
    flags = {k: list(v) for k, v in dataset.flags.items()}
    if unknown:
        flags["DIRECTION_UNKNOWN"] = unknown
        logger.warning("game %s: direction unknown for %d plays", dataset.game_id, len(unknown))
    flags["direction_methods"] = [f"{k}={v}" for k, v in sorted(methods.items())]

    # per-play blocks keep their order, so the track index is unchanged
    return GameDataset(
        game_meta=dataset.game_meta,
        plays=dataset.plays,
        frames=normalized,
        track_index=dict(dataset.track_index),
        directions=directions,
        flags=flags,
    )


def speed_calibration_metadata(seasons: Sequence[int]) -> Dict:
    """Seasons present in a run; tracking speeds are recalibrated per season and not corrected here."""
    present = sorted({int(s) for s in seasons if s})
    return {"seasons": present, "speed_calibration_varies": len(present) > 1}
