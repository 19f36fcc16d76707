# fourthdown/field/kinematics.py
"""
Speed, acceleration, direction of motion and distance travelled from
positions. Derivatives use central differences with one-sided stencils at
the track ends (numpy.gradient).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..config import KinematicsConfig
from ..core.errors import ValidationError
from ..core.types import TrackingFrame

logger = logging.getLogger(__name__)

MIN_TRACK_FRAMES = 3
CONTACT_EVENTS = ("tackle", "first_contact")
KINEMATIC_COLUMNS = ["frame_index", "timestamp", "speed", "acceleration", "direction", "distance"]


@dataclass(frozen=True)
class SpeedSummary:
    max_speed: float
    max_speed_unfiltered: float
    excluded_frames: int


def _as_table(track: Union[pd.DataFrame, Sequence[TrackingFrame]]) -> pd.DataFrame:
    if isinstance(track, pd.DataFrame):
        return track
    return pd.DataFrame({
        "frame_index": [f.frame_index for f in track],
        "timestamp": [f.timestamp for f in track],
        "x": [f.point.x for f in track],
        "y": [f.point.y for f in track],
        "event": [f.event for f in track],
    })


def _moving_average(values: np.ndarray, window: int) -> np.ndarray:
    return pd.Series(values).rolling(window, center=True, min_periods=1).mean().to_numpy()


def compute_kinematics(track: Union[pd.DataFrame, Sequence[TrackingFrame]], smooth: bool = False,
                       window: int = 3) -> pd.DataFrame:
    """
    Per-frame speed (yd/s), acceleration (yd/s^2), direction of motion in
    degrees (0 = +y, 90 = +x) and cumulative distance travelled (yd).
    Direction is NaN on frames without displacement.
    """
    table = _as_table(track)
    if len(table) < MIN_TRACK_FRAMES:
        raise ValidationError("TRACK_TOO_SHORT", f"{len(table)} frames, need {MIN_TRACK_FRAMES}")

    t = table["timestamp"].to_numpy(dtype=float)
    x = table["x"].to_numpy(dtype=float)
    y = table["y"].to_numpy(dtype=float)

    vx = np.gradient(x, t, edge_order=2)
    vy = np.gradient(y, t, edge_order=2)
    speed = np.hypot(vx, vy)
    if smooth:
        speed = _moving_average(speed, window)
    acceleration = np.gradient(speed, t, edge_order=2)

    moving = speed > 1e-12
    direction = np.full(len(t), np.nan)
    direction[moving] = np.degrees(np.arctan2(vx[moving], vy[moving])) % 360.0

    steps = np.hypot(np.diff(x), np.diff(y))
    distance = np.concatenate([[0.0], np.cumsum(steps)])

    return pd.DataFrame({
        "frame_index": table["frame_index"].to_numpy(),
        "timestamp": t,
        "speed": speed,
        "acceleration": acceleration,
        "direction": direction,
        "distance": distance,
    })


def max_speed(track: Union[pd.DataFrame, Sequence[TrackingFrame]],
              exclude_events: Iterable[str] = CONTACT_EVENTS, window: float = 0.3,
              smooth: bool = False) -> SpeedSummary:
    """
    Track maximum speed with frames at or just after contact events left
    out; tracking speeds often peak while a player is being hit.
    """
    table = _as_table(track)
    kin = compute_kinematics(table, smooth=smooth)
    t = kin["timestamp"].to_numpy()
    events = set(exclude_events)
    contact_times = table.loc[table["event"].isin(events), "timestamp"].to_numpy(dtype=float)
    excluded = np.zeros(len(t), dtype=bool)
    for ct in contact_times:
        excluded |= (t >= ct - 1e-9) & (t <= ct + window + 1e-9)
    speeds = kin["speed"].to_numpy()
    kept = speeds[~excluded]
    return SpeedSummary(
        max_speed=float(kept.max()) if len(kept) else float("nan"),
        max_speed_unfiltered=float(speeds.max()),
        excluded_frames=int(excluded.sum()),
    )


def _track_block(args):
    key, track, config = args
    if len(track) < MIN_TRACK_FRAMES:
        return None
    kin = compute_kinematics(track, smooth=config.smooth_speed, window=config.window)
    kin.insert(0, "entity_id", key[2])
    kin.insert(0, "play_id", key[1])
    kin.insert(0, "game_id", key[0])
    return kin


def frame_kinematics(frames: pd.DataFrame, config: Optional[KinematicsConfig] = None,
                     workers: int = 1) -> pd.DataFrame:
    """Kinematics for every track of a frame table; tracks too short to differentiate are skipped."""
    config = config or KinematicsConfig()
    groups = [(key, df, config) for key, df in frames.groupby(["game_id", "play_id", "entity_id"], sort=False)]
    if workers > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_track_block, groups))
    else:
        blocks = [_track_block(g) for g in groups]
    skipped = sum(1 for b in blocks if b is None)
    if skipped:
        logger.info("%d tracks shorter than %d frames skipped", skipped, MIN_TRACK_FRAMES)
    kept = [b for b in blocks if b is not None]
    if not kept:
        return pd.DataFrame(columns=["game_id", "play_id", "entity_id"] + KINEMATIC_COLUMNS)
    return pd.concat(kept, ignore_index=True)
