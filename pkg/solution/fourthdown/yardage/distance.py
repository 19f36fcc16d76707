# fourthdown/yardage/distance.py
"""
Line to gain and precise fourth-down distance.

All coordinates are direction-normalized: the offense attacks increasing
x and the opponent's goal line sits at x = 110.
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from ..core.errors import ValidationError
from ..core.types import GOAL_LINE_X, OWN_GOAL_X, PlayRecord, PreciseYardage, YardageSource
from ..field.direction import snap_frame

logger = logging.getLogger(__name__)

SERIES_LENGTH = 10.0


class Derivation(str, enum.Enum):
    FIRST_DOWN_BALL = "FIRST_DOWN_BALL"
    GOAL_LINE = "GOAL_LINE"
    FALLBACK = "FALLBACK"


@dataclass(frozen=True)
class SeriesContext:
    series_id: str
    line_to_gain_x: float
    goal_to_go: bool
    derivation: Derivation
    first_down_play_id: Optional[str] = None

    def __post_init__(self):
        if self.goal_to_go and self.line_to_gain_x != GOAL_LINE_X:
            raise ValueError("a goal-to-go series gains the goal line")


def integer_bucket(yards: float) -> int:
    """Play-by-play distance label: everything short of 2 yards is a 4th-and-1."""
    if yards < 0 or math.isnan(yards):
        raise ValidationError("NEGATIVE_YARDS", f"yards must be >= 0, got {yards}")
    return 1 if yards < 2 else int(math.floor(yards))


def bucket_center(bucket: int) -> float:
    return 1.0 if bucket == 1 else bucket + 0.5


def _series_goal_to_go(plays: Sequence[PlayRecord]) -> bool:
    return any(p.goal_to_go for p in plays)


def line_to_gain(series_plays: Sequence[PlayRecord],
                 ball_tracks: dict) -> SeriesContext:
    """
    series_plays: the plays of one series in game order.
    ball_tracks: play_id -> direction-normalized ball track (missing or
    empty when the play has no usable ball track).
    """
    if not series_plays:
        raise ValidationError("EMPTY_SERIES", "series has no plays")
    series_id = series_plays[0].series_id
    first_down = next((p for p in series_plays if p.down == 1), None)

    if _series_goal_to_go(series_plays):
        return SeriesContext(series_id, GOAL_LINE_X, True, Derivation.GOAL_LINE,
                             first_down.play_id if first_down else None)

    track = ball_tracks.get(first_down.play_id) if first_down is not None else None
    snap = snap_frame(track) if track is not None else None
    if snap is not None:
        ltg = float(snap["x"]) + SERIES_LENGTH
        if ltg >= GOAL_LINE_X:
            return SeriesContext(series_id, GOAL_LINE_X, True, Derivation.GOAL_LINE, first_down.play_id)
        return SeriesContext(series_id, ltg, False, Derivation.FIRST_DOWN_BALL, first_down.play_id)

    # NO_FIRST_DOWN_SNAP: every play-by-play row of the series points at the same line
    anchor = first_down or series_plays[0]
    ltg = OWN_GOAL_X + anchor.yardline_from_own_goal + anchor.yards_to_go_integer
    logger.debug("series %s: no first-down snap, play-by-play line %.1f", series_id, ltg)
    if ltg >= GOAL_LINE_X:
        return SeriesContext(series_id, GOAL_LINE_X, True, Derivation.FALLBACK,
                             first_down.play_id if first_down else None)
    return SeriesContext(series_id, float(ltg), False, Derivation.FALLBACK,
                         first_down.play_id if first_down else None)


def precise_distance(play: PlayRecord, context: SeriesContext,
                     ball_track: Optional[pd.DataFrame]) -> PreciseYardage:
    """Yards from the fourth-down snap spot to the line to gain."""
    snap = snap_frame(ball_track) if ball_track is not None else None
    if snap is None:
        return PreciseYardage(
            play_key=play.key,
            yards=bucket_center(play.yards_to_go_integer),
            source=YardageSource.FALLBACK_INTEGER,
            bucket=play.yards_to_go_integer,
            flags=("NO_FOURTH_DOWN_SNAP",),
        )

    flags: List[str] = []
    if context.derivation == Derivation.FALLBACK:
        # measured against the play-by-play line to gain
        flags.append("NO_FIRST_DOWN_SNAP")
    raw = context.line_to_gain_x - float(snap["x"])
    yards = raw
    if raw < 0:
        yards = 0.0
        flags.append("ANOMALY_NEGATIVE")
    if not context.goal_to_go and context.derivation == Derivation.FIRST_DOWN_BALL and yards > SERIES_LENGTH:
        flags.append("ANOMALY_EXCEEDS_SERIES")
    bucket = integer_bucket(yards)
    if bucket != play.yards_to_go_integer:
        flags.append("BUCKET_MISMATCH")
    return PreciseYardage(play.key, yards, YardageSource.TRACKING_BALL, bucket, tuple(flags))


def split_series(plays: Sequence[PlayRecord]) -> List[Tuple[str, List[PlayRecord]]]:
    """Group plays (already in game order) by series id, keeping first-seen order."""
    groups = {}
    for p in plays:
        groups.setdefault(p.series_id, []).append(p)
    return list(groups.items())
