# fourthdown/field/direction.py
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import pandas as pd

from ..core.errors import DataError
from ..core.types import GOAL_LINE_X, OWN_GOAL_X, Direction, PlayRecord

logger = logging.getLogger(__name__)

SNAP_EVENT = "ball_snap"
MIN_DISPLACEMENT = 0.5
# the snap spot must sit this much closer to one candidate yardline
YARDLINE_MARGIN = 4.0


def opposite(direction: Direction) -> Direction:
    return Direction.LEFT if direction == Direction.RIGHT else Direction.RIGHT


@dataclass(frozen=True)
class StadiumConvention:
    """
    Fixed-stadium fallback: the direction the home offense attacks in the
    first quarter. Teams change ends after the first and third quarters;
    overtime reuses the first-quarter orientation.
    """
    home_first_quarter: Direction = Direction.RIGHT

    def offense_direction(self, play: PlayRecord) -> Direction:
        home = self.home_first_quarter if play.quarter in (1, 4, 5) else opposite(self.home_first_quarter)
        return home if play.possession_team == play.home_team else opposite(home)


def snap_frame(track: pd.DataFrame) -> Optional[pd.Series]:
    """First frame carrying the snap event; None when the track has none."""
    if track is None or track.empty:
        return None
    snaps = track[track["event"] == SNAP_EVENT]
    return snaps.iloc[0] if len(snaps) else None


def has_snap_event(track: pd.DataFrame) -> bool:
    return track is not None and not track.empty and bool((track["event"] == SNAP_EVENT).any())


def _last_event_frame(track: pd.DataFrame) -> pd.Series:
    labelled = track[track["event"].notna() & (track["event"] != SNAP_EVENT)]
    return labelled.iloc[-1] if len(labelled) else track.iloc[-1]


def infer_offense_direction(play: PlayRecord, ball_track: Optional[pd.DataFrame],
                            explicit: Optional[Direction] = None,
                            convention: Optional[StadiumConvention] = None) -> Tuple[Direction, str]:
    """
    Decide which way the offense moves in raw stadium coordinates.

    Tried in order: the play's direction column, agreement of the snap spot
    with the play-by-play yardline, net ball displacement between the snap
    and the play's last event frame, the stadium convention.
    Returns (direction, method).
    """
    if explicit is not None:
        return explicit, "COLUMN"

    if ball_track is not None and not ball_track.empty:
        snap = snap_frame(ball_track)
        if snap is None:
            # no snap label: the first frame still anchors the yardline check
            snap = ball_track.iloc[0]
        snap_x = float(snap["x"])
        yl = play.yardline_from_own_goal
        off_right = abs(snap_x - (OWN_GOAL_X + yl))
        off_left = abs(snap_x - (GOAL_LINE_X - yl))
        if abs(off_right - off_left) > YARDLINE_MARGIN:
            return (Direction.RIGHT if off_right < off_left else Direction.LEFT), "YARDLINE"

        after = ball_track[ball_track["frame_index"] >= snap["frame_index"]]
        displacement = float(_last_event_frame(after)["x"]) - snap_x
        if abs(displacement) >= MIN_DISPLACEMENT:
            return (Direction.RIGHT if displacement > 0 else Direction.LEFT), "DISPLACEMENT"

    if convention is not None:
        return convention.offense_direction(play), "CONVENTION"

    raise DataError(
        "DIRECTION_UNKNOWN",
        f"cannot decide offense direction for play {play.key}",
        {"play_key": list(play.key)},
    )
