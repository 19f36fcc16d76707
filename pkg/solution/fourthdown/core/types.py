# fourthdown/core/types.py
"""
Shared domain types. All values are immutable and safe to hand to worker
threads.

Coordinates follow the stadium frame: x runs along the 120-yard length
(end zones included), y across the 160/3-yard width.
"""

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Tuple

FIELD_LENGTH = 120.0
FIELD_WIDTH_EXACT = Fraction(160, 3)
FIELD_WIDTH = float(FIELD_WIDTH_EXACT)
COORD_TOL = 1e-9

# coordinates and headings live on a binary grid of 2**-30 units. Sums and
# differences of grid values below 2**22 are exact in float64, so the flip
# about the field center is an exact involution on stored values.
GRID_SCALE = float(2 ** 30)


def snap(value: float) -> float:
    """Nearest grid value; non-finite values pass through."""
    value = float(value)
    if not math.isfinite(value):
        return value
    return round(value * GRID_SCALE) / GRID_SCALE


def snap_heading(value: float) -> float:
    return snap(value) % 360.0


FLIP_WIDTH = snap(float(FIELD_WIDTH_EXACT))

# the home goal line sits at x = 10, the far goal line at x = 110
GOAL_LINE_X = 110.0
OWN_GOAL_X = 10.0

BALL = "BALL"

PlayKey = Tuple[str, str]


class PlayType(str, enum.Enum):
    RUN = "RUN"
    PASS = "PASS"
    PUNT = "PUNT"
    FIELD_GOAL = "FIELD_GOAL"
    PENALTY = "PENALTY"
    OTHER = "OTHER"


class YardageSource(str, enum.Enum):
    TRACKING_BALL = "TRACKING_BALL"
    CHAIN_CHIP = "CHAIN_CHIP"
    FALLBACK_INTEGER = "FALLBACK_INTEGER"


class AnalysisMode(str, enum.Enum):
    INTEGER_BUCKET = "INTEGER_BUCKET"
    PRECISE = "PRECISE"


class Direction(str, enum.Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"


@dataclass(frozen=True)
class FieldPoint:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", snap(self.x))
        object.__setattr__(self, "y", snap(self.y))

    def in_bounds(self, tol: float = COORD_TOL) -> bool:
        return (-tol <= self.x <= FIELD_LENGTH + tol) and (-tol <= self.y <= FIELD_WIDTH + tol)


@dataclass(frozen=True)
class TrackingFrame:
    game_id: str
    play_id: str
    entity_id: str
    frame_index: int
    timestamp: float
    point: FieldPoint
    speed: Optional[float] = None
    direction: Optional[float] = None
    event: Optional[str] = None

    def __post_init__(self):
        if self.direction is not None:
            object.__setattr__(self, "direction", snap_heading(self.direction))

    @property
    def is_ball(self) -> bool:
        return self.entity_id == BALL

    def with_point(self, x: float, y: float, direction: Optional[float] = None) -> "TrackingFrame":
        return replace(self, point=FieldPoint(x, y), direction=direction if direction is not None else self.direction)


@dataclass(frozen=True)
class PlayRecord:
    game_id: str
    play_id: str
    quarter: int
    game_clock_remaining: float
    down: int
    yards_to_go_integer: int
    yardline_from_own_goal: float
    possession_team: str
    home_team: str
    away_team: str
    score_differential: int
    timeouts_possession: int
    timeouts_opponent: int
    play_type: PlayType
    yards_gained: int
    series_id: str
    goal_to_go: bool

    @property
    def key(self) -> PlayKey:
        return (self.game_id, self.play_id)

    @property
    def defense_team(self) -> str:
        return self.away_team if self.possession_team == self.home_team else self.home_team

    @property
    def seconds_remaining(self) -> float:
        """Regulation seconds left in the game (overtime counts its own clock)."""
        if self.quarter >= 5:
            return float(self.game_clock_remaining)
        return float((4 - self.quarter) * 900 + self.game_clock_remaining)

    @property
    def is_fourth_down(self) -> bool:
        return self.down == 4


@dataclass(frozen=True)
class PreciseYardage:
    play_key: PlayKey
    yards: float
    source: YardageSource
    bucket: int
    flags: Tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class GoDecision:
    play_key: PlayKey
    went_for_it: bool
    converted: Optional[bool] = None

    def __post_init__(self):
        if not self.went_for_it and self.converted is not None:
            raise ValueError("converted is only defined for go-for-it plays")
