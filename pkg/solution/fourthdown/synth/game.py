# fourthdown/synth/game.py
"""
Drive-level game simulator for the synthetic world.

A possession is a chain of series. A series either converts on one of its
first three downs or stalls at a fourth down whose precise distance comes
from the world's distance mixture. Series that stall carry ball tracks for
every down, so the line to gain and the fourth-down spot are both visible
to the yardage pipeline.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..core.types import BALL, FIELD_LENGTH, FLIP_WIDTH, OWN_GOAL_X, Direction, PlayRecord, PlayType
from ..core.validation import snap_array
from ..decisions.go_range import GoRange
from ..field.direction import SNAP_EVENT, StadiumConvention
from ..field.normalize import flip_frames
from ..ingest.assemble import GameDataset, assemble_game
from ..ingest.parsers import GameMeta
from ..yardage.distance import SERIES_LENGTH, integer_bucket
from .world import (
    GAME_SECONDS,
    Calibration,
    WorldConfig,
    conversion_probability,
    decision_probability,
    expected_go_wp,
    expected_kick_wp,
    go_outcome_wp,
    kick_outcome_wp,
    oracle_wp,
    sample_distance,
)

logger = logging.getLogger(__name__)

QUARTER_SECONDS = 900.0
FRAME_SECONDS = 0.1
PLAYER_ID_BASE = 1000
CONVERT_GAIN_SCALE = 4.0
# every tracked ball moves at least this far downfield after the snap
MIN_TRACK_GAIN = 1.0
FIELD_GOAL_END = 105.0
TRACK_COLUMNS = ["game_id", "play_id", "entity_id", "frame_index", "timestamp", "x", "y", "speed", "direction", "event"]

# pilot decision rule, used before the world is calibrated
PILOT_CALIBRATION = Calibration(decision_intercept=0.85, decision_distance=-1.0, beta_a=2.0, beta_b=2.0)

BANK_COLUMNS = [
    "first_spot", "line_to_gain", "goal_to_go", "score_differential", "seconds_remaining",
    "quarter", "game_clock", "timeouts_possession", "timeouts_opponent",
]
LATENT_COLUMNS = [
    "game_id", "play_id", "offense", "distance", "spot", "pbp_yardline", "pbp_bucket", "goal_to_go",
    "score_differential", "seconds_remaining", "eligible", "went_for_it", "propensity", "converted",
    "pre_wp", "wp_after", "oracle_wpa", "expected_go_wp", "expected_kick_wp",
]


def pbp_yardline(spot: float) -> int:
    """Play-by-play yardline: the spot rounded half up, kept inside 1-99."""
    return int(min(99, max(1, math.floor(spot + 0.5))))


def team_name(index: int) -> str:
    return f"T{index:02d}"


@dataclass
class SimulatedGame:
    meta: GameMeta
    plays: List[PlayRecord]
    frames: pd.DataFrame
    latents: List[Dict] = field(default_factory=list)
    states: List[Dict] = field(default_factory=list)

    def to_dataset(self) -> GameDataset:
        return assemble_game(self.meta, self.plays, self.frames, {})[0]


@dataclass
class _Run:
    rng: np.random.Generator
    game_id: str
    home: str
    away: str
    elapsed: float = 0.0
    play_no: int = 0
    series_no: int = 0
    scores: Dict[str, int] = field(default_factory=dict)
    timeouts: Dict[str, int] = field(default_factory=dict)
    plays: List[PlayRecord] = field(default_factory=list)
    frames: List[pd.DataFrame] = field(default_factory=list)
    latents: List[Dict] = field(default_factory=list)
    states: List[Dict] = field(default_factory=list)

    def __post_init__(self):
        self.scores = {self.home: 0, self.away: 0}
        self.reset_timeouts()

    def reset_timeouts(self):
        self.timeouts = {self.home: 3, self.away: 3}

    def other(self, team: str) -> str:
        return self.away if team == self.home else self.home

    @property
    def finished(self) -> bool:
        return self.elapsed >= GAME_SECONDS

    def clock(self) -> Tuple[int, float]:
        quarter = min(4, int(self.elapsed // QUARTER_SECONDS) + 1)
        return quarter, float(math.floor(max(0.0, quarter * QUARTER_SECONDS - self.elapsed)))

    def margin(self, team: str) -> int:
        return self.scores[team] - self.scores[self.other(team)]

    def tick(self, seconds: float, timeout_rate: float):
        self.elapsed += seconds
        for team in (self.home, self.away):
            if self.timeouts[team] > 0 and self.rng.random() < timeout_rate:
                self.timeouts[team] -= 1


class GameSimulator:
    """
    Plays one synthetic game per call. ``tracking=False`` skips frame
    generation (the pilot runs only need fourth-down states).
    """

    def __init__(self, world: WorldConfig, calibration: Calibration, go_range: GoRange,
                 convention: Optional[StadiumConvention] = None, tracking: bool = True,
                 collect_states: bool = False):
        self.world = world
        self.calibration = calibration
        self.go_range = go_range
        self.convention = convention or StadiumConvention()
        self.tracking = tracking
        self.collect_states = collect_states

    def play_game(self, index: int, seed: int) -> SimulatedGame:
        world = self.world
        rng = np.random.default_rng([seed, index])
        season = world.seasons[index % len(world.seasons)]
        home_i, away_i = rng.choice(world.n_teams, size=2, replace=False)
        run = _Run(rng=rng, game_id=f"{season}{index:05d}", home=team_name(int(home_i)), away=team_name(int(away_i)))

        opening = run.away if rng.random() < 0.5 else run.home
        offense, spot = opening, world.kickoff_spot
        second_half = False
        while not run.finished:
            if not second_half and run.elapsed >= GAME_SECONDS / 2:
                second_half = True
                offense, spot = run.other(opening), world.kickoff_spot
                run.reset_timeouts()
            offense, spot = self._series(run, offense, spot)

        meta = GameMeta(run.game_id, season, 1 + index % 17, run.home, run.away,
                        run.scores[run.home], run.scores[run.away])
        frames = pd.concat(run.frames, ignore_index=True) if run.frames else pd.DataFrame(columns=TRACK_COLUMNS)
        return SimulatedGame(meta, run.plays, frames, run.latents, run.states)

    # --- series ----------------------------------------------------------------

    def _series(self, run: _Run, offense: str, first_spot: float) -> Tuple[str, float]:
        goal = first_spot + SERIES_LENGTH >= 100.0
        ltg = 100.0 if goal else first_spot + SERIES_LENGTH
        run.series_no += 1
        series_id = str(run.series_no)
        if run.rng.random() < self.world.series_convert_rate:
            return self._converting_series(run, offense, first_spot, ltg, goal, series_id)
        return self._stalled_series(run, offense, first_spot, ltg, goal, series_id)

    def _converting_series(self, run: _Run, offense: str, first_spot: float, ltg: float,
                           goal: bool, series_id: str) -> Tuple[str, float]:
        world = self.world
        convert_down = int(run.rng.integers(1, 4))
        spot = first_spot
        for down in range(1, convert_down + 1):
            if run.finished:
                break
            if down < convert_down:
                gain = run.rng.uniform(0.0, 0.5 * (ltg - spot))
            else:
                gain = ltg - spot + run.rng.exponential(CONVERT_GAIN_SCALE)
            end = spot + gain
            touchdown = end >= 100.0
            yards = 100 - pbp_yardline(spot) if touchdown else int(round(gain))
            self._record(run, offense, spot, down, ltg, goal, series_id, self._scrimmage_type(run), yards)
            run.tick(world.play_seconds, world.timeout_rate)
            if touchdown:
                run.scores[offense] += 7
                return run.other(offense), world.kickoff_spot
            spot = end
        return offense, spot

    def _stalled_series(self, run: _Run, offense: str, first_spot: float, ltg: float,
                        goal: bool, series_id: str) -> Tuple[str, float]:
        world = self.world
        distance = float(sample_distance(world, self.calibration, run.rng))
        spot4 = ltg - distance
        shares = np.cumsum(run.rng.dirichlet(np.ones(3)))
        spots = [first_spot] + [first_spot + (spot4 - first_spot) * s for s in shares[:2]] + [spot4]
        for down in (1, 2, 3):
            if run.finished:
                return offense, spots[down - 1]
            start, end = spots[down - 1], spots[down]
            record = self._record(run, offense, start, down, ltg, goal, series_id,
                                  self._scrimmage_type(run), int(round(end - start)))
            self._track(run, record, start, end, "tackle")
            run.tick(world.play_seconds, world.timeout_rate)
        if run.finished:
            return offense, spot4
        return self._fourth_down(run, offense, first_spot, spot4, distance, ltg, goal, series_id)

    # --- fourth down -------------------------------------------------------------

    def _fourth_down(self, run: _Run, offense: str, first_spot: float, spot: float, distance: float,
                     ltg: float, goal: bool, series_id: str) -> Tuple[str, float]:
        world, calib = self.world, self.calibration
        quarter, clock = run.clock()
        seconds = (4 - quarter) * QUARTER_SECONDS + clock
        margin = run.margin(offense)
        yardline = pbp_yardline(spot)
        bucket = integer_bucket(distance)
        eligible = self.go_range.eligible(yardline, bucket)
        propensity = float(decision_probability(world, calib, distance, spot, margin))
        went = bool(eligible and run.rng.random() < propensity)
        after = max(seconds - world.fourth_down_seconds, 0.0)
        pre_wp = float(oracle_wp(world, margin, spot, seconds))

        if self.collect_states:
            run.states.append({
                "first_spot": first_spot, "line_to_gain": ltg, "goal_to_go": goal,
                "score_differential": margin, "seconds_remaining": seconds, "quarter": quarter,
                "game_clock": clock, "timeouts_possession": run.timeouts[offense],
                "timeouts_opponent": run.timeouts[run.other(offense)],
            })

        converted: Optional[bool] = None
        points = 0
        if went:
            converted = bool(run.rng.random() < conversion_probability(world, distance))
            converted_wp, failed_wp = go_outcome_wp(world, distance, spot, margin, after)
            new_spot = spot + distance + world.convert_extra
            play_type, event = self._scrimmage_type(run), "tackle"
            if converted and new_spot >= 100.0:
                yards, points, end = 100 - yardline, 7, 100.0
                next_offense, next_spot = run.other(offense), world.kickoff_spot
            elif converted:
                yards, end = int(round(distance + world.convert_extra)), new_spot
                next_offense, next_spot = offense, new_spot
            else:
                gain = max(0.0, distance - world.fail_short)
                yards, end = int(math.floor(gain)), spot + gain
                next_offense, next_spot = run.other(offense), 100.0 - (spot + gain)
            wp_after = float(converted_wp if converted else failed_wp)
        else:
            made_wp, missed_wp, p_make = kick_outcome_wp(world, spot, margin, after)
            yards = 0
            next_offense = run.other(offense)
            if spot >= world.fg_min_yardline:
                made = bool(run.rng.random() < p_make)
                play_type, event, end = PlayType.FIELD_GOAL, "field_goal", FIELD_GOAL_END
                points = 3 if made else 0
                next_spot = world.kickoff_spot if made else max(world.punt_floor, 107.0 - spot)
                wp_after = float(made_wp if made else missed_wp)
            else:
                play_type, event, end = PlayType.PUNT, "punt_land", spot + world.punt_net
                next_spot = max(world.punt_floor, 100.0 - spot - world.punt_net)
                wp_after = float(made_wp)

        record = self._record(run, offense, spot, 4, ltg, goal, series_id, play_type, yards)
        self._track(run, record, spot, end, event)
        run.latents.append({
            "game_id": run.game_id, "play_id": record.play_id, "offense": offense,
            "distance": distance, "spot": spot, "pbp_yardline": yardline, "pbp_bucket": bucket,
            "goal_to_go": goal, "score_differential": margin, "seconds_remaining": seconds,
            "eligible": eligible, "went_for_it": went, "propensity": propensity, "converted": converted,
            "pre_wp": pre_wp, "wp_after": wp_after, "oracle_wpa": wp_after - pre_wp,
            "expected_go_wp": float(expected_go_wp(world, distance, spot, margin, after)),
            "expected_kick_wp": float(expected_kick_wp(world, spot, margin, after)),
        })
        run.scores[offense] += points
        run.tick(world.fourth_down_seconds, world.timeout_rate)
        return next_offense, next_spot

    # --- rows and frames ---------------------------------------------------------

    @staticmethod
    def _scrimmage_type(run: _Run) -> PlayType:
        return PlayType.RUN if run.rng.random() < 0.45 else PlayType.PASS

    def _record(self, run: _Run, offense: str, spot: float, down: int, ltg: float, goal: bool,
                series_id: str, play_type: PlayType, yards: int) -> PlayRecord:
        run.play_no += 1
        quarter, clock = run.clock()
        record = PlayRecord(
            game_id=run.game_id,
            play_id=str(run.play_no),
            quarter=quarter,
            game_clock_remaining=clock,
            down=down,
            yards_to_go_integer=integer_bucket(max(ltg - spot, 0.0)),
            yardline_from_own_goal=float(pbp_yardline(spot)),
            possession_team=offense,
            home_team=run.home,
            away_team=run.away,
            score_differential=run.margin(offense),
            timeouts_possession=run.timeouts[offense],
            timeouts_opponent=run.timeouts[run.other(offense)],
            play_type=play_type,
            yards_gained=int(yards),
            series_id=series_id,
            goal_to_go=goal,
        )
        run.plays.append(record)
        return record

    def _track(self, run: _Run, record: PlayRecord, start: float, end: float, event: str):
        if not self.tracking:
            return
        world = self.world
        n, snap = world.frames_per_play, world.snap_frame
        end = min(max(end, start + MIN_TRACK_GAIN), FIELD_LENGTH - OWN_GOAL_X)
        k = np.arange(1, n + 1)
        moved = np.clip((k - snap) / (n - snap), 0.0, 1.0)
        ball_x = OWN_GOAL_X + start + (end - start) * moved
        ball_speed = np.where(k > snap, (end - start) / ((n - snap) * FRAME_SECONDS), 0.0)
        center = FLIP_WIDTH / 2

        p = world.players_per_frame
        j = np.arange(p)
        los = OWN_GOAL_X + start
        offense_side = j < (p + 1) // 2
        player_x = np.clip(np.where(offense_side, los - 1.0 - (j % 3), los + 1.0 + (j % 3)), 0.0, FIELD_LENGTH)
        player_y = np.clip(center + ((j % 11) - 5) * 4.0, 1.0, 52.0)
        player_dir = np.where(offense_side, 90.0, 270.0)

        width = p + 1
        x = np.column_stack([ball_x, np.tile(player_x, (n, 1))]).ravel()
        y = np.column_stack([np.full(n, center), np.tile(player_y, (n, 1))]).ravel()
        speed = np.column_stack([ball_speed, np.zeros((n, p))]).ravel()
        direction = np.column_stack([np.full(n, 90.0), np.tile(player_dir, (n, 1))]).ravel()
        events: List[Optional[str]] = [None] * (n * width)
        events[(snap - 1) * width] = SNAP_EVENT
        events[(n - 1) * width] = event

        frames = pd.DataFrame({
            "game_id": run.game_id,
            "play_id": record.play_id,
            "entity_id": np.tile([BALL] + [str(PLAYER_ID_BASE + i) for i in range(p)], n),
            "frame_index": np.repeat(k, width).astype(np.int64),
            "timestamp": np.repeat(np.round(run.elapsed + FRAME_SECONDS * (k - 1), 3), width),
            "x": snap_array(x),
            "y": snap_array(y),
            "speed": np.round(speed, 6),
            "direction": direction,
            "event": events,
        })
        if self.convention.offense_direction(record) == Direction.LEFT:
            frames = flip_frames(frames)
        run.frames.append(frames)
