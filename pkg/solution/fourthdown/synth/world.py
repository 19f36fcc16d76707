# fourthdown/synth/world.py
"""
Synthetic fourth-down world with a known confounding structure.

Teams decide with a logit that depends on the precise distance, which the
play-by-play bucket hides. Conversion depends on the precise distance too,
so the integer bucket leaves confounding that matching cannot remove. The
oracle win probability of the team with the ball is

    WP = Phi((s + kappa * (y - y0)) / (sigma * sqrt(tau + tau0)))

with s the score margin, y the yardline from own goal and tau the share of
the game left.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import expit
from scipy.stats import beta as beta_dist
from scipy.stats import norm

from ..core.errors import ValidationError

logger = logging.getLogger(__name__)

GAME_SECONDS = 3600.0
SHORT_RANGE = 2.0
MAX_DISTANCE = 4.0
# where "4th-and-inches" and "long 4th-and-1" targets are read off
INCHES = 0.25
LONG_ONE = 1.75


@dataclass(frozen=True)
class WorldConfig:
    n_games: int = 200
    n_teams: int = 32
    seasons: Tuple[int, ...] = (2017, 2018, 2019)
    players_per_frame: int = 22
    frames_per_play: int = 10
    snap_frame: int = 3
    play_seconds: float = 22.5
    fourth_down_seconds: float = 6.0
    series_convert_rate: float = 0.68
    timeout_rate: float = 0.02

    # distance mixture: scaled Beta on (0, 2) with weight short_weight, uniform on [2, 4] otherwise
    short_weight: float = 0.6
    beta_a: Optional[float] = None
    beta_b: Optional[float] = None

    # go-for-it logit: c0 + c_d * d + yardline * (y - 60) / 10 + score * s / 7
    decision_intercept: Optional[float] = None
    decision_distance: Optional[float] = None
    decision_yardline: float = 0.4
    decision_score: float = -0.35

    # 0.79 at INCHES, 0.55 at LONG_ONE
    conversion_intercept: float = 1.5123
    conversion_distance: float = -0.7495
    convert_extra: float = 2.0
    fail_short: float = 1.0

    wp_kappa: float = 0.09
    wp_y0: float = 25.0
    wp_sigma: float = 13.5
    wp_tau0: float = 0.005
    kickoff_spot: float = 25.0
    punt_net: float = 40.0
    punt_floor: float = 20.0
    fg_min_yardline: float = 63.0
    fg_a: float = 5.5
    fg_b: float = 0.1

    target_go_short: float = 0.70
    target_go_long: float = 0.30
    target_median_go: float = 0.70
    target_median_no_go: float = 0.98
    # matched per-play WPA gaps solved by synth.effects
    target_naive_effect: float = 0.038
    target_precise_effect: float = 0.023

    pilot_games: int = 1500
    pilot_seed: int = 20171

    def validate(self) -> "WorldConfig":
        problems = []
        if self.n_games < 1:
            problems.append("n_games must be >= 1")
        if self.n_teams < 2:
            problems.append("n_teams must be >= 2")
        if not self.seasons:
            problems.append("at least one season")
        if not 0 < self.short_weight < 1:
            problems.append("short_weight in (0, 1)")
        for name in ("beta_a", "beta_b"):
            value = getattr(self, name)
            if value is not None and value < 1:
                problems.append(f"{name} must be >= 1")
        if not 1 <= self.snap_frame < self.frames_per_play:
            problems.append("snap_frame must fall inside the play")
        if self.players_per_frame < 0:
            problems.append("players_per_frame must be >= 0")
        if self.play_seconds <= 0 or self.fourth_down_seconds <= 0:
            problems.append("play durations must be positive")
        if not 0 < self.series_convert_rate < 1:
            problems.append("series_convert_rate in (0, 1)")
        if not 0 <= self.timeout_rate < 1:
            problems.append("timeout_rate in [0, 1)")
        if self.wp_sigma <= 0 or self.wp_tau0 <= 0 or self.wp_kappa <= 0:
            problems.append("wp_kappa, wp_sigma and wp_tau0 must be positive")
        for name in ("target_go_short", "target_go_long"):
            if not 0 < getattr(self, name) < 1:
                problems.append(f"{name} in (0, 1)")
        if not 0 < self.target_median_go < self.target_median_no_go < SHORT_RANGE:
            problems.append("target medians must satisfy 0 < go < no-go < 2")
        if not 0 < self.target_precise_effect < self.target_naive_effect < 1:
            problems.append("effect targets must satisfy 0 < precise < naive < 1")
        if not self.wp_y0 < 50.0:
            problems.append("wp_y0 must sit short of midfield")
        if problems:
            raise ValidationError("INVALID_CONFIG", "; ".join(problems), {"problems": problems})
        return self

    def replace(self, **changes) -> "WorldConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Calibration:
    decision_intercept: float
    decision_distance: float
    beta_a: float
    beta_b: float
    achieved: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return dataclasses.asdict(self)


# --- oracle win probability and play outcomes (vectorized) -------------------

def oracle_wp(world: WorldConfig, score, yardline, seconds):
    tau = np.maximum(np.asarray(seconds, dtype=float), 0.0) / GAME_SECONDS
    z = (np.asarray(score, dtype=float) + world.wp_kappa * (np.asarray(yardline, dtype=float) - world.wp_y0))
    return norm.cdf(z / (world.wp_sigma * np.sqrt(tau + world.wp_tau0)))


def _opponent_wp(world: WorldConfig, score, opp_yardline, seconds):
    """WP of the current offense once the opponent has the ball."""
    return 1.0 - oracle_wp(world, -np.asarray(score, dtype=float), opp_yardline, seconds)


def decision_probability(world: WorldConfig, calib: Calibration, d, yardline, score):
    eta = (calib.decision_intercept + calib.decision_distance * np.asarray(d, dtype=float)
           + world.decision_yardline * (np.asarray(yardline, dtype=float) - 60.0) / 10.0
           + world.decision_score * np.asarray(score, dtype=float) / 7.0)
    return expit(eta)


def conversion_probability(world: WorldConfig, d):
    return expit(world.conversion_intercept + world.conversion_distance * np.asarray(d, dtype=float))


def fg_make_probability(world: WorldConfig, yardline):
    kick = 100.0 - np.asarray(yardline, dtype=float) + 17.0
    return expit(world.fg_a - world.fg_b * kick)


def go_outcome_wp(world: WorldConfig, d, yardline, score, seconds_after):
    """(WP after a conversion, WP after a failed attempt) for the offense."""
    d = np.asarray(d, dtype=float)
    y = np.asarray(yardline, dtype=float)
    s = np.asarray(score, dtype=float)
    new_spot = y + d + world.convert_extra
    touchdown = new_spot >= 100.0
    keep = oracle_wp(world, s, np.minimum(new_spot, 99.0), seconds_after)
    scored = _opponent_wp(world, s + 7.0, world.kickoff_spot, seconds_after)
    converted = np.where(touchdown, scored, keep)
    failed_spot = 100.0 - (y + np.maximum(0.0, d - world.fail_short))
    failed = _opponent_wp(world, s, failed_spot, seconds_after)
    return converted, failed


def kick_outcome_wp(world: WorldConfig, yardline, score, seconds_after):
    """(WP if the kick succeeds, WP if it fails, success probability). Punts always 'succeed'."""
    y = np.asarray(yardline, dtype=float)
    s = np.asarray(score, dtype=float)
    punt = _opponent_wp(world, s, np.maximum(world.punt_floor, 100.0 - y - world.punt_net), seconds_after)
    fg_made = _opponent_wp(world, s + 3.0, world.kickoff_spot, seconds_after)
    fg_missed = _opponent_wp(world, s, np.maximum(world.punt_floor, 107.0 - y), seconds_after)
    is_fg = y >= world.fg_min_yardline
    p_make = np.where(is_fg, fg_make_probability(world, y), 1.0)
    return np.where(is_fg, fg_made, punt), np.where(is_fg, fg_missed, punt), p_make


def expected_go_wp(world: WorldConfig, d, yardline, score, seconds_after):
    converted, failed = go_outcome_wp(world, d, yardline, score, seconds_after)
    p = conversion_probability(world, d)
    return p * converted + (1.0 - p) * failed


def expected_kick_wp(world: WorldConfig, yardline, score, seconds_after):
    made, missed, p = kick_outcome_wp(world, yardline, score, seconds_after)
    return p * made + (1.0 - p) * missed


# --- distance mixture ----------------------------------------------------------

def distance_density(world: WorldConfig, calib: Calibration, d):
    d = np.asarray(d, dtype=float)
    short = world.short_weight * beta_dist.pdf(d / SHORT_RANGE, calib.beta_a, calib.beta_b) / SHORT_RANGE
    long_ = (1.0 - world.short_weight) / (MAX_DISTANCE - SHORT_RANGE)
    return np.where((d > 0) & (d < SHORT_RANGE), short, np.where((d >= SHORT_RANGE) & (d <= MAX_DISTANCE), long_, 0.0))


def sample_distance(world: WorldConfig, calib: Calibration, rng: np.random.Generator, size=None):
    short = rng.random(size) < world.short_weight
    beta_draw = SHORT_RANGE * rng.beta(calib.beta_a, calib.beta_b, size)
    uniform_draw = rng.uniform(SHORT_RANGE, MAX_DISTANCE, size)
    d = np.where(short, beta_draw, uniform_draw)
    # keep strictly positive: a zero distance is a converted series
    return np.maximum(d, 1e-6)
