# fourthdown/decisions/cohort.py
"""
The fourth-down cohort: one row per go/kick decision with its distances,
game state, pre-play win probability, outcome and WPA.
"""

import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from ..core.types import GoDecision, PlayKey, PlayRecord, PlayType, PreciseYardage, YardageSource
from .go_range import GoRange
from .winprob import GameState, WinProbModel, wpa

logger = logging.getLogger(__name__)

GO_TYPES = (PlayType.RUN, PlayType.PASS)
KICK_TYPES = (PlayType.PUNT, PlayType.FIELD_GOAL)

COHORT_COLUMNS = [
    "game_id", "play_id", "offense", "yardline", "pbp_bucket", "precise_yards", "source",
    "seconds_remaining", "score_differential", "timeouts_possession", "timeouts_opponent",
    "quarter", "goal_to_go", "pre_play_wp", "went_for_it", "converted", "wpa", "eligible",
]


def go_decision(play: PlayRecord, next_play: Optional[PlayRecord] = None) -> Optional[GoDecision]:
    """
    RUN or PASS on fourth down is a go, PUNT or FIELD_GOAL a kick; anything
    else is not a decision. A go converts when the offense keeps the ball
    with a new first down, or scores.
    """
    if not play.is_fourth_down:
        return None
    if play.play_type in KICK_TYPES:
        return GoDecision(play.key, False)
    if play.play_type not in GO_TYPES:
        return None
    if play.yards_gained >= 100 - play.yardline_from_own_goal:
        return GoDecision(play.key, True, True)
    if next_play is not None and next_play.game_id == play.game_id:
        converted = next_play.possession_team == play.possession_team and next_play.down == 1
        return GoDecision(play.key, True, converted)
    return GoDecision(play.key, True, play.yards_gained >= play.yards_to_go_integer)


def build_cohort(games: Sequence[Tuple[str, Optional[str], Sequence[PlayRecord]]],
                 yardages: Mapping[PlayKey, PreciseYardage],
                 wp_model: WinProbModel,
                 go_range: GoRange,
                 include_overtime: bool = True,
                 wpa_values: Optional[Mapping[PlayKey, float]] = None) -> pd.DataFrame:
    """
    games: (game_id, winner or None, plays in game order) per game.
    Plays without a tracking-derived precise distance are left out so both
    analysis modes see the same plays. ``wpa_values`` replaces model WPA
    (the synthetic check feeds its oracle values through it).
    """
    rows: List[Dict] = []
    skipped = {"no_tracking_distance": 0, "overtime": 0}
    for game_id, winner, plays in games:
        for i, play in enumerate(plays):
            if not play.is_fourth_down:
                continue
            next_play = plays[i + 1] if i + 1 < len(plays) else None
            decision = go_decision(play, next_play)
            if decision is None:
                continue
            if play.quarter >= 5 and not include_overtime:
                skipped["overtime"] += 1
                continue
            yard = yardages.get(play.key)
            if yard is None or yard.source != YardageSource.TRACKING_BALL:
                skipped["no_tracking_distance"] += 1
                continue
            if wpa_values is not None:
                value = wpa_values[play.key]
            else:
                value = wpa(play, wp_model, next_play, winner=winner, final=next_play is None)
            rows.append({
                "game_id": play.game_id,
                "play_id": play.play_id,
                "offense": play.possession_team,
                "yardline": play.yardline_from_own_goal,
                "pbp_bucket": play.yards_to_go_integer,
                "precise_yards": yard.yards,
                "source": yard.source.value,
                "seconds_remaining": play.seconds_remaining,
                "score_differential": play.score_differential,
                "timeouts_possession": play.timeouts_possession,
                "timeouts_opponent": play.timeouts_opponent,
                "quarter": play.quarter,
                "goal_to_go": play.goal_to_go,
                "state": GameState.from_play(play),
                "went_for_it": decision.went_for_it,
                "converted": decision.converted,
                "wpa": value,
                "eligible": go_range.eligible(play.yardline_from_own_goal, play.yards_to_go_integer),
            })
    if skipped["no_tracking_distance"] or skipped["overtime"]:
        logger.info("cohort: skipped %s", skipped)
    if not rows:
        return pd.DataFrame(columns=COHORT_COLUMNS)
    frame = pd.DataFrame(rows)
    frame["pre_play_wp"] = wp_model.predict(list(frame.pop("state")))
    return frame[COHORT_COLUMNS].sort_values(["game_id", "play_id"], kind="mergesort").reset_index(drop=True)


def eligible_plays_per_team_year(cohort: pd.DataFrame, seasons: Mapping[str, int]) -> float:
    """Mean count of eligible no-go plays per (team, season)."""
    kicks = cohort[cohort["eligible"] & ~cohort["went_for_it"]]
    if kicks.empty:
        return 0.0
    team_years = {(team, seasons.get(game, 0)) for team, game in zip(cohort["offense"], cohort["game_id"])}
    return len(kicks) / max(len(team_years), 1)
