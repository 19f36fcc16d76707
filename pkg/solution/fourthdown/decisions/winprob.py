# fourthdown/decisions/winprob.py
"""
Win probability from game state, and win probability added per play.

The model is fitted on two rows per play, one from each team's point of
view, labelled with whether that team won. Reported probabilities are
symmetrized, WP(team) = (m(team view) + 1 - m(other view)) / 2, so the
two teams' values always sum to one and their WPA on a play cancel.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import expit

from ..config import WinProbConfig
from ..core.errors import DataError, ValidationError
from ..core.types import PlayRecord
from ..gam.basis import bspline_basis, difference_penalty, n_basis
from ..gam.pirls import clip_probability, fit_binomial

logger = logging.getLogger(__name__)

GAME_SECONDS = 3600.0
MIN_TRAINING_PLAYS = 200
LINEAR_RIDGE = 1e-6
DISTANCE_CAP = 20.0

WP_FEATURES = (
    "score_differential", "score_time_ratio", "yardline", "down", "distance",
    "timeouts_differential", "possession",
)


@dataclass(frozen=True)
class GameState:
    """State before a snap, from the possession team's side."""
    score_differential: float
    seconds_remaining: float
    yardline: float
    down: int
    distance: float
    timeouts_possession: int
    timeouts_opponent: int

    @classmethod
    def from_play(cls, play: PlayRecord, distance: Optional[float] = None) -> "GameState":
        return cls(
            score_differential=float(play.score_differential),
            seconds_remaining=play.seconds_remaining,
            yardline=play.yardline_from_own_goal,
            down=play.down,
            distance=float(play.yards_to_go_integer if distance is None else distance),
            timeouts_possession=play.timeouts_possession,
            timeouts_opponent=play.timeouts_opponent,
        )


def _state_columns(states: Sequence[GameState]) -> Dict[str, np.ndarray]:
    return {
        "s": np.array([st.score_differential for st in states], dtype=float),
        "sec": np.array([st.seconds_remaining for st in states], dtype=float),
        "yl": np.array([st.yardline for st in states], dtype=float),
        "down": np.array([st.down for st in states], dtype=float),
        "dist": np.array([st.distance for st in states], dtype=float),
        "to_pos": np.array([st.timeouts_possession for st in states], dtype=float),
        "to_opp": np.array([st.timeouts_opponent for st in states], dtype=float),
    }


def perspective_features(cols: Dict[str, np.ndarray], possession: bool, names: Sequence[str]) -> np.ndarray:
    """Linear features seen by the possession team (possession=True) or its opponent."""
    sign = 1.0 if possession else -1.0
    tau = cols["sec"] / GAME_SECONDS
    s = sign * cols["s"]
    built = {
        "score_differential": s,
        "score_time_ratio": s / np.sqrt(tau + 0.01),
        "yardline": sign * (cols["yl"] - 50.0),
        "down": sign * (cols["down"] - 1.0),
        "distance": sign * np.minimum(cols["dist"], DISTANCE_CAP),
        "timeouts_differential": sign * (cols["to_pos"] - cols["to_opp"]),
        "possession": np.full_like(s, 1.0 if possession else 0.0),
    }
    unknown = [n for n in names if n not in built]
    if unknown:
        raise ValidationError("UNKNOWN_FEATURE", f"unknown win probability features {unknown}")
    return np.column_stack([built[n] for n in names]) if names else np.zeros((len(s), 0))


@dataclass
class WinProbModel:
    features: List[str]
    means: np.ndarray
    scales: np.ndarray
    time_knots: np.ndarray
    degree: int
    coefficients: np.ndarray
    penalty: float
    fit_diagnostics: Dict = field(default_factory=dict)
    calibration: Optional[pd.DataFrame] = None

    def _design(self, cols: Dict[str, np.ndarray], possession: bool) -> np.ndarray:
        lin = (perspective_features(cols, possession, self.features) - self.means) / self.scales
        tau = np.clip(cols["sec"] / GAME_SECONDS, self.time_knots[0], self.time_knots[-1])
        return np.hstack([bspline_basis(tau, self.time_knots, self.degree), lin])

    def raw_probability(self, states: Sequence[GameState], possession: bool = True) -> np.ndarray:
        cols = _state_columns(states)
        return clip_probability(expit(self._design(cols, possession) @ self.coefficients))

    def predict(self, states: Sequence[GameState]) -> np.ndarray:
        """Win probability of the possession team for each state."""
        if not states:
            return np.zeros(0)
        own = self.raw_probability(states, True)
        other = self.raw_probability(states, False)
        return 0.5 * (own + 1.0 - other)

    def win_probability(self, state: GameState) -> float:
        return float(self.predict([state])[0])

    def to_dict(self) -> Dict:
        return {
            "features": list(self.features),
            "means": self.means.tolist(),
            "scales": self.scales.tolist(),
            "time_knots": self.time_knots.tolist(),
            "degree": self.degree,
            "coefficients": self.coefficients.tolist(),
            "penalty": self.penalty,
            "fit_diagnostics": self.fit_diagnostics,
            "feature_set": "approximation of an unpublished 17-variable model",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict) -> "WinProbModel":
        return cls(
            features=list(data["features"]),
            means=np.asarray(data["means"], dtype=float),
            scales=np.asarray(data["scales"], dtype=float),
            time_knots=np.asarray(data["time_knots"], dtype=float),
            degree=int(data["degree"]),
            coefficients=np.asarray(data["coefficients"], dtype=float),
            penalty=float(data["penalty"]),
            fit_diagnostics=dict(data.get("fit_diagnostics", {})),
        )


def _labels(plays: Sequence[PlayRecord], winners: Mapping[str, Optional[str]]):
    kept, y = [], []
    for p in plays:
        winner = winners.get(p.game_id)
        if winner is None:
            continue
        kept.append(p)
        y.append(1.0 if winner == p.possession_team else 0.0)
    return kept, np.asarray(y)


def fit_wp(plays: Sequence[PlayRecord], winners: Mapping[str, Optional[str]],
           config: Optional[WinProbConfig] = None, degree: int = 3) -> WinProbModel:
    """
    Fit the win probability model. ``winners`` maps game id to the winning
    team; ties and games without a final score (None) are left out.
    """
    config = config or WinProbConfig()
    kept, y_pos = _labels(plays, winners)
    if len(kept) < MIN_TRAINING_PLAYS:
        raise DataError("INSUFFICIENT_DATA", f"{len(kept)} labelled plays, need {MIN_TRAINING_PLAYS}")
    if y_pos.min() == y_pos.max():
        raise DataError("INSUFFICIENT_DATA", "labelled plays come from one side only")

    cols = _state_columns([GameState.from_play(p) for p in kept])
    names = list(config.features)
    lin = np.vstack([perspective_features(cols, True, names), perspective_features(cols, False, names)])
    means = lin.mean(axis=0)
    scales = lin.std(axis=0)
    scales[scales == 0] = 1.0

    time_knots = np.linspace(0.0, 1.0, max(config.time_knots, 2))
    tau = np.clip(cols["sec"] / GAME_SECONDS, 0.0, 1.0)
    B = bspline_basis(tau, time_knots, degree)
    X = np.hstack([np.vstack([B, B]), (lin - means) / scales])
    y = np.concatenate([y_pos, 1.0 - y_pos])

    k = n_basis(time_knots, degree)
    P = np.zeros((X.shape[1], X.shape[1]))
    P[:k, :k] = config.penalty * difference_penalty(k, 2)
    P[k:, k:] = LINEAR_RIDGE * np.eye(len(names))
    fit = fit_binomial(X, y, P)
    logger.info("win probability model: %d plays, deviance %.1f, %d iterations",
                len(kept), fit.deviance, fit.iterations)
    return WinProbModel(
        features=names,
        means=means,
        scales=scales,
        time_knots=time_knots,
        degree=degree,
        coefficients=fit.beta,
        penalty=config.penalty,
        fit_diagnostics={"deviance": fit.deviance, "iterations": fit.iterations,
                         "converged": fit.converged, "stop_reason": fit.stop_reason,
                         "n_plays": len(kept), "edf": fit.edf},
    )


def calibration_table(model: WinProbModel, plays: Sequence[PlayRecord],
                      winners: Mapping[str, Optional[str]], bins: int = 10) -> pd.DataFrame:
    """Observed win rate against mean prediction per predicted-probability decile."""
    kept, y = _labels(plays, winners)
    pred = model.predict([GameState.from_play(p) for p in kept])
    frame = pd.DataFrame({"pred": pred, "won": y})
    frame["decile"] = pd.qcut(frame["pred"].rank(method="first"), bins, labels=False)
    table = frame.groupby("decile").agg(mean_pred=("pred", "mean"), observed=("won", "mean"), n=("won", "size"))
    return table.reset_index()


def team_wp(model: WinProbModel, play: PlayRecord, team: str) -> float:
    wp = model.win_probability(GameState.from_play(play))
    return wp if team == play.possession_team else 1.0 - wp


def wpa(play: PlayRecord, model: WinProbModel, next_play: Optional[PlayRecord] = None,
        winner: Optional[str] = None, final: bool = False, team: Optional[str] = None) -> float:
    """
    Win probability added for ``team`` (default: the play's offense):
    WP after the play minus WP before, both from that team's side. The
    after-state is the next play of the game; at the end of a game it is
    the result (``final=True``; ``winner=None`` means a tie).
    """
    team = team or play.possession_team
    pre = team_wp(model, play, team)
    if next_play is not None:
        if next_play.game_id != play.game_id:
            raise ValidationError("STATE_UNDERIVABLE", "next play belongs to another game")
        post = team_wp(model, next_play, team)
    elif final:
        post = 0.5 if winner is None else (1.0 if winner == team else 0.0)
    else:
        raise DataError("STATE_UNDERIVABLE", f"no post-play state for play {play.key}", {"play_key": list(play.key)})
    value = post - pre
    if not -1.0 <= value <= 1.0 or math.isnan(value):
        raise DataError("STATE_UNDERIVABLE", f"WPA {value} out of range")
    return value
