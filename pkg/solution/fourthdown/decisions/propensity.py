# fourthdown/decisions/propensity.py
"""
Go-for-it propensity: plain logistic regression on game-state features,
fitted in one of two modes that differ only in the distance feature
(play-by-play integer bucket or precise tracking distance).
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import expit, logit

from ..config import PropensityConfig
from ..core.errors import DataError, ValidationError
from ..core.types import AnalysisMode
from ..gam.pirls import clip_probability, fit_binomial

logger = logging.getLogger(__name__)

BASE_FEATURES = (
    "yardline", "distance", "seconds_remaining", "score_differential",
    "timeouts_possession", "timeouts_opponent", "quarter", "pre_play_wp",
)
EXTRA_FEATURES = ("goal_to_go", "late_trailing")


@dataclass(frozen=True)
class GoFeatureVector:
    play_key: tuple
    mode: AnalysisMode
    values: Dict[str, float]


@dataclass
class FeatureTable:
    """Propensity covariates for a set of plays, tagged with the analysis mode."""
    mode: AnalysisMode
    frame: pd.DataFrame

    def __len__(self) -> int:
        return len(self.frame)

    def vectors(self) -> List[GoFeatureVector]:
        cols = [c for c in self.frame.columns if c not in ("game_id", "play_id")]
        return [
            GoFeatureVector((row["game_id"], row["play_id"]), self.mode, {c: float(row[c]) for c in cols})
            for _, row in self.frame.iterrows()
        ]


def feature_table(cohort: pd.DataFrame, mode: AnalysisMode, extra_terms: Sequence[str] = EXTRA_FEATURES) -> FeatureTable:
    """
    Build covariates from a cohort frame (see decisions.cohort). The
    distance column is the pbp bucket in INTEGER_BUCKET mode and the
    precise distance in PRECISE mode.
    """
    distance = cohort["pbp_bucket"] if mode == AnalysisMode.INTEGER_BUCKET else cohort["precise_yards"]
    frame = pd.DataFrame({
        "game_id": cohort["game_id"].to_numpy(),
        "play_id": cohort["play_id"].to_numpy(),
        "yardline": cohort["yardline"].to_numpy(dtype=float),
        "distance": distance.to_numpy(dtype=float),
        "seconds_remaining": cohort["seconds_remaining"].to_numpy(dtype=float),
        "score_differential": cohort["score_differential"].to_numpy(dtype=float),
        "timeouts_possession": cohort["timeouts_possession"].to_numpy(dtype=float),
        "timeouts_opponent": cohort["timeouts_opponent"].to_numpy(dtype=float),
        "quarter": cohort["quarter"].to_numpy(dtype=float),
        "pre_play_wp": cohort["pre_play_wp"].to_numpy(dtype=float),
    })
    for term in extra_terms:
        if term == "goal_to_go":
            frame[term] = cohort["goal_to_go"].astype(float).to_numpy()
        elif term == "late_trailing":
            late = (cohort["seconds_remaining"] <= 900) & (cohort["score_differential"] < 0)
            frame[term] = late.astype(float).to_numpy()
        else:
            raise ValidationError("UNKNOWN_FEATURE", f"unknown propensity term {term!r}")
    return FeatureTable(mode=mode, frame=frame)


@dataclass
class PropensityModel:
    mode: AnalysisMode
    features: List[str]
    means: np.ndarray
    scales: np.ndarray
    coefficients: np.ndarray
    fit_diagnostics: Dict = field(default_factory=dict)

    def _design(self, table: FeatureTable) -> np.ndarray:
        if table.mode != self.mode:
            raise ValidationError("MODE_MISMATCH", f"model fitted in {self.mode.value}, features built in {table.mode.value}")
        X = (table.frame[self.features].to_numpy(dtype=float) - self.means) / self.scales
        return np.column_stack([np.ones(len(X)), X])

    def predict(self, table: FeatureTable) -> np.ndarray:
        return clip_probability(expit(self._design(table) @ self.coefficients))

    def predict_vector(self, vector: GoFeatureVector) -> float:
        if vector.mode != self.mode:
            raise ValidationError("MODE_MISMATCH", f"model fitted in {self.mode.value}, vector built in {vector.mode.value}")
        frame = pd.DataFrame([{"game_id": vector.play_key[0], "play_id": vector.play_key[1], **vector.values}])
        return float(self.predict(FeatureTable(vector.mode, frame))[0])

    def logit(self, table: FeatureTable) -> np.ndarray:
        return logit(self.predict(table))

    def to_dict(self) -> Dict:
        return {
            "mode": self.mode.value,
            "features": self.features,
            "means": self.means.tolist(),
            "scales": self.scales.tolist(),
            "coefficients": self.coefficients.tolist(),
            "fit_diagnostics": self.fit_diagnostics,
            "feature_set": "approximation of an unpublished 17-variable model",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict) -> "PropensityModel":
        return cls(
            mode=AnalysisMode(data["mode"]),
            features=list(data["features"]),
            means=np.asarray(data["means"], dtype=float),
            scales=np.asarray(data["scales"], dtype=float),
            coefficients=np.asarray(data["coefficients"], dtype=float),
            fit_diagnostics=dict(data.get("fit_diagnostics", {})),
        )


def fit_propensity(table: FeatureTable, went_for_it: Sequence[bool],
                   config: Optional[PropensityConfig] = None) -> PropensityModel:
    config = config or PropensityConfig()
    y = np.asarray(went_for_it, dtype=float)
    if len(y) != len(table):
        raise ValidationError("BAD_INPUT", "one decision per feature row")
    if len(y) == 0 or y.min() == y.max():
        raise DataError("ALL_ONE_CLASS", "both decisions must be represented")

    features = [c for c in table.frame.columns if c not in ("game_id", "play_id")]
    raw = table.frame[features].to_numpy(dtype=float)
    means = raw.mean(axis=0)
    scales = raw.std(axis=0)
    scales[scales == 0] = 1.0
    X = np.column_stack([np.ones(len(raw)), (raw - means) / scales])
    P = config.ridge * np.eye(X.shape[1])
    P[0, 0] = 0.0
    fit = fit_binomial(X, y, P)
    logger.info("propensity (%s): %d plays, go rate %.3f", table.mode.value, len(y), y.mean())
    return PropensityModel(
        mode=table.mode,
        features=features,
        means=means,
        scales=scales,
        coefficients=fit.beta,
        fit_diagnostics={"deviance": fit.deviance, "iterations": fit.iterations,
                         "converged": fit.converged, "stop_reason": fit.stop_reason, "n": len(y)},
    )


def log_loss(model: PropensityModel, table: FeatureTable, went_for_it: Sequence[bool]) -> float:
    y = np.asarray(went_for_it, dtype=float)
    p = model.predict(table)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))
