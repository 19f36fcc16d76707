# fourthdown/causal/gaps.py
"""Precise distance against go-for-it probability, smoothed per decision group."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..config import GamConfig
from ..core.errors import DataError
from ..gam.model import MIN_OBSERVATIONS, SplineModel, fit_pspline_identity, predict_interval

logger = logging.getLogger(__name__)


@dataclass
class GapCurve:
    model: SplineModel
    fitted: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    y_range: tuple


@dataclass
class GapCurves:
    grid: np.ndarray
    go: GapCurve
    no_go: GapCurve
    marginal_median_gap: float

    def gap(self) -> np.ndarray:
        return self.no_go.fitted - self.go.fitted

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "go_probability": self.grid,
            "go_fit": self.go.fitted, "go_lower": self.go.lower, "go_upper": self.go.upper,
            "no_go_fit": self.no_go.fitted, "no_go_lower": self.no_go.lower, "no_go_upper": self.no_go.upper,
            "gap": self.gap(),
        })


def _curve(x: np.ndarray, y: np.ndarray, grid: np.ndarray, config: GamConfig, level: float) -> GapCurve:
    model = fit_pspline_identity(x, y, config)
    fitted, lower, upper = predict_interval(model, grid, level)
    lo, hi = float(y.min()), float(y.max())
    # no extrapolation past the observed distances
    return GapCurve(model, np.clip(fitted, lo, hi), np.clip(lower, lo, hi), np.clip(upper, lo, hi), (lo, hi))


def conditional_gap_curves(propensity: Sequence[float], precise_yards: Sequence[float],
                           went_for_it: Sequence[bool], config: Optional[GamConfig] = None,
                           min_group_size: int = 10, n_points: int = 101, level: float = 0.95) -> GapCurves:
    config = config or GamConfig()
    p = np.asarray(propensity, dtype=float)
    d = np.asarray(precise_yards, dtype=float)
    went = np.asarray(went_for_it, dtype=bool)
    need = max(min_group_size, MIN_OBSERVATIONS)
    sizes = {"go": int(went.sum()), "no_go": int((~went).sum())}
    if min(sizes.values()) < need:
        raise DataError("GROUP_TOO_SMALL", f"gap curves need {need} plays per group, got {sizes}", sizes)

    grid = np.linspace(0.0, 1.0, n_points)
    go = _curve(p[went], d[went], grid, config, level)
    no_go = _curve(p[~went], d[~went], grid, config, level)
    marginal = float(np.median(d[~went]) - np.median(d[went]))
    return GapCurves(grid=grid, go=go, no_go=no_go, marginal_median_gap=marginal)
