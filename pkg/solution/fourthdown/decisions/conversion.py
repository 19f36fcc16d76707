# fourthdown/decisions/conversion.py
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.special import expit

from ..config import GamConfig
from ..core.errors import ValidationError
from ..gam.model import SplineModel, curve, fit_pspline_logistic
from ..gam.pirls import fit_binomial
from ..yardage.distance import integer_bucket

logger = logging.getLogger(__name__)

ConversionModel = SplineModel


def fit_conversion(precise_yards: Sequence[float], converted: Sequence[bool],
                   config: Optional[GamConfig] = None, workers: int = 1) -> ConversionModel:
    """Conversion curve on go-for-it plays only."""
    converted = [c for c in converted]
    if any(c is None for c in converted):
        raise ValidationError("BAD_INPUT", "conversion is only defined for go-for-it plays")
    y = np.asarray(converted, dtype=float)
    return fit_pspline_logistic(np.asarray(precise_yards, dtype=float), y, config, workers=workers)


def fit_attempt_curve(precise_yards: Sequence[float], went_for_it: Sequence[bool],
                      config: Optional[GamConfig] = None, workers: int = 1) -> SplineModel:
    return fit_pspline_logistic(np.asarray(precise_yards, dtype=float),
                                np.asarray(went_for_it, dtype=float), config, workers=workers)


@dataclass
class LinearBucketCurve:
    intercept: float
    slope: float
    max_deviation: float
    grid: np.ndarray
    probabilities: np.ndarray

    def to_dict(self) -> Dict:
        return {"intercept": self.intercept, "slope": self.slope, "max_deviation": self.max_deviation}


def linear_bucket_curve(precise_yards: Sequence[float], outcome: Sequence[bool],
                        smooth: SplineModel, n_points: int = 101) -> LinearBucketCurve:
    """
    Logistic line of the outcome on the integer bucket, evaluated on the
    smooth's grid, with its largest gap to the smooth.
    """
    yards = np.asarray(precise_yards, dtype=float)
    buckets = np.array([integer_bucket(v) for v in yards], dtype=float)
    X = np.column_stack([np.ones(len(buckets)), buckets])
    fit = fit_binomial(X, np.asarray(outcome, dtype=float))
    grid, smooth_p = curve(smooth, n_points)
    grid_buckets = np.array([integer_bucket(max(g, 0.0)) for g in grid], dtype=float)
    line_p = expit(fit.beta[0] + fit.beta[1] * grid_buckets)
    return LinearBucketCurve(
        intercept=float(fit.beta[0]),
        slope=float(fit.beta[1]),
        max_deviation=float(np.max(np.abs(line_p - smooth_p))),
        grid=grid,
        probabilities=line_p,
    )
