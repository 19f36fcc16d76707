# fourthdown/gam/model.py
"""
One-dimensional P-spline smoothers: logistic (attempt and conversion
curves) and identity-link (WPA gap curves). The smoothing weight is picked
from a grid by generalized cross-validation.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from ..config import GamConfig
from ..core.errors import DataError, ValidationError
from .basis import bspline_basis, difference_penalty, equal_knots, n_basis
from .pirls import GlmFit, clip_probability, fit_binomial, fit_gaussian, gcv_score

logger = logging.getLogger(__name__)

MIN_OBSERVATIONS = 20


@dataclass
class SplineModel:
    knots: np.ndarray
    degree: int
    coefficients: np.ndarray
    penalty_weight: float
    effective_df: float
    deviance: float
    iterations: int
    converged: bool
    link: str = "logit"
    penalty_order: int = 2
    gcv: float = float("nan")
    n_obs: int = 0
    covariance: Optional[np.ndarray] = None
    gcv_path: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def fit_diagnostics(self) -> Dict:
        return {"deviance": self.deviance, "iterations": self.iterations, "converged": self.converged}

    @property
    def x_range(self) -> Tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def clamp(self, x) -> Tuple[np.ndarray, np.ndarray]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.x_range
        clamped = np.clip(x, lo, hi)
        return clamped, clamped != x

    def linear_predictor(self, x) -> np.ndarray:
        xc, outside = self.clamp(x)
        if outside.any():
            logger.debug("%d prediction points clamped to the knot range", int(outside.sum()))
        return bspline_basis(xc, self.knots, self.degree) @ self.coefficients

    def to_dict(self) -> Dict:
        return {
            "link": self.link,
            "knots": [float(k) for k in self.knots],
            "degree": self.degree,
            "penalty_order": self.penalty_order,
            "coefficients": [float(c) for c in self.coefficients],
            "lambda": self.penalty_weight,
            "edf": self.effective_df,
            "gcv": self.gcv,
            "n_obs": self.n_obs,
            "fit_diagnostics": self.fit_diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict) -> "SplineModel":
        diag = data.get("fit_diagnostics", {})
        return cls(
            knots=np.asarray(data["knots"], dtype=float),
            degree=int(data["degree"]),
            coefficients=np.asarray(data["coefficients"], dtype=float),
            penalty_weight=float(data["lambda"]),
            effective_df=float(data["edf"]),
            deviance=float(diag.get("deviance", float("nan"))),
            iterations=int(diag.get("iterations", 0)),
            converged=bool(diag.get("converged", True)),
            link=data.get("link", "logit"),
            penalty_order=int(data.get("penalty_order", 2)),
            gcv=float(data.get("gcv", float("nan"))),
            n_obs=int(data.get("n_obs", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "SplineModel":
        return cls.from_dict(json.loads(text))


# the logistic smoother keeps its own name for callers
SplineLogisticModel = SplineModel


def predict(model: SplineModel, x) -> np.ndarray:
    """Probabilities for a logit model, fitted values for an identity model."""
    eta = model.linear_predictor(x)
    if model.link == "logit":
        return clip_probability(expit(eta))
    return eta


def predict_interval(model: SplineModel, x, level: float = 0.95) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fitted values with pointwise Bayesian bands (on the response scale)."""
    if model.covariance is None:
        raise ValidationError("NO_COVARIANCE", "model was loaded without a covariance matrix")
    xc, _ = model.clamp(x)
    B = bspline_basis(xc, model.knots, model.degree)
    eta = B @ model.coefficients
    se = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", B, model.covariance, B), 0.0))
    z = norm.ppf(0.5 + level / 2)
    lo, hi = eta - z * se, eta + z * se
    if model.link == "logit":
        return clip_probability(expit(eta)), clip_probability(expit(lo)), clip_probability(expit(hi))
    return eta, lo, hi


def _check_inputs(x, y, binary: bool):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("BAD_INPUT", "x and y must be 1-d arrays of equal length")
    if len(x) < MIN_OBSERVATIONS:
        raise DataError("INSUFFICIENT_DATA", f"{len(x)} observations, need {MIN_OBSERVATIONS}")
    if binary:
        if not np.isin(y, (0.0, 1.0)).all():
            raise ValidationError("BAD_INPUT", "y must be binary")
        if y.min() == y.max():
            raise DataError("ALL_ONE_CLASS", f"all outcomes equal {int(y[0])}")
    return x, y


def _select(x, y, config: GamConfig, binary: bool, knots=None, workers: int = 1) -> SplineModel:
    knots = equal_knots(x, config.n_interior_knots) if knots is None else np.asarray(knots, dtype=float)
    B = bspline_basis(x, knots, config.degree)
    S = difference_penalty(n_basis(knots, config.degree), config.penalty_order)
    n = len(y)

    def fit_one(lam: float) -> Tuple[float, Optional[GlmFit], Optional[Exception]]:
        try:
            if binary:
                fit = fit_binomial(B, y, lam * S, max_iter=config.max_iter, tol=config.tol)
            else:
                fit = fit_gaussian(B, y, lam * S)
            return lam, fit, None
        except DataError as exc:
            return lam, None, exc

    grid = sorted(float(lam) for lam in config.lambda_grid)
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fit_one, grid))
    else:
        results = [fit_one(lam) for lam in grid]

    scored = [(gcv_score(fit, n), lam, fit) for lam, fit, _ in results if fit is not None]
    if not scored:
        # every weight failed the same way; surface the first failure
        raise next(exc for _, _, exc in results if exc is not None)
    best_score, best_lam, best = min(scored, key=lambda s: (s[0], -s[1]))
    logger.debug("GCV picked lambda=%.4g (edf=%.2f)", best_lam, best.edf)
    return SplineModel(
        knots=knots,
        degree=config.degree,
        coefficients=best.beta,
        penalty_weight=best_lam,
        effective_df=best.edf,
        deviance=best.deviance,
        iterations=best.iterations,
        converged=best.converged,
        link="logit" if binary else "identity",
        penalty_order=config.penalty_order,
        gcv=best_score,
        n_obs=n,
        covariance=best.covariance,
        gcv_path=[(lam, score) for score, lam, _ in sorted(scored, key=lambda s: s[1])],
    )


def fit_pspline_logistic(x: Sequence[float], y: Sequence[int], config: Optional[GamConfig] = None,
                         knots=None, workers: int = 1) -> SplineModel:
    """Penalized B-spline logistic fit; lambda from the config grid by GCV."""
    config = config or GamConfig()
    x, y = _check_inputs(x, y, binary=True)
    return _select(x, y, config, binary=True, knots=knots, workers=workers)


def fit_pspline_identity(x: Sequence[float], y: Sequence[float], config: Optional[GamConfig] = None,
                         knots=None, workers: int = 1) -> SplineModel:
    config = config or GamConfig()
    x, y = _check_inputs(x, y, binary=False)
    return _select(x, y, config, binary=False, knots=knots, workers=workers)


def curve(model: SplineModel, n_points: int = 101) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = model.x_range
    grid = np.linspace(lo, hi, n_points)
    return grid, predict(model, grid)
