# fourthdown/gam/pirls.py
"""
Penalized GLM solver shared by every smoother and decision model.

Minimizes  -loglik(beta) + 0.5 * beta' P beta  by Newton steps with
halving search (penalized iteratively reweighted least squares). The
penalty matrix ``P`` already carries the smoothing weights.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import expit, xlogy

from ..core.errors import DataError

logger = logging.getLogger(__name__)

PROB_EPS = 1e-15
MAX_HALVINGS = 30
SEPARATION_COEF = 30.0


@dataclass
class GlmFit:
    beta: np.ndarray
    deviance: float
    penalized_deviance: float
    iterations: int
    converged: bool
    edf: float
    covariance: np.ndarray
    family: str = "binomial"
    history: List[float] = field(default_factory=list)
    scale: float = 1.0
    # TOLERANCE, LINE_SEARCH_FAILED or MAX_ITER
    stop_reason: str = "TOLERANCE"

    @property
    def n_coef(self) -> int:
        return len(self.beta)


def clip_probability(p):
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def binomial_deviance(y: np.ndarray, mu: np.ndarray) -> float:
    mu = clip_probability(mu)
    return float(2.0 * np.sum(xlogy(y, y / mu) + xlogy(1 - y, (1 - y) / (1 - mu))))


def _penalized_deviance(X, y, beta, penalty) -> float:
    return binomial_deviance(y, expit(X @ beta)) + float(beta @ penalty @ beta)


def _edf(XtWX: np.ndarray, penalty: np.ndarray) -> float:
    return float(np.trace(np.linalg.solve(XtWX + penalty, XtWX)))


def fit_binomial(X: np.ndarray, y: np.ndarray, penalty: Optional[np.ndarray] = None,
                 max_iter: int = 50, tol: float = 1e-8, beta0: Optional[np.ndarray] = None) -> GlmFit:
    """
    Penalized logistic regression. Converged when the relative change in
    penalized deviance drops below ``tol``; the penalized deviance never
    increases from one iteration to the next.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    penalty = np.zeros((p, p)) if penalty is None else np.asarray(penalty, dtype=float)
    if y.min() == y.max():
        raise DataError("ALL_ONE_CLASS", f"all {n} outcomes equal {int(y[0])}")

    beta = np.zeros(p) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    current = _penalized_deviance(X, y, beta, penalty)
    history = [current]
    converged = False
    stop_reason = "MAX_ITER"
    iterations = 0
    for iterations in range(1, max_iter + 1):
        mu = expit(X @ beta)
        w = np.maximum(mu * (1.0 - mu), 1e-12)
        XtWX = X.T @ (X * w[:, None])
        grad = X.T @ (y - mu) - penalty @ beta
        try:
            step = np.linalg.solve(XtWX + penalty, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(XtWX + penalty, grad, rcond=None)[0]

        accepted = False
        for halving in range(MAX_HALVINGS):
            trial = beta + step * 0.5 ** halving
            value = _penalized_deviance(X, y, trial, penalty)
            if value <= current:
                accepted = True
                break
        if not accepted:
            # predicted decrease of the full Newton step
            decrement = float(grad @ step)
            converged = decrement / (abs(current) + 0.1) < tol
            stop_reason = "TOLERANCE" if converged else "LINE_SEARCH_FAILED"
            break
        change = abs(current - value) / (abs(value) + 0.1)
        beta, current = trial, value
        history.append(current)
        if change < tol:
            converged = True
            stop_reason = "TOLERANCE"
            break

    perfect = bool(np.all(np.abs(y - expit(X @ beta)) < 1e-6))
    if perfect or (not converged and np.max(np.abs(beta)) > SEPARATION_COEF):
        raise DataError(
            "SEPARATION_DETECTED",
            f"coefficients diverging (max |beta| = {np.max(np.abs(beta)):.1f})",
            {"max_abs_beta": float(np.max(np.abs(beta)))},
        )
    if not converged:
        logger.warning("PIRLS stopped after %d iterations without converging (%s)", iterations, stop_reason)

    mu = expit(X @ beta)
    w = np.maximum(mu * (1.0 - mu), 1e-12)
    XtWX = X.T @ (X * w[:, None])
    A = XtWX + penalty
    return GlmFit(
        beta=beta,
        deviance=binomial_deviance(y, mu),
        penalized_deviance=current,
        iterations=iterations,
        converged=converged,
        edf=_edf(XtWX, penalty),
        covariance=np.linalg.pinv(A),
        family="binomial",
        history=history,
        stop_reason=stop_reason,
    )


def fit_gaussian(X: np.ndarray, y: np.ndarray, penalty: Optional[np.ndarray] = None,
                 weights: Optional[np.ndarray] = None) -> GlmFit:
    """Penalized least squares; one solve."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    penalty = np.zeros((p, p)) if penalty is None else np.asarray(penalty, dtype=float)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    XtWX = X.T @ (X * w[:, None])
    A = XtWX + penalty
    beta = np.linalg.lstsq(A, X.T @ (w * y), rcond=None)[0]
    resid = y - X @ beta
    rss = float(np.sum(w * resid ** 2))
    edf = _edf(XtWX, penalty)
    scale = rss / max(n - edf, 1.0)
    return GlmFit(
        beta=beta,
        deviance=rss,
        penalized_deviance=rss + float(beta @ penalty @ beta),
        iterations=1,
        converged=True,
        edf=edf,
        covariance=scale * np.linalg.pinv(A),
        family="gaussian",
        history=[rss + float(beta @ penalty @ beta)],
        scale=scale,
    )


def gcv_score(fit: GlmFit, n: int) -> float:
    """n * deviance / (n - edf)^2"""
    denom = (n - fit.edf) ** 2
    return float("inf") if denom <= 0 else n * fit.deviance / denom
