# fourthdown/gam/basis.py
"""
B-spline design matrices and difference penalties.

``knots`` are always the strictly increasing breakpoints of the fitting
range. The full knot vector extends them by ``degree`` knots on each side
using the first and last interval widths, so with equally spaced
breakpoints the Greville abscissae are equally spaced too and a second
order difference penalty leaves straight lines unpenalized.
"""

import numpy as np
from scipy.interpolate import BSpline

from ..core.errors import ValidationError


def n_basis(knots, degree: int) -> int:
    return len(knots) + degree - 1


def extended_knots(knots, degree: int) -> np.ndarray:
    knots = np.asarray(knots, dtype=float)
    if knots.ndim != 1 or len(knots) < 2 or np.any(np.diff(knots) <= 0):
        raise ValidationError("BAD_KNOTS", "knots must be strictly increasing with at least two values")
    if degree == 0:
        return knots
    h_lo = knots[1] - knots[0]
    h_hi = knots[-1] - knots[-2]
    lower = knots[0] - h_lo * np.arange(degree, 0, -1)
    upper = knots[-1] + h_hi * np.arange(1, degree + 1)
    return np.concatenate([lower, knots, upper])


def bspline_basis(x, knots, degree: int = 3) -> np.ndarray:
    """Dense design matrix, one row per x, n_basis(knots, degree) columns."""
    if degree < 0:
        raise ValidationError("BAD_DEGREE", f"degree must be >= 0, got {degree}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = extended_knots(knots, degree)
    lo, hi = float(knots[0]), float(knots[-1])
    outside = (x < lo) | (x > hi) | ~np.isfinite(x)
    if outside.any():
        raise ValidationError(
            "X_OUT_OF_KNOT_RANGE",
            f"{int(outside.sum())} values outside [{lo}, {hi}]",
            {"first": float(x[outside][0])},
        )
    # evaluate the right boundary on the last interval
    x = np.where(x == hi, np.nextafter(hi, lo), x)
    return BSpline.design_matrix(x, t, degree).toarray()


def difference_matrix(n: int, order: int) -> np.ndarray:
    return np.diff(np.eye(n), n=order, axis=0)


def difference_penalty(n: int, order: int) -> np.ndarray:
    d = difference_matrix(n, order)
    return d.T @ d


def equal_knots(x, n_interior: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    lo, hi = float(np.min(x)), float(np.max(x))
    if not hi > lo:
        raise ValidationError("DEGENERATE_X", "x has no spread; cannot place knots")
    return np.linspace(lo, hi, n_interior + 2)
