# fourthdown/gam/__init__.py
from .basis import bspline_basis, difference_matrix, difference_penalty, equal_knots, extended_knots, n_basis
from .model import (
    SplineLogisticModel,
    SplineModel,
    curve,
    fit_pspline_identity,
    fit_pspline_logistic,
    predict,
    predict_interval,
)
from .pirls import GlmFit, binomial_deviance, fit_binomial, fit_gaussian, gcv_score

__all__ = [
    "GlmFit", "SplineLogisticModel", "SplineModel",
    "binomial_deviance", "bspline_basis", "curve", "difference_matrix", "difference_penalty",
    "equal_knots", "extended_knots", "fit_binomial", "fit_gaussian", "fit_pspline_identity",
    "fit_pspline_logistic", "gcv_score", "n_basis", "predict", "predict_interval",
]
