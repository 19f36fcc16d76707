# fourthdown/report/__init__.py
from .auditor import RunAuditor
from .figures import (
    CURVE_FILES,
    DENSITY_FILES,
    GAP_FILES,
    DecisionCurves,
    curves_figure,
    density_figure,
    fit_decision_curves,
    gaps_figure,
    write_figures,
)
from .svg import SVG, LineChart

__all__ = [
    "CURVE_FILES", "DENSITY_FILES", "GAP_FILES", "DecisionCurves", "LineChart", "RunAuditor", "SVG",
    "curves_figure", "density_figure", "fit_decision_curves", "gaps_figure", "write_figures",
]
