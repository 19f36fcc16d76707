# fourthdown/report/figures.py
"""
Figure-ready series: precise-distance densities by decision, the attempt and
conversion curves, and the conditional gap curves. Each figure is written
as a CSV table plus a standalone SVG chart.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils import ensure_dir

from ..causal.gaps import GapCurves
from ..config import AnalysisConfig
from ..core.errors import DataError
from ..decisions.conversion import LinearBucketCurve, fit_attempt_curve, fit_conversion, linear_bucket_curve
from ..gam.model import SplineModel, predict_interval
from ..yardage.density import DensityCurves, distance_density
from .svg import LineChart

logger = logging.getLogger(__name__)

DENSITY_FILES = ("distance_density.csv", "distance_density.svg")
CURVE_FILES = ("gam_curves.csv", "gam_curves.svg")
GAP_FILES = ("conditional_gaps.csv", "conditional_gaps.svg")
DENSITY_BUCKETS = (1, 2)


def _group_label(bucket: int, went: bool) -> str:
    return f"4th-and-{bucket} {'go' if went else 'kick'}"


def density_figure(cohort: pd.DataFrame, min_group_size: int = 10,
                   buckets: Sequence[int] = DENSITY_BUCKETS) -> Tuple[DensityCurves, pd.DataFrame, str]:
    groups = {}
    for bucket in buckets:
        for went in (True, False):
            rows = cohort[(cohort["pbp_bucket"] == bucket) & (cohort["went_for_it"].astype(bool) == went)]
            if len(rows) >= min_group_size:
                groups[(bucket, went)] = rows["precise_yards"].to_numpy(dtype=float)
    if not groups:
        raise DataError("GROUP_TOO_SMALL", f"no bucket/decision group reaches {min_group_size} plays")
    curves = distance_density(groups, min_group_size=min_group_size)
    table = pd.DataFrame(list(curves.to_rows()), columns=["bucket", "went_for_it", "distance", "density"])

    chart = LineChart("Precise distance to the line to gain", "yards to go", "density")
    for key, dens in sorted(curves.densities.items()):
        chart.add(_group_label(*key), curves.grid, dens, dashed=not key[1])
    return curves, table, chart.render()


@dataclass
class DecisionCurves:
    attempt: SplineModel
    conversion: SplineModel
    attempt_line: LinearBucketCurve
    conversion_line: LinearBucketCurve

    def summary(self) -> Dict:
        return {
            "attempt": self.attempt.fit_diagnostics,
            "conversion": self.conversion.fit_diagnostics,
            "attempt_bucket_line": self.attempt_line.to_dict(),
            "conversion_bucket_line": self.conversion_line.to_dict(),
        }


def fit_decision_curves(cohort: pd.DataFrame, config: Optional[AnalysisConfig] = None,
                        workers: int = 1) -> DecisionCurves:
    """Attempt curve over eligible plays, conversion curve over the go-for-it plays among them."""
    config = config or AnalysisConfig()
    eligible = cohort[cohort["eligible"].astype(bool)]
    went = eligible["went_for_it"].astype(bool)
    attempt = fit_attempt_curve(eligible["precise_yards"], went, config.gam, workers)
    go = eligible[went]
    converted = go["converted"].astype(bool)
    conversion = fit_conversion(go["precise_yards"], converted, config.gam, workers)
    return DecisionCurves(
        attempt=attempt,
        conversion=conversion,
        attempt_line=linear_bucket_curve(eligible["precise_yards"], went, attempt),
        conversion_line=linear_bucket_curve(go["precise_yards"], converted, conversion),
    )


def curves_figure(curves: DecisionCurves, n_points: int = 101, level: float = 0.95) -> Tuple[pd.DataFrame, str]:
    parts = []
    chart = LineChart("Going for it and converting by precise distance", "yards to go", "probability")
    for name, model, line in (("go_for_it", curves.attempt, curves.attempt_line),
                              ("conversion", curves.conversion, curves.conversion_line)):
        lo, hi = model.x_range
        grid = np.linspace(lo, hi, n_points)
        fitted, lower, upper = predict_interval(model, grid, level)
        parts.append(pd.DataFrame({"curve": name, "precise_yards": grid, "fit": fitted,
                                   "lower": lower, "upper": upper}))
        parts.append(pd.DataFrame({"curve": f"{name}_bucket_line", "precise_yards": line.grid,
                                   "fit": line.probabilities, "lower": np.nan, "upper": np.nan}))
        chart.add(name.replace("_", " "), grid, fitted, lower, upper)
        chart.add(f"{name.replace('_', ' ')} (bucket line)", line.grid, line.probabilities, dashed=True)
    return pd.concat(parts, ignore_index=True), chart.render()


def gaps_figure(gaps: GapCurves) -> Tuple[pd.DataFrame, str]:
    chart = LineChart("Precise distance given the integer-bucket go probability",
                      "go-for-it probability (integer model)", "precise yards")
    chart.add("go", gaps.grid, gaps.go.fitted, gaps.go.lower, gaps.go.upper)
    chart.add("kick", gaps.grid, gaps.no_go.fitted, gaps.no_go.lower, gaps.no_go.upper, dashed=True)
    return gaps.to_frame(), chart.render()


def _write(table: pd.DataFrame, svg: str, out: Path, names: Tuple[str, str]) -> Dict[str, str]:
    csv_path, svg_path = out / names[0], out / names[1]
    table.to_csv(csv_path, index=False, lineterminator="\n")
    with open(svg_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(svg)
    return {"csv": str(csv_path), "svg": str(svg_path)}


def write_figures(cohort: pd.DataFrame, gaps: GapCurves, out_dir, config: Optional[AnalysisConfig] = None,
                  workers: int = 1) -> Dict:
    """Write all three figures; returns their paths and a summary of the fits."""
    config = config or AnalysisConfig()
    out = Path(out_dir)
    ensure_dir(str(out))
    eligible = cohort[cohort["eligible"].astype(bool)]

    densities, density_table, density_svg = density_figure(eligible, config.analysis.min_group_size)
    curves = fit_decision_curves(cohort, config, workers)
    curve_table, curve_svg = curves_figure(curves)
    gap_table, gap_svg = gaps_figure(gaps)

    summary = {
        "files": {
            "densities": _write(density_table, density_svg, out, DENSITY_FILES),
            "curves": _write(curve_table, curve_svg, out, CURVE_FILES),
            "gaps": _write(gap_table, gap_svg, out, GAP_FILES),
        },
        "medians": {f"{b}/{'go' if w else 'kick'}": m for (b, w), m in sorted(densities.medians.items())},
        "density_integrals": {f"{b}/{'go' if w else 'kick'}": densities.integral((b, w))
                              for (b, w) in sorted(densities.densities)},
        "median_gap_bucket_1": densities.median_gap(1),
        "marginal_median_gap": gaps.marginal_median_gap,
        "curves": curves.summary(),
    }
    logger.info("figures written to %s", out)
    return summary
