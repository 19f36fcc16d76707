# fourthdown/causal/__init__.py
from .analysis import (
    AnalysisResult,
    ModeResult,
    eligible_cohort,
    fit_mode_propensity,
    match_mode,
    run_analysis,
    run_diagnostics,
    run_mode,
    squeeze_check,
)
from .balance import BALANCE_COVARIATES, balance_report, balloon_check
from .effect import EffectEstimate, bootstrap_means, estimate_effect, percentile_interval, wins_per_year
from .gaps import GapCurves, conditional_gap_curves
from .matching import MatchedPair, default_caliper, match_plays, pairs_frame

__all__ = [
    "AnalysisResult", "BALANCE_COVARIATES", "EffectEstimate", "GapCurves", "MatchedPair", "ModeResult",
    "balance_report", "balloon_check", "bootstrap_means", "conditional_gap_curves", "default_caliper",
    "eligible_cohort", "estimate_effect", "fit_mode_propensity", "match_mode", "match_plays", "pairs_frame",
    "percentile_interval", "run_analysis", "run_diagnostics", "run_mode", "squeeze_check", "wins_per_year",
]
