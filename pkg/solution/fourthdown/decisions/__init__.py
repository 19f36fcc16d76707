# fourthdown/decisions/__init__.py
from .cohort import COHORT_COLUMNS, build_cohort, eligible_plays_per_team_year, go_decision
from .conversion import ConversionModel, LinearBucketCurve, fit_attempt_curve, fit_conversion, linear_bucket_curve
from .go_range import GoRange, load_go_range
from .propensity import FeatureTable, GoFeatureVector, PropensityModel, feature_table, fit_propensity, log_loss
from .winprob import GameState, WinProbModel, calibration_table, fit_wp, team_wp, wpa

__all__ = [
    "COHORT_COLUMNS", "ConversionModel", "FeatureTable", "GameState", "GoFeatureVector", "GoRange",
    "LinearBucketCurve", "PropensityModel", "WinProbModel",
    "build_cohort", "calibration_table", "eligible_plays_per_team_year", "feature_table",
    "fit_attempt_curve", "fit_conversion", "fit_propensity", "fit_wp", "go_decision",
    "linear_bucket_curve", "load_go_range", "log_loss", "team_wp", "wpa",
]
