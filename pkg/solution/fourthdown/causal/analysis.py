# fourthdown/causal/analysis.py
"""Run the matched comparison in both analysis modes over one cohort."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from ..config import AnalysisConfig
from ..core.errors import DataError
from ..core.types import AnalysisMode
from ..decisions.cohort import eligible_plays_per_team_year
from ..decisions.propensity import FeatureTable, PropensityModel, feature_table, fit_propensity
from .balance import balance_report, balloon_check
from .effect import EffectEstimate, estimate_effect, wins_per_year
from .gaps import GapCurves, conditional_gap_curves
from .matching import MatchedPair, default_caliper, match_plays

logger = logging.getLogger(__name__)


@dataclass
class ModeResult:
    mode: AnalysisMode
    propensity_model: PropensityModel
    cohort: pd.DataFrame
    pairs: List[MatchedPair]
    estimate: EffectEstimate


@dataclass
class AnalysisResult:
    modes: Dict[AnalysisMode, ModeResult] = field(default_factory=dict)
    squeeze: Optional[Dict] = None
    gap_curves: Optional[GapCurves] = None

    def estimate(self, mode: AnalysisMode) -> EffectEstimate:
        return self.modes[mode].estimate

    def to_dict(self) -> Dict:
        out = {mode.value: r.estimate.to_dict() for mode, r in self.modes.items()}
        if self.squeeze is not None:
            out["squeeze_check"] = self.squeeze
        return out


def eligible_cohort(cohort: pd.DataFrame) -> pd.DataFrame:
    return cohort[cohort["eligible"].astype(bool)].reset_index(drop=True)


def _with_propensity(cohort: pd.DataFrame, model: PropensityModel, table: FeatureTable) -> pd.DataFrame:
    out = cohort.copy()
    out["propensity"] = model.predict(table)
    out["logit"] = np.log(out["propensity"] / (1.0 - out["propensity"]))
    return out


def _match(scored: pd.DataFrame, config: AnalysisConfig) -> Tuple[List[MatchedPair], float]:
    caliper = default_caliper(scored["logit"], config.matching.caliper_sd)
    went = scored["went_for_it"].astype(bool)
    pairs = match_plays(scored[~went], scored[went], caliper, config.matching.seed)
    return pairs, caliper


def fit_mode_propensity(cohort: pd.DataFrame, mode: AnalysisMode, config: AnalysisConfig) -> PropensityModel:
    table = feature_table(cohort, mode, config.propensity.extra_terms)
    return fit_propensity(table, cohort["went_for_it"].astype(bool).to_numpy(), config.propensity)


def match_mode(cohort: pd.DataFrame, mode: AnalysisMode, config: AnalysisConfig,
               model: Optional[PropensityModel] = None):
    """(propensity model, scored cohort, pairs, caliper) for one analysis mode."""
    table = feature_table(cohort, mode, config.propensity.extra_terms)
    if model is None:
        model = fit_propensity(table, cohort["went_for_it"].astype(bool).to_numpy(), config.propensity)
    scored = _with_propensity(cohort, model, table)
    pairs, caliper = _match(scored, config)
    return model, scored, pairs, caliper


def run_mode(cohort: pd.DataFrame, mode: AnalysisMode, config: AnalysisConfig,
             seasons: Mapping[str, int], workers: int = 1, model: Optional[PropensityModel] = None) -> ModeResult:
    model, scored, pairs, caliper = match_mode(cohort, mode, config, model)
    wpa_by_key = dict(zip(zip(scored["game_id"], scored["play_id"]), scored["wpa"].astype(float)))
    estimate = estimate_effect(pairs, wpa_by_key, mode, config.bootstrap,
                               min_pairs=config.analysis.min_pairs, workers=workers)
    estimate.caliper = caliper
    estimate.balance = balance_report(scored, pairs)
    estimate.eligible_plays_per_team_year = eligible_plays_per_team_year(scored, seasons)
    estimate.wins_per_team_year = wins_per_year(estimate, estimate.eligible_plays_per_team_year)
    estimate.extra["n_go"] = int(scored["went_for_it"].astype(bool).sum())
    estimate.extra["n_no_go"] = int((~scored["went_for_it"].astype(bool)).sum())
    return ModeResult(mode, model, scored, pairs, estimate)


def squeeze_check(result: ModeResult, config: AnalysisConfig, bucket: int = 1) -> Dict:
    """Balance of the confounder when 4th-and-<bucket> plays are matched on the integer-mode propensity."""
    scored = result.cohort[result.cohort["pbp_bucket"] == bucket].reset_index(drop=True)
    went = scored["went_for_it"].astype(bool)
    if went.sum() == 0 or (~went).sum() == 0:
        raise DataError("GROUP_TOO_SMALL", f"no 4th-and-{bucket} plays in one decision group")
    pairs, _ = _match(scored, config)
    report = balance_report(scored, pairs)
    check = balloon_check(report)
    check["bucket"] = bucket
    check["n_pairs"] = len(pairs)
    check["balance"] = report.to_dict(orient="records")
    return check


def run_diagnostics(result: AnalysisResult, config: AnalysisConfig) -> AnalysisResult:
    """Squeeze check on the integer-mode matches plus the conditional gap curves."""
    integer = result.modes[AnalysisMode.INTEGER_BUCKET]
    result.squeeze = squeeze_check(integer, config)
    precise = result.modes[AnalysisMode.PRECISE].cohort
    result.gap_curves = conditional_gap_curves(
        integer.cohort["propensity"],
        precise["precise_yards"], precise["went_for_it"].astype(bool),
        config.gam, min_group_size=config.analysis.min_group_size,
    )
    return result


def run_analysis(cohort: pd.DataFrame, config: AnalysisConfig, seasons: Mapping[str, int],
                 workers: int = 1, diagnostics: bool = True,
                 models: Optional[Mapping[AnalysisMode, PropensityModel]] = None) -> AnalysisResult:
    eligible = eligible_cohort(cohort)
    if eligible.empty:
        raise DataError("NO_ELIGIBLE_PLAYS", "no fourth downs inside the go-for-it range")
    models = models or {}
    result = AnalysisResult()
    for mode in (AnalysisMode.INTEGER_BUCKET, AnalysisMode.PRECISE):
        result.modes[mode] = run_mode(eligible, mode, config, seasons, workers, models.get(mode))

    if diagnostics:
        run_diagnostics(result, config)
    return result
