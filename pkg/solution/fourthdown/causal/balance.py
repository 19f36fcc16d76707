# fourthdown/causal/balance.py
"""
Standardized mean differences before and after matching.

Both columns share one denominator, the pooled standard deviation of the
full cohort, so a change in SMD reflects a change in means only.
"""

import logging
from typing import Dict, Sequence

import numpy as np
import pandas as pd

from .matching import MatchedPair

logger = logging.getLogger(__name__)

BALANCE_COVARIATES = (
    "yardline", "pbp_bucket", "seconds_remaining", "score_differential",
    "timeouts_possession", "timeouts_opponent", "quarter", "pre_play_wp", "precise_yards",
)
CONFOUNDER = "precise_yards"


def _smd(go: np.ndarray, no_go: np.ndarray, pooled_sd: float) -> float:
    if pooled_sd == 0 or len(go) == 0 or len(no_go) == 0:
        return 0.0
    return float((go.mean() - no_go.mean()) / pooled_sd)


def balance_report(cohort: pd.DataFrame, pairs: Sequence[MatchedPair],
                   covariates: Sequence[str] = BALANCE_COVARIATES) -> pd.DataFrame:
    """
    cohort: one row per play with game_id, play_id, went_for_it and the
    covariate columns. Returns covariate, smd_before, smd_after.
    """
    indexed = cohort.set_index(["game_id", "play_id"])
    go_all = indexed[indexed["went_for_it"].astype(bool)]
    no_go_all = indexed[~indexed["went_for_it"].astype(bool)]
    go_matched = indexed.loc[[p.go_play_key for p in pairs]]
    no_go_matched = indexed.loc[[p.no_go_play_key for p in pairs]]

    rows = []
    for cov in covariates:
        g = go_all[cov].to_numpy(dtype=float)
        k = no_go_all[cov].to_numpy(dtype=float)
        var_g = g.var(ddof=1) if len(g) > 1 else 0.0
        var_k = k.var(ddof=1) if len(k) > 1 else 0.0
        pooled = float(np.sqrt((var_g + var_k) / 2.0))
        rows.append({
            "covariate": cov,
            "smd_before": _smd(g, k, pooled),
            "smd_after": _smd(go_matched[cov].to_numpy(dtype=float), no_go_matched[cov].to_numpy(dtype=float), pooled),
        })
    return pd.DataFrame(rows, columns=["covariate", "smd_before", "smd_after"])


def balloon_check(report: pd.DataFrame, confounder: str = CONFOUNDER, min_before: float = 0.1) -> Dict:
    """
    Matching on observed covariates should shrink their imbalance while the
    unmatched confounder's imbalance holds or grows.
    """
    table = report.set_index("covariate")
    observed = table.drop(index=confounder, errors="ignore")
    relevant = observed[observed["smd_before"].abs() >= min_before]
    shrunk = {cov: bool(abs(r.smd_after) <= abs(r.smd_before)) for cov, r in relevant.iterrows()}
    result = {
        "observed_shrink": all(shrunk.values()),
        "observed_checked": shrunk,
    }
    if confounder in table.index:
        before = float(table.loc[confounder, "smd_before"])
        after = float(table.loc[confounder, "smd_after"])
        result.update({
            "confounder": confounder,
            "confounder_smd_before": before,
            "confounder_smd_after": after,
            "confounder_grows": abs(after) >= abs(before),
        })
    return result
