# fourthdown/causal/effect.py
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ..config import BootstrapConfig
from ..core.errors import DataError
from ..core.types import AnalysisMode, PlayKey
from .matching import MatchedPair

logger = logging.getLogger(__name__)

MIN_PAIRS = 30
CHUNK = 250


@dataclass
class EffectEstimate:
    mode: AnalysisMode
    per_play_wpa_diff: float
    ci_low: float
    ci_high: float
    n_pairs: int
    wins_per_team_year: float = 0.0
    eligible_plays_per_team_year: float = 0.0
    caliper: float = 0.0
    balance: Optional[pd.DataFrame] = None
    extra: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        out = {
            "mode": self.mode.value,
            "per_play_wpa_diff": self.per_play_wpa_diff,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "n_pairs": self.n_pairs,
            "wins_per_team_year": self.wins_per_team_year,
            "eligible_plays_per_team_year": self.eligible_plays_per_team_year,
            "caliper": self.caliper,
        }
        if self.balance is not None:
            out["balance"] = self.balance.to_dict(orient="records")
        out.update(self.extra)
        return out


def _replicate_means(diffs: np.ndarray, seed: int, indices: range) -> np.ndarray:
    n = len(diffs)
    out = np.empty(len(indices))
    for slot, b in enumerate(indices):
        rng = np.random.default_rng([seed, b])
        out[slot] = diffs[rng.integers(0, n, n)].mean()
    return out


def bootstrap_means(diffs: Sequence[float], replicates: int, seed: int, workers: int = 1) -> np.ndarray:
    """
    Pair-level bootstrap of the mean. Replicate b draws from its own
    generator seeded with (seed, b), so the result is the same for any
    number of workers.
    """
    diffs = np.asarray(diffs, dtype=float)
    chunks = [range(start, min(start + CHUNK, replicates)) for start in range(0, replicates, CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _replicate_means(diffs, seed, r), chunks))
    else:
        parts = [_replicate_means(diffs, seed, r) for r in chunks]
    return np.concatenate(parts) if parts else np.zeros(0)


def percentile_interval(means: np.ndarray, level: float, estimate: float):
    alpha = 1.0 - level
    lo, hi = np.quantile(means, [alpha / 2, 1 - alpha / 2])
    # the interval always contains the estimate
    return float(min(lo, estimate)), float(max(hi, estimate))


def pair_differences(pairs: Sequence[MatchedPair], wpa: Mapping[PlayKey, float]) -> np.ndarray:
    try:
        return np.array([wpa[p.go_play_key] - wpa[p.no_go_play_key] for p in pairs], dtype=float)
    except KeyError as exc:
        raise DataError("MISSING_WPA", f"no WPA for play {exc.args[0]}") from exc


def estimate_effect(pairs: Sequence[MatchedPair], wpa: Mapping[PlayKey, float], mode: AnalysisMode,
                    config: Optional[BootstrapConfig] = None, min_pairs: int = MIN_PAIRS,
                    workers: int = 1) -> EffectEstimate:
    """Mean (go WPA - no-go WPA) over matched pairs with a percentile bootstrap interval."""
    config = config or BootstrapConfig()
    if len(pairs) < min_pairs:
        raise DataError("TOO_FEW_PAIRS", f"{len(pairs)} pairs, need {min_pairs}",
                        {"n_pairs": len(pairs), "mode": mode.value})
    diffs = pair_differences(pairs, wpa)
    estimate = float(diffs.mean())
    means = bootstrap_means(diffs, config.replicates, config.seed, workers)
    lo, hi = percentile_interval(means, config.level, estimate)
    logger.info("%s: WPA difference %.4f [%.4f, %.4f] over %d pairs", mode.value, estimate, lo, hi, len(pairs))
    return EffectEstimate(mode=mode, per_play_wpa_diff=estimate, ci_low=lo, ci_high=hi, n_pairs=len(pairs))


def wins_per_year(effect, eligible_plays_per_team_year: float) -> float:
    """Per-play WPA difference scaled by eligible no-go plays per team-year."""
    diff = effect.per_play_wpa_diff if isinstance(effect, EffectEstimate) else float(effect)
    return diff * eligible_plays_per_team_year
