# fourthdown/synth/effects.py
"""
Solve the oracle's field-position terms so the matched go-for-it comparison
lands on target sizes in both analysis modes.

Both modes are matched once on a large table world. The comparison is then
re-evaluated with expected instead of realized WPA while the yard value
``wp_kappa`` and the neutral yardline ``wp_y0`` move. Neither term moves a
state, a decision or a distance, so the pairs stay valid. Pre-play WP does
enter the propensity model, so the match is redone at the solution and the
solve repeated.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import least_squares

from ..causal.analysis import eligible_cohort, match_mode
from ..config import AnalysisConfig
from ..core.errors import VerificationError
from ..core.types import AnalysisMode
from ..decisions.go_range import GoRange
from .generate import generate_world_tables
from .world import Calibration, WorldConfig, expected_go_wp, expected_kick_wp, oracle_wp

logger = logging.getLogger(__name__)

EFFECT_GAMES = 4000
EFFECT_SEED = 90210
REMATCH_ROUNDS = 2
EFFECT_TOL = 0.001
# lower, upper for (wp_kappa, wp_y0)
SOLVE_BOUNDS = ([0.01, -40.0], [1.0, 45.0])
MODES = (AnalysisMode.INTEGER_BUCKET, AnalysisMode.PRECISE)

PairIndex = Dict[AnalysisMode, Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class EffectCalibration:
    world: WorldConfig
    naive_effect: float
    precise_effect: float
    n_pairs: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "wp_kappa": self.world.wp_kappa,
            "wp_y0": self.world.wp_y0,
            "naive_effect": self.naive_effect,
            "precise_effect": self.precise_effect,
            "n_pairs": dict(self.n_pairs),
        }


def expected_wpa(world: WorldConfig, latents: pd.DataFrame) -> np.ndarray:
    """Oracle WPA of each play's actual decision, averaged over its outcome."""
    d = latents["distance"].to_numpy(dtype=float)
    spot = latents["spot"].to_numpy(dtype=float)
    margin = latents["score_differential"].to_numpy(dtype=float)
    seconds = latents["seconds_remaining"].to_numpy(dtype=float)
    after = np.maximum(seconds - world.fourth_down_seconds, 0.0)
    post = np.where(latents["went_for_it"].to_numpy(dtype=bool),
                    expected_go_wp(world, d, spot, margin, after),
                    expected_kick_wp(world, spot, margin, after))
    return post - oracle_wp(world, margin, spot, seconds)


def pair_index(latents: pd.DataFrame, pairs: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    """Latent row positions of the (go, no-go) side of every pair."""
    row = {key: i for i, key in enumerate(zip(latents["game_id"].astype(str), latents["play_id"].astype(str)))}
    go = np.array([row[p.go_play_key] for p in pairs], dtype=int)
    no_go = np.array([row[p.no_go_play_key] for p in pairs], dtype=int)
    return go, no_go


def matched_effects(world: WorldConfig, latents: pd.DataFrame, index: Mapping[AnalysisMode, Tuple]) -> Dict:
    wpa = expected_wpa(world, latents)
    return {mode: float(np.mean(wpa[go] - wpa[no_go])) for mode, (go, no_go) in index.items()}


def _match_both(world: WorldConfig, calib: Calibration, go_range: GoRange, config: AnalysisConfig,
                n_games: int, seed: int, workers: int) -> Tuple[pd.DataFrame, PairIndex]:
    tables = generate_world_tables(world.replace(n_games=n_games), seed, go_range, calib, workers)
    cohort = eligible_cohort(tables.cohort)
    index: PairIndex = {}
    for mode in MODES:
        _, _, pairs, _ = match_mode(cohort, mode, config)
        index[mode] = pair_index(tables.latents, pairs)
    return tables.latents, index


def calibrate_effects(world: WorldConfig, calib: Calibration, go_range: GoRange,
                      config: Optional[AnalysisConfig] = None, n_games: int = EFFECT_GAMES,
                      seed: int = EFFECT_SEED, workers: int = 1) -> EffectCalibration:
    """
    Return ``world`` with ``wp_kappa`` and ``wp_y0`` solved so the matched
    effects hit ``target_naive_effect`` (integer buckets) and
    ``target_precise_effect`` (precise distance).
    """
    world.validate()
    config = config or AnalysisConfig()
    targets = np.array([world.target_naive_effect, world.target_precise_effect])

    solved = world
    for round_no in range(REMATCH_ROUNDS):
        latents, index = _match_both(solved, calib, go_range, config, n_games, seed, workers)

        def residuals(theta):
            trial = solved.replace(wp_kappa=float(theta[0]), wp_y0=float(theta[1]))
            effects = matched_effects(trial, latents, index)
            return np.array([effects[m] for m in MODES]) - targets

        fit = least_squares(residuals, x0=[solved.wp_kappa, solved.wp_y0], bounds=SOLVE_BOUNDS,
                            x_scale=[0.05, 10.0])
        solved = solved.replace(wp_kappa=float(fit.x[0]), wp_y0=float(fit.x[1]))
        logger.info("effect solve %d: wp_kappa %.4f, wp_y0 %.2f, residuals %s",
                    round_no + 1, solved.wp_kappa, solved.wp_y0, np.round(fit.fun, 5).tolist())

    effects = matched_effects(solved, latents, index)
    result = EffectCalibration(
        world=solved,
        naive_effect=effects[AnalysisMode.INTEGER_BUCKET],
        precise_effect=effects[AnalysisMode.PRECISE],
        n_pairs={mode.value: len(index[mode][0]) for mode in MODES},
    )
    missed = {mode.value: (effects[mode], float(t)) for mode, t in zip(MODES, targets)
              if abs(effects[mode] - t) > EFFECT_TOL}
    if missed:
        raise VerificationError("CALIBRATION_FAILED", f"matched effects missed {sorted(missed)}",
                                {"missed": missed, **result.to_dict()})
    logger.info("effect calibration: %s", result.to_dict())
    return result
