# fourthdown/synth/calibrate.py
"""
Calibrate the synthetic world's free coefficients against the fourth-down
state distribution of a pilot simulation.

The decision logit is solved so the mean go rate over eligible states is
the short-yardage target at 4th-and-inches and the long target at a long
4th-and-1. The scaled Beta of the short part of the distance mixture is
then solved so the 4th-and-1 medians of the go and no-go groups hit their
targets.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Dict, Optional

import numpy as np
import pandas as pd
from scipy.optimize import least_squares
from scipy.stats import beta as beta_dist

from ..core.errors import VerificationError
from ..decisions.go_range import GoRange
from .game import BANK_COLUMNS, PILOT_CALIBRATION, GameSimulator
from .world import (
    INCHES,
    LONG_ONE,
    SHORT_RANGE,
    Calibration,
    WorldConfig,
    conversion_probability,
    decision_probability,
)

logger = logging.getLogger(__name__)

GRID_POINTS = 400
CHUNK = 50
CALIBRATION_TOL = 0.01


def max_go_table(go_range: GoRange) -> np.ndarray:
    """max_distance_go per integer yardline 0-99."""
    return np.array([go_range.max_distance(yl) for yl in range(100)], dtype=int)


def eligible_mask(table: np.ndarray, line_to_gain, distance) -> np.ndarray:
    """Vectorized GoRange.eligible(pbp_yardline(ltg - d), integer_bucket(d))."""
    d = np.asarray(distance, dtype=float)
    spot = np.asarray(line_to_gain, dtype=float) - d
    yardline = np.clip(np.floor(spot + 0.5), 1, 99).astype(int)
    bucket = np.where(d < 2.0, 1, np.floor(d)).astype(int)
    return bucket <= table[yardline]


def _pilot_chunk(world: WorldConfig, go_range: GoRange, indices: range):
    simulator = GameSimulator(world, PILOT_CALIBRATION, go_range, tracking=False, collect_states=True)
    states = []
    for i in indices:
        states.extend(simulator.play_game(i, world.pilot_seed).states)
    return states


def pilot_world(world: WorldConfig) -> WorldConfig:
    """The world with everything the pilot run ignores reset, so equal pilots share a cache entry."""
    # the oracle only labels states, it never moves them
    return world.replace(n_games=1, players_per_frame=0, beta_a=None, beta_b=None,
                         decision_intercept=None, decision_distance=None,
                         wp_kappa=WorldConfig.wp_kappa, wp_y0=WorldConfig.wp_y0,
                         target_naive_effect=WorldConfig.target_naive_effect,
                         target_precise_effect=WorldConfig.target_precise_effect)


@lru_cache(maxsize=8)
def pilot_bank(world: WorldConfig, go_range: GoRange, workers: int = 1) -> pd.DataFrame:
    """Fourth-down states of ``world.pilot_games`` pilot games, in game order."""
    chunks = [range(s, min(s + CHUNK, world.pilot_games)) for s in range(0, world.pilot_games, CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _pilot_chunk(world, go_range, r), chunks))
    else:
        parts = [_pilot_chunk(world, go_range, r) for r in chunks]
    bank = pd.DataFrame([s for part in parts for s in part], columns=BANK_COLUMNS)
    logger.info("pilot bank: %d fourth-down states from %d games", len(bank), world.pilot_games)
    return bank


def _spot_terms(bank: pd.DataFrame, distance: float):
    ltg = bank["line_to_gain"].to_numpy(dtype=float)
    return ltg - distance, bank["score_differential"].to_numpy(dtype=float)


def go_rate(world: WorldConfig, calib: Calibration, bank: pd.DataFrame, table: np.ndarray, distance: float) -> float:
    """Mean go probability over bank states eligible at this distance."""
    spot, margin = _spot_terms(bank, distance)
    elig = eligible_mask(table, bank["line_to_gain"].to_numpy(dtype=float), np.full(len(bank), distance))
    if not elig.any():
        return float("nan")
    return float(decision_probability(world, calib, distance, spot[elig], margin[elig]).mean())


def _decision_weights(world: WorldConfig, calib: Calibration, bank: pd.DataFrame, table: np.ndarray,
                      grid: np.ndarray):
    """Per grid distance: mean of elig * pi and of elig * (1 - pi) over the bank."""
    ltg = bank["line_to_gain"].to_numpy(dtype=float)
    margin = bank["score_differential"].to_numpy(dtype=float)
    go = np.empty(len(grid))
    no_go = np.empty(len(grid))
    for start in range(0, len(grid), CHUNK):
        d = grid[start:start + CHUNK, None]
        spot = ltg[None, :] - d
        elig = eligible_mask(table, ltg[None, :], np.broadcast_to(d, spot.shape))
        pi = decision_probability(world, calib, d, spot, margin[None, :])
        go[start:start + CHUNK] = (elig * pi).mean(axis=1)
        no_go[start:start + CHUNK] = (elig * (1.0 - pi)).mean(axis=1)
    return go, no_go


def _weighted_median(grid: np.ndarray, weights: np.ndarray) -> float:
    cdf = np.cumsum(weights)
    cdf = cdf / cdf[-1]
    step = grid[1] - grid[0]
    edges = np.concatenate([[grid[0] - step / 2], grid + step / 2])
    return float(np.interp(0.5, np.concatenate([[0.0], cdf]), edges))


def short_medians(a: float, b: float, grid: np.ndarray, go_weights: np.ndarray, no_go_weights: np.ndarray):
    density = beta_dist.pdf(grid / SHORT_RANGE, a, b)
    return _weighted_median(grid, density * go_weights), _weighted_median(grid, density * no_go_weights)


def calibrate(world: WorldConfig, go_range: GoRange, workers: int = 1,
              bank: Optional[pd.DataFrame] = None) -> Calibration:
    """Fill the world's unset decision and distance coefficients."""
    world.validate()
    bank = pilot_bank(pilot_world(world), go_range, workers) if bank is None else bank
    table = max_go_table(go_range)

    c0, cd = world.decision_intercept, world.decision_distance
    if c0 is None or cd is None:
        def decision_residuals(theta):
            calib = Calibration(theta[0], theta[1], 2.0, 2.0)
            return [go_rate(world, calib, bank, table, INCHES) - world.target_go_short,
                    go_rate(world, calib, bank, table, LONG_ONE) - world.target_go_long]

        fit = least_squares(decision_residuals, x0=[PILOT_CALIBRATION.decision_intercept,
                                                    PILOT_CALIBRATION.decision_distance])
        c0 = float(fit.x[0]) if c0 is None else c0
        cd = float(fit.x[1]) if cd is None else cd

    grid = (np.arange(GRID_POINTS) + 0.5) * SHORT_RANGE / GRID_POINTS
    go_w, no_go_w = _decision_weights(world, Calibration(c0, cd, 2.0, 2.0), bank, table, grid)
    a, b = world.beta_a, world.beta_b
    if a is None or b is None:
        def median_residuals(theta):
            go_med, no_go_med = short_medians(theta[0], theta[1], grid, go_w, no_go_w)
            return [go_med - world.target_median_go, no_go_med - world.target_median_no_go]

        fit = least_squares(median_residuals, x0=[2.0, 2.0], bounds=([1.0, 1.0], [50.0, 50.0]))
        a = float(fit.x[0]) if a is None else a
        b = float(fit.x[1]) if b is None else b

    calib = Calibration(c0, cd, a, b)
    achieved = calibration_summary(world, calib, bank, table, grid, go_w, no_go_w)
    calib = Calibration(c0, cd, a, b, achieved)
    logger.info("calibrated world: %s", calib.to_dict())
    return calib


def calibration_summary(world: WorldConfig, calib: Calibration, bank: pd.DataFrame, table: np.ndarray,
                        grid: np.ndarray, go_w: np.ndarray, no_go_w: np.ndarray) -> Dict[str, float]:
    go_med, no_go_med = short_medians(calib.beta_a, calib.beta_b, grid, go_w, no_go_w)
    return {
        "go_rate_short": go_rate(world, calib, bank, table, INCHES),
        "go_rate_long": go_rate(world, calib, bank, table, LONG_ONE),
        "median_go": go_med,
        "median_no_go": no_go_med,
        "conversion_short": float(conversion_probability(world, INCHES)),
        "conversion_long": float(conversion_probability(world, LONG_ONE)),
        "bank_states": int(len(bank)),
    }


def check_calibration(world: WorldConfig, calib: Calibration, tol: float = CALIBRATION_TOL) -> None:
    """Raise when the solved world misses a target by more than ``tol``."""
    targets = {
        "go_rate_short": world.target_go_short,
        "go_rate_long": world.target_go_long,
        "median_go": world.target_median_go,
        "median_no_go": world.target_median_no_go,
    }
    missed = {k: (calib.achieved.get(k), v) for k, v in targets.items()
              if calib.achieved.get(k) is None or abs(calib.achieved[k] - v) > tol}
    if missed:
        raise VerificationError("CALIBRATION_FAILED", f"calibration missed {sorted(missed)}", {"missed": missed})

