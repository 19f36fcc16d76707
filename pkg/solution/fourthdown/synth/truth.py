# fourthdown/synth/truth.py
"""
Ground-truth effect of going for it in the synthetic world: the mean, over
eligible no-go fourth downs, of expected WP when forced to go minus
expected WP when kicking.
"""

import logging
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ..core.errors import DataError
from ..core.types import PlayKey
from ..decisions.go_range import GoRange
from .calibrate import eligible_mask, max_go_table, pilot_bank, pilot_world
from .world import (
    MAX_DISTANCE,
    SHORT_RANGE,
    Calibration,
    WorldConfig,
    conversion_probability,
    decision_probability,
    distance_density,
    expected_go_wp,
    expected_kick_wp,
    go_outcome_wp,
    kick_outcome_wp,
    sample_distance,
)

logger = logging.getLogger(__name__)

# the density has a kink at 2 yards and eligibility steps at every bucket edge
SEGMENTS = ((0.0, SHORT_RANGE), (SHORT_RANGE, 3.0), (3.0, MAX_DISTANCE))
MC_CHUNK = 200_000


def forced_go_gain(world: WorldConfig, distance, spot, margin, seconds):
    after = np.maximum(np.asarray(seconds, dtype=float) - world.fourth_down_seconds, 0.0)
    return expected_go_wp(world, distance, spot, margin, after) - expected_kick_wp(world, spot, margin, after)


def quadrature_nodes(panels: int = 16, nodes: int = 8):
    """Composite Gauss-Legendre nodes and weights over (0, 4], split at the segment edges."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    points, weights = [], []
    for a, b in SEGMENTS:
        edges = np.linspace(a, b, panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            points.append((hi - lo) / 2 * x + (hi + lo) / 2)
            weights.append((hi - lo) / 2 * w)
    return np.concatenate(points), np.concatenate(weights)


def _bank_arrays(bank: pd.DataFrame):
    return (bank["line_to_gain"].to_numpy(dtype=float),
            bank["score_differential"].to_numpy(dtype=float),
            bank["seconds_remaining"].to_numpy(dtype=float))


def true_effect(world: WorldConfig, calib: Calibration, go_range: GoRange,
                bank: Optional[pd.DataFrame] = None, panels: int = 16, nodes: int = 8) -> float:
    bank = pilot_bank(pilot_world(world), go_range) if bank is None else bank
    table = max_go_table(go_range)
    ltg, margin, seconds = _bank_arrays(bank)
    num = den = 0.0
    for d, w in zip(*quadrature_nodes(panels, nodes)):
        spot = ltg - d
        elig = eligible_mask(table, ltg, np.full(len(ltg), d))
        pi = decision_probability(world, calib, d, spot, margin)
        weight = w * float(distance_density(world, calib, d)) * (1.0 - pi) * elig
        num += float((weight * forced_go_gain(world, d, spot, margin, seconds)).sum())
        den += float(weight.sum())
    if den <= 0:
        raise DataError("NO_ELIGIBLE_PLAYS", "no eligible no-go states in the world")
    return num / den


def monte_carlo_effect(world: WorldConfig, calib: Calibration, go_range: GoRange, n_pairs: int = 1_000_000,
                       seed: int = 0, bank: Optional[pd.DataFrame] = None) -> float:
    """
    Realized go-minus-kick WP over ``n_pairs`` simulated eligible no-go
    plays, each played both ways.
    """
    bank = pilot_bank(pilot_world(world), go_range) if bank is None else bank
    table = max_go_table(go_range)
    ltg, margin, seconds = _bank_arrays(bank)
    rng = np.random.default_rng(seed)
    total, count = 0.0, 0
    while count < n_pairs:
        rows = rng.integers(0, len(bank), MC_CHUNK)
        d = sample_distance(world, calib, rng, MC_CHUNK)
        spot = ltg[rows] - d
        s, t = margin[rows], seconds[rows]
        elig = eligible_mask(table, ltg[rows], d)
        went = rng.random(MC_CHUNK) < decision_probability(world, calib, d, spot, s)
        after = np.maximum(t - world.fourth_down_seconds, 0.0)
        converted = rng.random(MC_CHUNK) < conversion_probability(world, d)
        converted_wp, failed_wp = go_outcome_wp(world, d, spot, s, after)
        made_wp, missed_wp, p_make = kick_outcome_wp(world, spot, s, after)
        made = rng.random(MC_CHUNK) < p_make
        diff = np.where(converted, converted_wp, failed_wp) - np.where(made, made_wp, missed_wp)
        kept = diff[elig & ~went][: n_pairs - count]
        if count == 0 and len(kept) == 0:
            raise DataError("NO_ELIGIBLE_PLAYS", "no eligible no-go states in the world")
        total += float(kept.sum())
        count += len(kept)
    return total / count


def sample_true_effect(latents: Sequence[dict]) -> float:
    """The same quantity over the eligible no-go plays that were actually generated."""
    gains = [r["expected_go_wp"] - r["expected_kick_wp"] for r in latents if r["eligible"] and not r["went_for_it"]]
    if not gains:
        raise DataError("NO_ELIGIBLE_PLAYS", "no eligible no-go plays were generated")
    return float(np.mean(gains))


def forced_go_gains(latents) -> Dict[PlayKey, float]:
    """Forced-go WP gain per generated fourth down, keyed by (game_id, play_id)."""
    frame = pd.DataFrame(latents)
    if frame.empty:
        return {}
    if "forced_go_gain" in frame:
        gain = frame["forced_go_gain"]
    else:
        gain = frame["expected_go_wp"] - frame["expected_kick_wp"]
    keys = zip(frame["game_id"].astype(str), frame["play_id"].astype(str))
    return dict(zip(keys, gain.astype(float)))


def matched_true_effect(gains: Mapping[PlayKey, float], pairs) -> float:
    """
    Forced-go gain averaged over the no-go plays that found a go match.
    This is the quantity a matched-pair estimate targets; it differs from
    the population effect when go plays are scarce for some kicks.
    """
    if not pairs:
        raise DataError("NO_MATCHED_PAIRS", "no pairs to average the truth over")
    missing = [p.no_go_play_key for p in pairs if p.no_go_play_key not in gains]
    if missing:
        raise DataError("MISSING_LATENT", f"{len(missing)} matched kicks have no latent record",
                        {"first": list(missing[0])})
    return float(np.mean([gains[p.no_go_play_key] for p in pairs]))
