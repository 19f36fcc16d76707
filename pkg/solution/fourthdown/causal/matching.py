# fourthdown/causal/matching.py
"""
Greedy 1:1 nearest-neighbour matching on the logit of the propensity score,
without replacement.

Both groups are first put in play-key order so the result does not depend
on how the caller ordered its rows; the no-go plays are then visited in a
seeded random order. Each no-go play takes the closest unused go play
(ties go to the earlier play key) and the pair is kept when the distance
is within the caliper.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.errors import DataError
from ..core.types import PlayKey

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchedPair:
    no_go_play_key: PlayKey
    go_play_key: PlayKey
    propensity_distance: float


def default_caliper(logits: Sequence[float], multiplier: float = 0.2) -> float:
    values = np.asarray(logits, dtype=float)
    return float(multiplier * values.std(ddof=1)) if len(values) > 1 else 0.0


def _keyed(frame: pd.DataFrame) -> Tuple[List[PlayKey], np.ndarray]:
    ordered = frame.sort_values(["game_id", "play_id"], kind="mergesort")
    keys = list(zip(ordered["game_id"], ordered["play_id"]))
    return keys, ordered["logit"].to_numpy(dtype=float)


def match_plays(no_go: pd.DataFrame, go: pd.DataFrame, caliper: float, seed: int) -> List[MatchedPair]:
    """
    no_go, go: frames with game_id, play_id and logit (logit propensity).
    Pairs come back in matching order.
    """
    no_go_keys, no_go_logit = _keyed(no_go)
    go_keys, go_logit = _keyed(go)
    if len(set(go_keys)) != len(go_keys) or len(set(no_go_keys)) != len(no_go_keys):
        raise DataError("DUPLICATE_PLAY_KEY", "a play appears twice in a matching group")

    order = np.random.default_rng(seed).permutation(len(no_go_keys))
    used = np.zeros(len(go_keys), dtype=bool)
    pairs: List[MatchedPair] = []
    for i in order:
        if used.all():
            break
        dist = np.abs(go_logit - no_go_logit[i])
        dist[used] = np.inf
        j = int(np.argmin(dist))
        if dist[j] <= caliper:
            used[j] = True
            pairs.append(MatchedPair(no_go_keys[i], go_keys[j], float(dist[j])))

    if not pairs:
        raise DataError(
            "NO_MATCHES",
            f"no pair within caliper {caliper:.4g} ({len(no_go_keys)} no-go, {len(go_keys)} go plays)",
            {"caliper": caliper, "n_no_go": len(no_go_keys), "n_go": len(go_keys)},
        )
    logger.info("matched %d of %d no-go plays (caliper %.4g)", len(pairs), len(no_go_keys), caliper)
    return pairs


def pairs_frame(pairs: Sequence[MatchedPair]) -> pd.DataFrame:
    return pd.DataFrame({
        "no_go_game_id": [p.no_go_play_key[0] for p in pairs],
        "no_go_play_id": [p.no_go_play_key[1] for p in pairs],
        "go_game_id": [p.go_play_key[0] for p in pairs],
        "go_play_id": [p.go_play_key[1] for p in pairs],
        "propensity_distance": [p.propensity_distance for p in pairs],
    })
