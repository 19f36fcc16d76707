# fourthdown/yardage/compute.py
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import pandas as pd

from ..core.types import PlayKey, PreciseYardage, YardageSource
from ..ingest.assemble import GameDataset
from .distance import SeriesContext, integer_bucket, line_to_gain, precise_distance, split_series

logger = logging.getLogger(__name__)

DISCREPANCY_COLUMNS = ["play_key", "pbp_bucket", "computed_bucket", "precise_yards", "flags"]


@dataclass
class YardageResult:
    yardages: Dict[PlayKey, PreciseYardage] = field(default_factory=dict)
    contexts: Dict[Tuple[str, str], SeriesContext] = field(default_factory=dict)
    pbp_buckets: Dict[PlayKey, int] = field(default_factory=dict)
    metadata: Dict = field(default_factory=lambda: {"ball_coords_less_reliable": True})

    def discrepancies(self) -> pd.DataFrame:
        """Plays whose ball-derived bucket disagrees with play-by-play, plus every flagged play."""
        rows = []
        for key, y in sorted(self.yardages.items()):
            pbp = self.pbp_buckets[key]
            mismatch = y.source != YardageSource.FALLBACK_INTEGER and y.bucket != pbp
            if not mismatch and not y.flags:
                continue
            rows.append({
                "play_key": f"{key[0]}:{key[1]}",
                "pbp_bucket": pbp,
                "computed_bucket": integer_bucket(y.yards) if y.source != YardageSource.FALLBACK_INTEGER else y.bucket,
                "precise_yards": y.yards,
                "flags": "|".join(y.flags),
            })
        return pd.DataFrame(rows, columns=DISCREPANCY_COLUMNS)

    def write_discrepancies(self, path) -> int:
        table = self.discrepancies()
        table.to_csv(path, index=False, lineterminator="\n")
        return len(table)

    def source_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for y in self.yardages.values():
            counts[y.source.value] = counts.get(y.source.value, 0) + 1
        return counts


def _usable_ball_track(ds: GameDataset, play_id: str):
    if play_id in ds.flags.get("DIRECTION_UNKNOWN", []) or not ds.has_ball_track(play_id):
        return None
    return ds.ball_track(play_id)


def game_yardage(ds: GameDataset):
    """Series contexts and precise distances for every fourth-down play of one normalized game."""
    contexts: Dict[Tuple[str, str], SeriesContext] = {}
    yardages: Dict[PlayKey, PreciseYardage] = {}
    for series_id, plays in split_series(ds.plays):
        tracks = {p.play_id: _usable_ball_track(ds, p.play_id) for p in plays}
        tracks = {k: v for k, v in tracks.items() if v is not None}
        context = line_to_gain(plays, tracks)
        contexts[(ds.game_id, series_id)] = context
        for play in plays:
            if play.is_fourth_down:
                yardages[play.key] = precise_distance(play, context, tracks.get(play.play_id))
    return contexts, yardages


def compute_yardage(datasets: Sequence[GameDataset], workers: int = 1) -> YardageResult:
    if workers > 1 and len(datasets) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(game_yardage, datasets))
    else:
        parts = [game_yardage(ds) for ds in datasets]

    result = YardageResult()
    for contexts, yardages in parts:
        result.contexts.update(contexts)
        result.yardages.update(yardages)
    for ds in datasets:
        for p in ds.plays:
            if p.key in result.yardages:
                result.pbp_buckets[p.key] = p.yards_to_go_integer

    counts = result.source_counts()
    result.metadata["sources"] = counts
    logger.info("precise distance for %d fourth downs %s", len(result.yardages), counts)
    return result


def yardage_table(result: YardageResult) -> pd.DataFrame:
    rows: List[Dict] = []
    for key, y in sorted(result.yardages.items()):
        rows.append({
            "game_id": key[0],
            "play_id": key[1],
            "precise_yards": y.yards,
            "bucket": y.bucket,
            "pbp_bucket": result.pbp_buckets.get(key),
            "source": y.source.value,
            "flags": "|".join(y.flags),
        })
    return pd.DataFrame(rows, columns=["game_id", "play_id", "precise_yards", "bucket", "pbp_bucket", "source", "flags"])
