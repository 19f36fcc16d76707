# fourthdown/ingest/assemble.py
"""
Join parsed tracking frames with play-by-play records into per-game
datasets. Referential problems are reported, never silently dropped:
frames whose play is unknown land in the orphan report, plays without a
ball track are flagged and kept for play-by-play-only analyses.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd

from ..core.errors import DataError
from ..core.types import BALL, Direction, PlayKey, PlayRecord
from .parsers import GameMeta, PlayParse, TrackingParse

logger = logging.getLogger(__name__)


def play_sort_key(play_id: str):
    return (0, int(play_id), "") if play_id.isdigit() else (1, 0, play_id)


@dataclass
class GameDataset:
    game_meta: GameMeta
    plays: List[PlayRecord]
    frames: pd.DataFrame
    track_index: Dict[Tuple[str, str], Tuple[int, int]] = field(default_factory=dict)
    directions: Dict[PlayKey, Direction] = field(default_factory=dict)
    flags: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def game_id(self) -> str:
        return self.game_meta.game_id

    def track(self, play_id: str, entity_id: str) -> pd.DataFrame:
        span = self.track_index.get((play_id, entity_id))
        if span is None:
            return self.frames.iloc[0:0]
        return self.frames.iloc[span[0]:span[1]]

    def ball_track(self, play_id: str) -> pd.DataFrame:
        return self.track(play_id, BALL)

    def play_frames(self, play_id: str) -> pd.DataFrame:
        spans = [span for (pid, _), span in self.track_index.items() if pid == play_id]
        if not spans:
            return self.frames.iloc[0:0]
        start = min(s for s, _ in spans)
        stop = max(e for _, e in spans)
        return self.frames.iloc[start:stop]

    def tracked_play_ids(self) -> Set[str]:
        return {pid for pid, _ in self.track_index}

    def has_ball_track(self, play_id: str) -> bool:
        return (play_id, BALL) in self.track_index

    def play(self, play_id: str) -> Optional[PlayRecord]:
        for p in self.plays:
            if p.play_id == play_id:
                return p
        return None

    def same_as(self, other: "GameDataset") -> bool:
        cols = ["game_id", "play_id", "entity_id", "frame_index", "timestamp", "x", "y", "speed", "direction", "event"]
        left = self.frames[cols].reset_index(drop=True)
        right = other.frames[cols].reset_index(drop=True)
        return (
            self.game_meta == other.game_meta
            and self.plays == other.plays
            and left.equals(right)
            and self.track_index == other.track_index
        )


@dataclass
class AssemblyResult:
    datasets: List[GameDataset]
    orphans: pd.DataFrame
    no_ball_track: List[PlayKey]

    def orphan_report(self) -> pd.DataFrame:
        if self.orphans.empty:
            return pd.DataFrame(columns=["game_id", "play_id", "n_frames"])
        return (
            self.orphans.groupby(["game_id", "play_id"]).size().rename("n_frames").reset_index()
        )

    def dataset(self, game_id: str) -> Optional[GameDataset]:
        for ds in self.datasets:
            if ds.game_id == game_id:
                return ds
        return None


def _build_track_index(frames: pd.DataFrame) -> Dict[Tuple[str, str], Tuple[int, int]]:
    if frames.empty:
        return {}
    keys = frames["play_id"].to_numpy(dtype=object) + "\x00" + frames["entity_id"].to_numpy(dtype=object)
    change = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    stops = np.r_[change[1:], len(keys)]
    index = {}
    for start, stop in zip(change, stops):
        play_id, entity_id = keys[start].split("\x00", 1)
        index[(play_id, entity_id)] = (int(start), int(stop))
    return index


def assemble_game(meta: GameMeta, plays: List[PlayRecord], frames: pd.DataFrame,
                  directions: Dict[PlayKey, Direction]) -> Tuple[GameDataset, List[PlayKey]]:
    plays = sorted(plays, key=lambda p: play_sort_key(p.play_id))
    order = {pid: rank for rank, pid in enumerate(sorted(frames["play_id"].unique(), key=play_sort_key))}
    frames = (
        frames.assign(_play_order=frames["play_id"].map(order))
        .sort_values(["_play_order", "entity_id", "frame_index"], kind="mergesort")
        .drop(columns="_play_order")
        .reset_index(drop=True)
    )
    track_index = _build_track_index(frames)

    tracked = {pid for pid, _ in track_index}
    missing_ball = [p.key for p in plays if p.play_id in tracked and (p.play_id, BALL) not in track_index]
    untracked = [p.play_id for p in plays if p.play_id not in tracked]
    flags = {}
    if missing_ball:
        flags["NO_BALL_TRACK"] = [pid for _, pid in missing_ball]
        logger.warning("game %s: %d tracked plays without a ball track", meta.game_id, len(missing_ball))
    if untracked:
        flags["NO_TRACKING"] = untracked
    ds = GameDataset(
        game_meta=meta,
        plays=plays,
        frames=frames,
        track_index=track_index,
        directions={k: v for k, v in directions.items() if k[0] == meta.game_id},
        flags=flags,
    )
    return ds, missing_ball


def assemble_games(frames: TrackingParse, plays: PlayParse, games: Optional[Sequence[GameMeta]] = None,
                   workers: int = 1) -> AssemblyResult:
    frame_table = frames.frames if isinstance(frames, TrackingParse) else frames
    records = plays.records if isinstance(plays, PlayParse) else list(plays)
    directions = plays.directions if isinstance(plays, PlayParse) else {}

    seen: Set[PlayKey] = set()
    by_game: Dict[str, List[PlayRecord]] = {}
    for record in records:
        if record.key in seen:
            raise DataError("DUPLICATE_PLAY_KEY", f"play {record.key} appears twice", {"play_key": list(record.key)})
        seen.add(record.key)
        by_game.setdefault(record.game_id, []).append(record)

    metas: Dict[str, GameMeta] = {g.game_id: g for g in (games or [])}
    for game_id, game_plays in by_game.items():
        if game_id not in metas:
            first = game_plays[0]
            metas[game_id] = GameMeta(game_id=game_id, season=0, week=0,
                                      home_team=first.home_team, away_team=first.away_team)

    known = pd.MultiIndex.from_tuples(sorted(seen)) if seen else None
    if known is not None and not frame_table.empty:
        keys = pd.MultiIndex.from_arrays([frame_table["game_id"], frame_table["play_id"]])
        in_plays = keys.isin(known)
    else:
        in_plays = np.zeros(len(frame_table), dtype=bool)
    orphans = frame_table[~in_plays]
    matched = frame_table[in_plays]
    if len(orphans):
        logger.warning("%d frames reference plays absent from play-by-play", len(orphans))

    grouped = {gid: df for gid, df in matched.groupby("game_id", sort=False)} if len(matched) else {}
    empty = frame_table.iloc[0:0]
    game_ids = sorted(by_game)

    def work(game_id: str):
        return assemble_game(metas[game_id], by_game[game_id], grouped.get(game_id, empty), directions)

    if workers > 1 and len(game_ids) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, game_ids))
    else:
        results = [work(gid) for gid in game_ids]

    datasets = [ds for ds, _ in results]
    no_ball = [key for _, keys in results for key in keys]
    logger.info("assembled %d games (%d orphan frames, %d plays without ball track)",
                len(datasets), len(orphans), len(no_ball))
    return AssemblyResult(datasets=datasets, orphans=orphans.reset_index(drop=True), no_ball_track=no_ball)


def iter_plays(datasets: Iterable[GameDataset]):
    for ds in datasets:
        for play in ds.plays:
            yield ds, play
