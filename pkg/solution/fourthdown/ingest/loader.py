# fourthdown/ingest/loader.py
"""Concurrent file loading: every file parses on its own worker."""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from ..config import AnalysisConfig
from .assemble import AssemblyResult, assemble_games
from .parsers import GameMeta, ParseReport, PlayParse, TrackingParse, parse_games, parse_plays, parse_tracking

logger = logging.getLogger(__name__)


def load_dataset(tracking_paths: Sequence[str], plays_paths: Sequence[str], config: AnalysisConfig,
                 games_path: Optional[str] = None):
    """
    Parse every tracking and play file concurrently and assemble the games.
    Returns (AssemblyResult, list of ParseReport).
    """
    schema = config.schema
    workers = config.worker_count
    with ThreadPoolExecutor(max_workers=workers) as pool:
        tracking_jobs = [pool.submit(parse_tracking, Path(p), schema) for p in tracking_paths]
        play_jobs = [pool.submit(parse_plays, Path(p), schema) for p in plays_paths]
        tracking: List[TrackingParse] = [j.result() for j in tracking_jobs]
        plays: List[PlayParse] = [j.result() for j in play_jobs]

    games: Optional[List[GameMeta]] = parse_games(Path(games_path), schema) if games_path else None

    frames = TrackingParse(
        frames=pd.concat([t.frames for t in tracking], ignore_index=True) if tracking else pd.DataFrame(),
        report=ParseReport(source="+".join(str(p) for p in tracking_paths)),
    )
    merged_plays = PlayParse(
        records=[r for p in plays for r in p.records],
        directions={k: v for p in plays for k, v in p.directions.items()},
        report=ParseReport(source="+".join(str(p) for p in plays_paths)),
    )
    result: AssemblyResult = assemble_games(frames, merged_plays, games, workers=workers)
    reports = [t.report for t in tracking] + [p.report for p in plays]
    return result, reports
