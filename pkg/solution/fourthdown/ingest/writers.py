# fourthdown/ingest/writers.py
"""Serialize assembled datasets back into the ingest CSV schemas."""

from typing import IO, Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from ..config import SchemaConfig
from ..core.types import BALL, PlayRecord
from .assemble import GameDataset
from .parsers import GameMeta

Target = Union[str, IO]


def tracking_frame_table(frames: pd.DataFrame, schema: SchemaConfig) -> pd.DataFrame:
    cols = schema.tracking
    out = pd.DataFrame({
        cols["game_id"]: frames["game_id"],
        cols["play_id"]: frames["play_id"],
        cols["entity_id"]: frames["entity_id"].where(frames["entity_id"] != BALL, schema.ball_sentinel),
        cols["frame_index"]: frames["frame_index"].astype(np.int64),
        cols["timestamp"]: frames["timestamp"],
        cols["x"]: frames["x"],
        cols["y"]: frames["y"],
    })
    for name in ("speed", "direction", "event"):
        if name in cols and name in frames.columns:
            out[cols[name]] = frames[name]
    return out


def play_rows(plays: Iterable[PlayRecord], schema: SchemaConfig, directions=None) -> pd.DataFrame:
    cols = schema.plays
    rows = []
    for p in plays:
        yl = p.yardline_from_own_goal
        if yl <= 50:
            number, side = yl, p.possession_team
        else:
            number, side = 100 - yl, p.defense_team
        home_has_ball = p.possession_team == p.home_team
        home_diff = p.score_differential if home_has_ball else -p.score_differential
        row = {
            cols["game_id"]: p.game_id,
            cols["play_id"]: p.play_id,
            cols["quarter"]: p.quarter,
            cols["game_clock"]: _format_clock(p.game_clock_remaining),
            cols["down"]: p.down,
            cols["yards_to_go"]: p.yards_to_go_integer,
            cols["possession_team"]: p.possession_team,
            cols["home_team"]: p.home_team,
            cols["away_team"]: p.away_team,
            cols["yardline_number"]: _format_number(number),
            cols["yardline_side"]: side,
            cols["score_home"]: max(home_diff, 0),
            cols["score_away"]: max(-home_diff, 0),
            cols["home_timeouts"]: p.timeouts_possession if home_has_ball else p.timeouts_opponent,
            cols["away_timeouts"]: p.timeouts_opponent if home_has_ball else p.timeouts_possession,
            cols["play_type"]: p.play_type.value,
            cols["yards_gained"]: p.yards_gained,
            cols["series_id"]: p.series_id,
            cols["goal_to_go"]: int(p.goal_to_go),
        }
        if directions is not None and "play_direction" in cols:
            d = directions.get(p.key)
            row[cols["play_direction"]] = d.value if d is not None else ""
        rows.append(row)
    return pd.DataFrame(rows)


def _format_clock(seconds: float) -> str:
    whole = int(round(seconds))
    if abs(seconds - whole) > 1e-9:
        return repr(float(seconds))
    return f"{whole // 60:02d}:{whole % 60:02d}"


def _format_number(value: float):
    return int(value) if float(value).is_integer() else value


def games_table(metas: Sequence[GameMeta], schema: SchemaConfig) -> pd.DataFrame:
    cols = schema.games
    return pd.DataFrame([{
        cols["game_id"]: g.game_id,
        cols["season"]: g.season,
        cols["week"]: g.week,
        cols["home_team"]: g.home_team,
        cols["away_team"]: g.away_team,
        cols["home_final"]: "" if g.home_final is None else g.home_final,
        cols["away_final"]: "" if g.away_final is None else g.away_final,
    } for g in metas])


def write_tracking(datasets: Sequence[GameDataset], target: Target, schema: SchemaConfig) -> int:
    tables = [tracking_frame_table(ds.frames, schema) for ds in datasets]
    table = pd.concat(tables, ignore_index=True) if tables else tracking_frame_table(pd.DataFrame(
        columns=["game_id", "play_id", "entity_id", "frame_index", "timestamp", "x", "y", "speed", "direction", "event"]
    ), schema)
    table.to_csv(target, index=False, lineterminator="\n")
    return len(table)


def write_plays(datasets: Sequence[GameDataset], target: Target, schema: SchemaConfig) -> int:
    plays: List[PlayRecord] = [p for ds in datasets for p in ds.plays]
    directions = {}
    for ds in datasets:
        directions.update(ds.directions)
    table = play_rows(plays, schema, directions if directions else None)
    table.to_csv(target, index=False, lineterminator="\n")
    return len(table)


def write_games(metas: Sequence[GameMeta], target: Target, schema: SchemaConfig) -> int:
    table = games_table(metas, schema)
    table.to_csv(target, index=False, lineterminator="\n")
    return len(table)
