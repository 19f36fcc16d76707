# fourthdown/ingest/parsers.py
"""
CSV parsers for tracking frames, play-by-play rows and game metadata.

Columns are looked up through the schema mapping in ``SchemaConfig`` so a
source with different headers only needs a config change. Bad rows are
collected with their file line number; the parse only aborts when the
number of rejected rows exceeds the configured error budget.
"""

import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Dict, Iterator, List, Optional, Union

import numpy as np
import pandas as pd

from ..config import OPTIONAL_PLAY_FIELDS, REQUIRED_TRACKING_FIELDS, SchemaConfig
from ..core.errors import DataError
from ..core.types import BALL, Direction, FieldPoint, PlayKey, PlayRecord, PlayType, TrackingFrame
from ..core.validation import out_of_range_mask, snap_array, spacing_violations

logger = logging.getLogger(__name__)

Source = Union[str, Path, bytes, BinaryIO]

# pandas treats the first data row as file line 2
HEADER_OFFSET = 2

TRACKING_COLUMNS = ["game_id", "play_id", "entity_id", "frame_index", "timestamp",
                    "x", "y", "speed", "direction", "event", "line"]

PLAY_TYPE_ALIASES = {
    "RUN": PlayType.RUN, "RUSH": PlayType.RUN,
    "PASS": PlayType.PASS,
    "PUNT": PlayType.PUNT,
    "FIELD_GOAL": PlayType.FIELD_GOAL, "FIELDGOAL": PlayType.FIELD_GOAL, "FG": PlayType.FIELD_GOAL,
    "PENALTY": PlayType.PENALTY, "NO_PLAY": PlayType.PENALTY,
}


@dataclass
class RowError:
    line: int
    code: str
    message: str


@dataclass
class ParseReport:
    source: str
    n_rows: int = 0
    n_accepted: int = 0
    errors: List[RowError] = field(default_factory=list)
    flags: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "source": self.source,
            "n_rows": self.n_rows,
            "n_accepted": self.n_accepted,
            "n_errors": len(self.errors),
            "errors": [e.__dict__ for e in self.errors[:100]],
            "flags": dict(self.flags),
        }


@dataclass
class TrackingParse:
    frames: pd.DataFrame
    report: ParseReport

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[TrackingFrame]:
        return iter_frames(self.frames)


@dataclass
class PlayParse:
    records: List[PlayRecord]
    directions: Dict[PlayKey, Direction]
    report: ParseReport

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class GameMeta:
    game_id: str
    season: int
    week: int
    home_team: str
    away_team: str
    home_final: Optional[int] = None
    away_final: Optional[int] = None

    def winner(self) -> Optional[str]:
        if self.home_final is None or self.away_final is None:
            return None
        if self.home_final == self.away_final:
            return None
        return self.home_team if self.home_final > self.away_final else self.away_team


def _read_raw(source: Source) -> pd.DataFrame:
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    name = str(source) if isinstance(source, (str, Path)) else getattr(source, "name", "<stream>")
    try:
        df = pd.read_csv(source, dtype=str, keep_default_na=False, na_filter=False)
    except pd.errors.EmptyDataError as exc:
        raise DataError("EMPTY_FILE", f"{name} has no header") from exc
    if df.empty:
        raise DataError("EMPTY_FILE", f"{name} has no data rows")
    df.attrs["source"] = name
    return df


def _require(df: pd.DataFrame, mapping: Dict[str, str], required) -> None:
    missing = [mapping[f] for f in required if mapping.get(f) not in df.columns]
    if missing:
        raise DataError("MISSING_COLUMN", f"missing column(s) {missing}", {"columns": missing})


def _numeric(series: pd.Series) -> pd.Series:
    return pd.to_numeric(series.replace("", np.nan).replace("NA", np.nan), errors="coerce")


def _enforce_budget(report: ParseReport, budget: float) -> None:
    allowed = int(math.floor(budget * report.n_rows))
    if len(report.errors) > allowed:
        first = report.errors[0]
        raise DataError(
            "UNPARSEABLE_ROW",
            f"{len(report.errors)} bad rows in {report.source} (budget {allowed}); first at line {first.line}: {first.message}",
            {"lines": [e.line for e in report.errors[:50]], "codes": sorted({e.code for e in report.errors})},
        )
    if report.errors:
        logger.warning("%s: %d rows rejected within error budget", report.source, len(report.errors))


def _collect(report: ParseReport, mask: pd.Series, code: str, message: str) -> None:
    for idx in np.flatnonzero(mask.to_numpy()):
        report.errors.append(RowError(int(idx) + HEADER_OFFSET, code, message))


def _timestamps_to_seconds(raw: pd.Series) -> pd.Series:
    numeric = _numeric(raw)
    if numeric.notna().all() or raw.eq("").all():
        return numeric
    parsed = pd.to_datetime(raw.where(raw != ""), errors="coerce", utc=True)
    seconds = (parsed - pd.Timestamp("1970-01-01", tz="UTC")).dt.total_seconds()
    return numeric.fillna(seconds)


def parse_tracking(source: Source, schema: SchemaConfig) -> TrackingParse:
    """Parse a header-first tracking CSV into a canonical frame table."""
    raw = _read_raw(source)
    cols = schema.tracking
    _require(raw, cols, REQUIRED_TRACKING_FIELDS)
    report = ParseReport(source=raw.attrs["source"], n_rows=len(raw))

    def col(name: str) -> pd.Series:
        key = cols.get(name)
        if key in raw.columns:
            return raw[key]
        return pd.Series([""] * len(raw), index=raw.index, dtype=str)

    entity = col("entity_id").str.strip()
    # real files write the ball's id as NA or as a decimal float
    entity = entity.where(entity != schema.ball_sentinel, BALL)
    entity = entity.where(~entity.isin(["NA", "nan"]), BALL)
    entity = entity.str.replace(r"\.0$", "", regex=True)

    frames = pd.DataFrame({
        "game_id": col("game_id").str.strip(),
        "play_id": col("play_id").str.strip(),
        "entity_id": entity,
        "frame_index": _numeric(col("frame_index")),
        "timestamp": _timestamps_to_seconds(col("timestamp").str.strip()),
        "x": _numeric(col("x")),
        "y": _numeric(col("y")),
        "speed": _numeric(col("speed")),
        "direction": _numeric(col("direction")),
        "event": col("event").str.strip().replace({"": None, "None": None, "NA": None}),
        "line": np.arange(len(raw)) + HEADER_OFFSET,
    })

    bad_ids = (frames["game_id"] == "") | (frames["play_id"] == "")
    bad_index = frames["frame_index"].isna() | (frames["frame_index"] < 0) | (frames["frame_index"] % 1 != 0)
    bad_time = frames["timestamp"].isna()
    bad_xy = frames["x"].isna() | frames["y"].isna()
    _collect(report, bad_ids, "UNPARSEABLE_ROW", "missing game or play id")
    _collect(report, bad_index & ~bad_ids, "UNPARSEABLE_ROW", "frame index is not a nonnegative integer")
    _collect(report, bad_time & ~bad_ids & ~bad_index, "UNPARSEABLE_ROW", "unparseable timestamp")
    _collect(report, bad_xy & ~bad_ids & ~bad_index & ~bad_time, "UNPARSEABLE_ROW", "missing coordinates")
    unparseable = bad_ids | bad_index | bad_time | bad_xy

    oob = pd.Series(out_of_range_mask(frames["x"].to_numpy(), frames["y"].to_numpy()), index=frames.index) & ~unparseable
    _collect(report, oob, "COORD_OUT_OF_RANGE", "coordinates outside the field")
    direction = frames["direction"]
    bad_dir = direction.notna() & ((direction < 0) | (direction >= 360))
    frames.loc[bad_dir, "direction"] = direction[bad_dir] % 360.0

    report.errors.sort(key=lambda e: e.line)
    _enforce_budget(report, schema.error_budget)

    frames = frames[~(unparseable | oob)].copy()
    frames["frame_index"] = frames["frame_index"].astype(np.int64)
    frames[["x", "y"]] = snap_array(frames[["x", "y"]])
    frames["direction"] = snap_array(frames["direction"]) % 360.0
    frames = frames.sort_values(["game_id", "play_id", "entity_id", "frame_index"], kind="mergesort")
    # seconds since the play's first frame
    play_start = frames.groupby(["game_id", "play_id"])["timestamp"].transform("min")
    frames["timestamp"] = (frames["timestamp"] - play_start).round(9)
    frames = frames.reset_index(drop=True)

    spacing = spacing_violations(frames)
    if spacing.any():
        report.flags["BAD_FRAME_SPACING"] = int(spacing.sum())
        logger.warning("%s: %d frames break the 10 Hz spacing contract", report.source, int(spacing.sum()))
    if int(bad_dir.sum()):
        report.flags["DIRECTION_WRAPPED"] = int(bad_dir.sum())

    report.n_accepted = len(frames)
    logger.info("parsed %d tracking rows from %s", report.n_accepted, report.source)
    return TrackingParse(frames=frames[TRACKING_COLUMNS], report=report)


def iter_frames(frames: pd.DataFrame) -> Iterator[TrackingFrame]:
    for row in frames.itertuples(index=False):
        yield TrackingFrame(
            game_id=row.game_id,
            play_id=row.play_id,
            entity_id=row.entity_id,
            frame_index=int(row.frame_index),
            timestamp=float(row.timestamp),
            point=FieldPoint(float(row.x), float(row.y)),
            speed=None if pd.isna(row.speed) else float(row.speed),
            direction=None if pd.isna(row.direction) else float(row.direction),
            event=row.event if isinstance(row.event, str) else None,
        )


def _clock_seconds(raw: pd.Series) -> pd.Series:
    numeric = _numeric(raw)
    parts = raw.str.extract(r"^\s*(\d+):(\d{1,2})(?::(\d{1,2}))?\s*$")
    # MM:SS or MM:SS:00 (the BDB files carry a trailing ":00")
    minsec = pd.to_numeric(parts[0], errors="coerce") * 60 + pd.to_numeric(parts[1], errors="coerce")
    return numeric.fillna(minsec)


def _boolean(raw: pd.Series) -> pd.Series:
    lowered = raw.str.strip().str.lower()
    return lowered.map({"1": True, "true": True, "t": True, "yes": True,
                        "0": False, "false": False, "f": False, "no": False, "": False})


def parse_plays(source: Source, schema: SchemaConfig) -> PlayParse:
    """Parse play-by-play rows, applying down/quarter/clock range checks."""
    raw = _read_raw(source)
    cols = schema.plays
    required = [f for f in cols if f not in OPTIONAL_PLAY_FIELDS]
    _require(raw, cols, required)
    report = ParseReport(source=raw.attrs["source"], n_rows=len(raw))

    text = pd.DataFrame({name: raw[c].str.strip() for name, c in cols.items() if c in raw.columns},
                        index=raw.index)

    def col(name: str) -> pd.Series:
        return text[name]

    quarter = _numeric(col("quarter"))
    clock = _clock_seconds(col("game_clock"))
    down = _numeric(col("down"))
    to_go = _numeric(col("yards_to_go"))
    yl_number = _numeric(col("yardline_number"))
    score_home = _numeric(col("score_home"))
    score_away = _numeric(col("score_away"))
    to_home = _numeric(col("home_timeouts"))
    to_away = _numeric(col("away_timeouts"))
    gained = _numeric(col("yards_gained"))
    goal_to_go = _boolean(col("goal_to_go"))
    possession = col("possession_team")
    home = col("home_team")
    away = col("away_team")
    side = col("yardline_side")

    checks = [
        (col("game_id").eq("") | col("play_id").eq(""), "missing game or play id"),
        (~quarter.isin([1, 2, 3, 4, 5]), "quarter outside 1-5"),
        (clock.isna() | (clock < 0) | (clock > 900), "game clock outside 0-15:00"),
        (~down.isin([1, 2, 3, 4]), "down outside 1-4"),
        (to_go.isna() | (to_go < 1) | (to_go % 1 != 0), "yards to go is not a positive integer"),
        (yl_number.isna() | (yl_number < 0) | (yl_number > 50), "yardline number outside 0-50"),
        (score_home.isna() | score_away.isna(), "unparseable score"),
        (~to_home.isin([0, 1, 2, 3]) | ~to_away.isin([0, 1, 2, 3]), "timeouts outside 0-3"),
        (gained.isna() | (gained % 1 != 0), "yards gained is not an integer"),
        (goal_to_go.isna(), "goal-to-go is not boolean"),
        (~possession.eq(home) & ~possession.eq(away), "possession team is neither home nor away"),
        (col("series_id").eq(""), "missing series id"),
    ]
    rejected = pd.Series(False, index=raw.index)
    for mask, message in checks:
        mask = mask.fillna(True) & ~rejected
        _collect(report, mask, "UNPARSEABLE_ROW", message)
        rejected |= mask

    own_side = side.eq(possession) | side.eq("")
    yardline = np.where(own_side | yl_number.eq(50), yl_number, 100 - yl_number)
    yardline = pd.Series(yardline, index=raw.index, dtype=float)
    bad_yardline = ~rejected & ((yardline <= 0) | (yardline >= 100))
    _collect(report, bad_yardline, "UNPARSEABLE_ROW", "yardline from own goal outside (0, 100)")
    rejected |= bad_yardline

    report.errors.sort(key=lambda e: e.line)
    _enforce_budget(report, schema.error_budget)

    is_home = possession.eq(home)
    diff = np.where(is_home, score_home - score_away, score_away - score_home)
    to_pos = np.where(is_home, to_home, to_away)
    to_opp = np.where(is_home, to_away, to_home)
    play_types = col("play_type").str.upper().map(lambda v: PLAY_TYPE_ALIASES.get(v, PlayType.OTHER)).to_numpy()
    game_ids = col("game_id").to_numpy()
    play_ids = col("play_id").to_numpy()
    series_ids = col("series_id").to_numpy()
    play_directions = col("play_direction").str.upper().to_numpy() if "play_direction" in text else None

    records: List[PlayRecord] = []
    directions: Dict[PlayKey, Direction] = {}
    for i in np.flatnonzero(~rejected.to_numpy()):
        record = PlayRecord(
            game_id=game_ids[i],
            play_id=play_ids[i],
            quarter=int(quarter.iat[i]),
            game_clock_remaining=float(clock.iat[i]),
            down=int(down.iat[i]),
            yards_to_go_integer=int(to_go.iat[i]),
            yardline_from_own_goal=float(yardline.iat[i]),
            possession_team=possession.iat[i],
            home_team=home.iat[i],
            away_team=away.iat[i],
            score_differential=int(diff[i]),
            timeouts_possession=int(to_pos[i]),
            timeouts_opponent=int(to_opp[i]),
            play_type=play_types[i],
            yards_gained=int(gained.iat[i]),
            series_id=series_ids[i],
            goal_to_go=bool(goal_to_go.iat[i]),
        )
        records.append(record)
        if play_directions is not None and play_directions[i] in ("LEFT", "RIGHT"):
            directions[record.key] = Direction(play_directions[i])

    report.n_accepted = len(records)
    logger.info("parsed %d play rows from %s", report.n_accepted, report.source)
    return PlayParse(records=records, directions=directions, report=report)


def parse_games(source: Source, schema: SchemaConfig) -> List[GameMeta]:
    raw = _read_raw(source)
    cols = schema.games
    _require(raw, cols, ("game_id", "season", "week", "home_team", "away_team"))
    games = []
    for i in range(len(raw)):
        row = {name: raw[cols[name]].iat[i].strip() for name in cols if cols[name] in raw.columns}
        try:
            games.append(GameMeta(
                game_id=row["game_id"],
                season=int(row["season"]),
                week=int(row["week"]),
                home_team=row["home_team"],
                away_team=row["away_team"],
                home_final=int(row["home_final"]) if row.get("home_final") else None,
                away_final=int(row["away_final"]) if row.get("away_final") else None,
            ))
        except ValueError as exc:
            raise DataError("UNPARSEABLE_ROW", f"games line {i + HEADER_OFFSET}: {exc}",
                            {"lines": [i + HEADER_OFFSET]}) from exc
    return games
