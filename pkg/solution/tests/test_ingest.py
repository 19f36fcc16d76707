# tests/test_ingest.py
import io
import time

import pytest

from fourthdown.config import SchemaConfig
from fourthdown.core.errors import DataError
from fourthdown.core.types import BALL, Direction, PlayType
from fourthdown.ingest import assemble_games, load_dataset, parse_games, parse_plays, parse_tracking
from fourthdown.ingest.writers import write_games, write_plays, write_tracking

TRACKING_HEADER = "gameId,playId,nflId,frameId,time,x,y,s,dir,event\n"
PLAYS_HEADER = (
    "gameId,playId,quarter,gameClock,down,yardsToGo,possessionTeam,homeTeam,awayTeam,"
    "yardlineNumber,yardlineSide,scoreHome,scoreAway,homeTimeouts,awayTimeouts,playType,"
    "yardsGained,seriesId,goalToGo\n"
)
GAMES_CSV = (
    "gameId,season,week,homeTeam,awayTeam,homeFinalScore,awayFinalScore\n"
    "g1,2018,1,AAA,BBB,24,17\n"
    "g2,2018,2,CCC,AAA,10,10\n"
)


def tracking_csv(rows):
    return (TRACKING_HEADER + "".join(r + "\n" for r in rows)).encode("utf-8")


def plays_csv(rows):
    return (PLAYS_HEADER + "".join(r + "\n" for r in rows)).encode("utf-8")


BASE_TRACKING = [
    "g1,1,NA,1,2018-09-06T00:00:10.0Z,30.0,26.0,0.0,90.0,ball_snap",
    "g1,1,NA,2,2018-09-06T00:00:10.1Z,30.5,26.0,5.0,90.0,",
    "g1,1,NA,3,2018-09-06T00:00:10.2Z,31.0,26.0,5.0,-10.0,",
    "g1,1,77.0,1,2018-09-06T00:00:10.0Z,29.0,20.0,0.0,90.0,ball_snap",
    "g1,1,77.0,2,2018-09-06T00:00:10.1Z,29.5,20.0,5.0,90.0,",
]

BASE_PLAYS = [
    "g1,1,1,15:00,1,10,AAA,AAA,BBB,20,AAA,0,0,3,3,RUN,4,s1,0",
    "g1,2,1,14:30,4,6,AAA,AAA,BBB,24,AAA,0,0,3,3,PUNT,0,s1,false",
    "g1,3,2,01:05,4,2,BBB,AAA,BBB,35,AAA,7,3,2,1,pass,2,s2,no",
]


def test_parse_tracking_canonical_table(schema):
    parsed = parse_tracking(tracking_csv(BASE_TRACKING), schema)
    frames = parsed.frames
    assert len(parsed) == 5
    assert set(frames["entity_id"]) == {BALL, "77"}

    ball = frames[frames["entity_id"] == BALL]
    assert ball["timestamp"].tolist() == pytest.approx([0.0, 0.1, 0.2])
    # -10 degrees wraps onto [0, 360)
    assert ball["direction"].iloc[2] == pytest.approx(350.0)
    assert parsed.report.flags["DIRECTION_WRAPPED"] == 1
    assert ball["event"].iloc[0] == "ball_snap"
    assert not isinstance(ball["event"].iloc[1], str)

    first = next(iter(parsed))
    assert first.game_id == "g1" and first.frame_index == 1


def test_parse_tracking_numeric_time_and_sentinel():
    schema = SchemaConfig(ball_sentinel="-1")
    rows = ["g1,1,-1,1,100.0,30.0,26.0,,,", "g1,1,-1,2,100.1,30.5,26.0,,,"]
    frames = parse_tracking(io.BytesIO(tracking_csv(rows)), schema).frames
    assert frames["entity_id"].tolist() == [BALL, BALL]
    assert frames["timestamp"].tolist() == pytest.approx([0.0, 0.1])
    assert frames["speed"].isna().all()


def test_parse_tracking_error_budget(schema):
    rows = [f"g1,1,NA,{i},{i / 10:.1f},{30 + i * 0.1:.1f},26.0,0,0," for i in range(1, 11)]
    rows[4] = "g1,1,NA,5,0.5,130.0,26.0,0,0,"
    with pytest.raises(DataError) as exc:
        parse_tracking(tracking_csv(rows), schema)
    assert exc.value.code == "UNPARSEABLE_ROW"
    assert exc.value.details["lines"] == [6]

    lenient = SchemaConfig(error_budget=0.1)
    parsed = parse_tracking(tracking_csv(rows), lenient)
    assert len(parsed) == 9
    assert parsed.report.errors[0].code == "COORD_OUT_OF_RANGE"
    # the dropped frame leaves a 0.2 s gap
    assert parsed.report.flags["BAD_FRAME_SPACING"] == 1


def test_parse_tracking_structural_errors(schema):
    with pytest.raises(DataError) as exc:
        parse_tracking(b"gameId,playId,frameId\ng1,1,1\n", schema)
    assert exc.value.code == "MISSING_COLUMN"
    with pytest.raises(DataError) as exc:
        parse_tracking(TRACKING_HEADER.encode("utf-8"), schema)
    assert exc.value.code == "EMPTY_FILE"


def test_parse_plays(schema):
    parsed = parse_plays(plays_csv(BASE_PLAYS), schema)
    assert len(parsed) == 3
    first, punt, late = parsed.records
    assert first.game_clock_remaining == 900.0
    assert first.yardline_from_own_goal == 20.0
    assert first.goal_to_go is False

    assert punt.play_type == PlayType.PUNT and punt.is_fourth_down
    assert punt.seconds_remaining == 2700.0 + 870.0

    # ball on the possession team's opponent side, score from the away offense's view
    assert late.possession_team == "BBB"
    assert late.yardline_from_own_goal == 65.0
    assert late.score_differential == -4
    assert late.timeouts_possession == 1 and late.timeouts_opponent == 2
    assert late.play_type == PlayType.PASS
    assert parsed.directions == {}


def test_parse_plays_rejects_bad_rows(schema):
    rows = BASE_PLAYS + ["g1,4,6,10:00,4,2,AAA,AAA,BBB,35,AAA,0,0,3,3,RUN,2,s3,0"]
    with pytest.raises(DataError) as exc:
        parse_plays(plays_csv(rows), schema)
    assert exc.value.code == "UNPARSEABLE_ROW"
    assert exc.value.details["lines"] == [5]


def test_parse_plays_direction_column():
    schema = SchemaConfig()
    header = PLAYS_HEADER.rstrip("\n") + ",playDirection\n"
    body = BASE_PLAYS[0] + ",left\n" + BASE_PLAYS[1] + ",\n"
    parsed = parse_plays((header + body).encode("utf-8"), schema)
    assert parsed.directions == {("g1", "1"): Direction.LEFT}


def test_parse_plays_large_padded_file(schema):
    n = 20_000
    rows = [f" g1 , {i} ,1,15:00,1,10, AAA ,AAA,BBB,20,AAA,0,0,3,3, run ,4,s{i // 4},0" for i in range(n)]
    start = time.perf_counter()
    parsed = parse_plays(plays_csv(rows), schema)
    elapsed = time.perf_counter() - start
    assert len(parsed) == n
    last = parsed.records[-1]
    assert (last.game_id, last.play_id, last.possession_team) == ("g1", str(n - 1), "AAA")
    assert last.play_type == PlayType.RUN and last.series_id == f"s{(n - 1) // 4}"
    assert elapsed < 10.0


def test_parse_games_winner(schema):
    games = parse_games(GAMES_CSV.encode("utf-8"), schema)
    assert [g.winner() for g in games] == ["AAA", None]
    assert games[0].season == 2018


def test_assemble_orphans_and_missing_ball(schema):
    rows = BASE_TRACKING + [
        "g1,3,55,1,2018-09-06T00:10:00.0Z,60.0,20.0,0,90,",
        "g9,1,NA,1,2018-09-06T00:10:00.0Z,60.0,20.0,0,90,",
    ]
    frames = parse_tracking(tracking_csv(rows), schema)
    plays = parse_plays(plays_csv(BASE_PLAYS), schema)
    result = assemble_games(frames, plays, parse_games(GAMES_CSV.encode("utf-8"), schema), workers=2)

    assert len(result.datasets) == 1
    ds = result.dataset("g1")
    assert ds.game_meta.winner() == "AAA"
    assert [p.play_id for p in ds.plays] == ["1", "2", "3"]
    assert ds.has_ball_track("1") and not ds.has_ball_track("3")
    assert result.no_ball_track == [("g1", "3")]
    assert ds.flags["NO_TRACKING"] == ["2"]
    assert len(ds.ball_track("1")) == 3
    assert len(ds.play_frames("1")) == 5
    assert ds.track("2", BALL).empty

    report = result.orphan_report()
    assert report.to_dict(orient="records") == [{"game_id": "g9", "play_id": "1", "n_frames": 1}]


def test_assemble_duplicate_play(schema):
    plays = parse_plays(plays_csv(BASE_PLAYS + [BASE_PLAYS[0]]), schema)
    frames = parse_tracking(tracking_csv(BASE_TRACKING), schema)
    with pytest.raises(DataError) as exc:
        assemble_games(frames, plays)
    assert exc.value.code == "DUPLICATE_PLAY_KEY"


def test_written_world_reloads(small_world, config, tmp_path):
    datasets = small_world.datasets()[:3]
    metas = [ds.game_meta for ds in datasets]
    paths = {name: tmp_path / name for name in ("tracking.csv", "plays.csv", "games.csv")}
    n_frames = write_tracking(datasets, paths["tracking.csv"], config.schema)
    n_plays = write_plays(datasets, paths["plays.csv"], config.schema)
    write_games(metas, paths["games.csv"], config.schema)

    result, reports = load_dataset([paths["tracking.csv"]], [paths["plays.csv"]], config, paths["games.csv"])
    assert sum(r.n_accepted for r in reports[:1]) == n_frames
    assert sum(len(ds.plays) for ds in result.datasets) == n_plays
    assert result.orphans.empty
    for original in datasets:
        loaded = result.dataset(original.game_id)
        assert loaded.game_meta == original.game_meta
        assert [p.key for p in loaded.plays] == [p.key for p in original.plays]
        assert loaded.tracked_play_ids() == original.tracked_play_ids()
