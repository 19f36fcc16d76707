# tests/test_yardage.py
import math

import numpy as np
import pandas as pd
import pytest

from fourthdown.core.errors import DataError, ValidationError
from fourthdown.core.types import BALL, GOAL_LINE_X, YardageSource
from fourthdown.field import StadiumConvention, normalize_dataset
from fourthdown.ingest import assemble_games
from fourthdown.yardage import (
    Derivation,
    SeriesContext,
    bucket_center,
    compute_yardage,
    distance_density,
    integer_bucket,
    line_to_gain,
    precise_distance,
    split_series,
    yardage_table,
)


def ball(x, play_id="1", n=3):
    return pd.DataFrame({
        "game_id": "g1",
        "play_id": play_id,
        "entity_id": BALL,
        "frame_index": np.arange(1, n + 1),
        "timestamp": np.round(np.arange(n) * 0.1, 9),
        "x": x + 0.5 * np.arange(n),
        "y": 26.0,
        "speed": np.nan,
        "direction": 90.0,
        "event": ["ball_snap"] + [None] * (n - 1),
    })


@pytest.mark.parametrize("inches, bucket", [(0.1, 1), (71.9, 1), (72.0, 2), (107.9, 2), (108.0, 3)])
def test_integer_bucket_inches(inches, bucket):
    assert integer_bucket(inches / 36.0) == bucket


def test_integer_bucket_edges():
    assert integer_bucket(0.0) == 1
    assert integer_bucket(9.99) == 9
    for bad in (-0.01, math.nan):
        with pytest.raises(ValidationError) as exc:
            integer_bucket(bad)
        assert exc.value.code == "NEGATIVE_YARDS"
    assert bucket_center(1) == 1.0
    assert bucket_center(3) == 3.5


def test_series_context_goal_line():
    with pytest.raises(ValueError):
        SeriesContext("s1", 95.0, True, Derivation.GOAL_LINE)


def test_line_to_gain_derivations(make_play):
    first = make_play(play_id="1", down=1, yards_to_go_integer=10, yardline_from_own_goal=30.0)
    fourth = make_play(play_id="4", down=4, yards_to_go_integer=1, yardline_from_own_goal=39.0)

    ctx = line_to_gain([first, fourth], {"1": ball(40.25)})
    assert ctx.derivation == Derivation.FIRST_DOWN_BALL
    assert ctx.line_to_gain_x == pytest.approx(50.25)
    assert ctx.first_down_play_id == "1"

    fallback = line_to_gain([first, fourth], {})
    assert fallback.derivation == Derivation.FALLBACK
    assert fallback.line_to_gain_x == 50.0

    deep = line_to_gain([first, fourth], {"1": ball(102.0)})
    assert deep.goal_to_go and deep.line_to_gain_x == GOAL_LINE_X

    goal = make_play(play_id="7", down=1, yards_to_go_integer=8, yardline_from_own_goal=92.0, goal_to_go=True)
    ctx = line_to_gain([goal], {"7": ball(102.0, "7")})
    assert ctx.derivation == Derivation.GOAL_LINE and ctx.line_to_gain_x == GOAL_LINE_X

    with pytest.raises(ValidationError):
        line_to_gain([], {})


def test_precise_distance_flags(make_play):
    ctx = SeriesContext("s1", 50.25, False, Derivation.FIRST_DOWN_BALL, "1")

    y = precise_distance(make_play(yards_to_go_integer=1), ctx, ball(48.85))
    assert y.source == YardageSource.TRACKING_BALL
    assert y.yards == pytest.approx(1.4)
    assert y.bucket == 1 and y.flags == ()

    y = precise_distance(make_play(yards_to_go_integer=2), ctx, ball(48.85))
    assert y.flags == ("BUCKET_MISMATCH",)

    y = precise_distance(make_play(yards_to_go_integer=1), ctx, ball(50.5))
    assert y.yards == 0.0
    assert "ANOMALY_NEGATIVE" in y.flags

    y = precise_distance(make_play(yards_to_go_integer=10), ctx, ball(38.0))
    assert y.yards == pytest.approx(12.25)
    assert "ANOMALY_EXCEEDS_SERIES" in y.flags

    y = precise_distance(make_play(yards_to_go_integer=3), ctx, None)
    assert (y.source, y.yards, y.bucket, y.flags) == (YardageSource.FALLBACK_INTEGER, 3.5, 3, ("NO_FOURTH_DOWN_SNAP",))

    unlabelled = ball(48.85).assign(event=None)
    y = precise_distance(make_play(yards_to_go_integer=2), ctx, unlabelled)
    assert (y.source, y.yards, y.flags) == (YardageSource.FALLBACK_INTEGER, 2.5, ("NO_FOURTH_DOWN_SNAP",))


def test_precise_distance_against_play_by_play_line(make_play):
    fallback = SeriesContext("s", 50.0, False, Derivation.FALLBACK)
    y = precise_distance(make_play(yards_to_go_integer=1), fallback, ball(49.3))
    assert y.source == YardageSource.TRACKING_BALL
    assert y.yards == pytest.approx(0.7)
    assert y.bucket == 1 and y.flags == ("NO_FIRST_DOWN_SNAP",)

    y = precise_distance(make_play(yards_to_go_integer=3), fallback, ball(47.5))
    assert y.yards == pytest.approx(2.5)
    assert y.flags == ("NO_FIRST_DOWN_SNAP", "BUCKET_MISMATCH")


def test_split_series_keeps_order(make_play):
    plays = [make_play(play_id=str(i), series_id=s) for i, s in enumerate(["a", "a", "b", "a", "c"])]
    groups = split_series(plays)
    assert [sid for sid, _ in groups] == ["a", "b", "c"]
    assert [p.play_id for p in groups[0][1]] == ["0", "1", "3"]


def test_compute_yardage_on_game(make_play):
    plays = [
        make_play(play_id="1", down=1, yards_to_go_integer=10, yardline_from_own_goal=30.0, series_id="s1"),
        make_play(play_id="2", down=4, yards_to_go_integer=2, yardline_from_own_goal=38.0, series_id="s1"),
        make_play(play_id="3", down=1, yards_to_go_integer=10, yardline_from_own_goal=20.0, series_id="s2",
                  possession_team="BBB"),
        make_play(play_id="4", down=4, yards_to_go_integer=3, yardline_from_own_goal=27.0, series_id="s2",
                  possession_team="BBB"),
    ]
    frames = pd.concat([ball(40.0, "1"), ball(48.25, "2")], ignore_index=True)
    ds = normalize_dataset(assemble_games(frames, plays).datasets[0], StadiumConvention())
    result = compute_yardage([ds])

    tracked = result.yardages[("g1", "2")]
    assert tracked.yards == pytest.approx(1.75)
    assert tracked.bucket == 1 and tracked.flags == ("BUCKET_MISMATCH",)
    untracked = result.yardages[("g1", "4")]
    assert untracked.source == YardageSource.FALLBACK_INTEGER and untracked.yards == 3.5
    assert result.contexts[("g1", "s2")].derivation == Derivation.FALLBACK
    assert result.metadata["ball_coords_less_reliable"] is True
    assert result.metadata["sources"] == {"TRACKING_BALL": 1, "FALLBACK_INTEGER": 1}

    report = result.discrepancies()
    assert report["play_key"].tolist() == ["g1:2", "g1:4"]
    assert report["computed_bucket"].tolist() == [1, 3]

    table = yardage_table(result)
    assert table["play_id"].tolist() == ["2", "4"]
    assert table["pbp_bucket"].tolist() == [2, 3]


def test_synthetic_distances_recovered(small_world):
    datasets = [normalize_dataset(ds, StadiumConvention()) for ds in small_world.datasets()]
    result = compute_yardage(datasets, workers=2)
    latents = small_world.latents()
    assert len(latents) > 0
    for row in latents.itertuples(index=False):
        y = result.yardages[(row.game_id, row.play_id)]
        assert y.source == YardageSource.TRACKING_BALL
        assert y.yards == pytest.approx(row.distance, abs=1e-6)
        assert result.pbp_buckets[(row.game_id, row.play_id)] == row.pbp_bucket


def test_distance_density(rng):
    groups = {
        (1, True): rng.normal(0.7, 0.2, 300).clip(0.01, 1.99),
        (1, False): rng.normal(1.0, 0.2, 300).clip(0.01, 1.99),
        (2, False): np.full(20, 2.5),
    }
    curves = distance_density(groups)
    for key in groups:
        assert curves.integral(key) == pytest.approx(1.0, abs=1e-3)
    assert curves.median_gap(1) == pytest.approx(0.3, abs=0.08)
    assert curves.median_gap(2) is None
    assert curves.counts[(1, True)] == 300
    rows = list(curves.to_rows())
    assert len(rows) == 3 * len(curves.grid)

    with pytest.raises(DataError) as exc:
        distance_density({(1, True): [0.5] * 5})
    assert exc.value.code == "GROUP_TOO_SMALL"
