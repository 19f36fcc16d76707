# tests/test_field.py
import numpy as np
import pandas as pd
import pytest
from pandas.testing import assert_frame_equal

from fourthdown.core.errors import DataError, ValidationError
from fourthdown.core.types import BALL, FIELD_WIDTH, Direction, FieldPoint, snap
from fourthdown.core.validation import snap_array
from fourthdown.field import (
    StadiumConvention,
    compute_kinematics,
    flip_frame,
    flip_frames,
    frame_kinematics,
    infer_offense_direction,
    has_snap_event,
    max_speed,
    normalize_dataset,
    normalize_play_direction,
    snap_frame,
    speed_calibration_metadata,
    standardize_to_los,
)
from fourthdown.ingest import assemble_games


def ball_table(xs, snap_at=1, play_id="1", events=None):
    n = len(xs)
    return pd.DataFrame({
        "game_id": "g1",
        "play_id": play_id,
        "entity_id": BALL,
        "frame_index": np.arange(1, n + 1),
        "timestamp": np.round(np.arange(n) * 0.1, 9),
        "x": np.asarray(xs, dtype=float),
        "y": 26.0,
        "speed": np.nan,
        "direction": 90.0,
        "event": events if events is not None else ["ball_snap" if i + 1 == snap_at else None for i in range(n)],
    })


def test_flip_is_an_involution(make_frame, rng):
    for _ in range(200):
        x = float(rng.uniform(0, 120))
        y = float(rng.uniform(0, FIELD_WIDTH))
        d = float(rng.uniform(0, 360))
        frame = make_frame(x, y, direction=d)
        flipped = flip_frame(frame)
        assert flipped.point.in_bounds()
        assert 0.0 <= flipped.direction < 360.0
        assert flip_frame(flipped) == frame

    table = ball_table(snap_array(rng.uniform(0, 120, 25)))
    table["y"] = snap_array(rng.uniform(0, FIELD_WIDTH, 25))
    table["direction"] = snap_array(rng.uniform(0, 360, 25)) % 360.0
    assert_frame_equal(flip_frames(flip_frames(table)), table)


def test_flip_twice_is_exact_off_the_decimal_grid(make_frame):
    frame = make_frame(25.1234567891234, 0.1 + 0.2, direction=359.99999999999)
    assert flip_frame(flip_frame(frame)) == frame
    assert frame.point == FieldPoint(snap(25.1234567891234), snap(0.1 + 0.2))
    # storage moves a coordinate by at most half a grid step
    assert abs(frame.point.x - 25.1234567891234) <= 2.0 ** -31
    # a heading within half a step of 360 wraps to 0
    assert frame.direction == 0.0

    edge = make_frame(0.0, FIELD_WIDTH, direction=0.0)
    assert flip_frame(flip_frame(edge)) == edge
    assert flip_frame(edge).point.x == 120.0


def test_flip_frame_values(make_frame):
    flipped = flip_frame(make_frame(30.0, 10.0, direction=90.0))
    assert flipped.point.x == pytest.approx(90.0)
    assert flipped.point.y == pytest.approx(43.333333334)
    assert flipped.direction == pytest.approx(270.0)


def test_normalize_and_standardize(make_frame):
    frames = [make_frame(30.0), make_frame(31.0, frame_index=2)]
    assert normalize_play_direction(frames, Direction.RIGHT) == frames
    left = normalize_play_direction(frames, Direction.LEFT)
    assert [f.point.x for f in left] == pytest.approx([90.0, 89.0])

    once = standardize_to_los(frames, 30.0)
    assert [f.point.x for f in once] == pytest.approx([0.0, 1.0])
    # a second shift moves the points again
    twice = standardize_to_los(once, 30.0)
    assert [f.point.x for f in twice] == pytest.approx([-30.0, -29.0])

    table = standardize_to_los(ball_table([40.0, 41.0]), 40.0)
    assert table["x"].tolist() == pytest.approx([0.0, 1.0])


def test_stadium_convention(make_play):
    convention = StadiumConvention()
    assert convention.offense_direction(make_play(quarter=1)) == Direction.RIGHT
    assert convention.offense_direction(make_play(quarter=2)) == Direction.LEFT
    assert convention.offense_direction(make_play(quarter=3)) == Direction.LEFT
    assert convention.offense_direction(make_play(quarter=4)) == Direction.RIGHT
    assert convention.offense_direction(make_play(quarter=5)) == Direction.RIGHT
    assert convention.offense_direction(make_play(quarter=1, possession_team="BBB")) == Direction.LEFT


def test_infer_offense_direction_order(make_play):
    play = make_play(yardline_from_own_goal=30.0)
    assert infer_offense_direction(play, None, Direction.LEFT) == (Direction.LEFT, "COLUMN")
    assert infer_offense_direction(play, ball_table([40.0, 41.0])) == (Direction.RIGHT, "YARDLINE")
    assert infer_offense_direction(play, ball_table([80.0, 79.0])) == (Direction.LEFT, "YARDLINE")

    midfield = make_play(yardline_from_own_goal=50.0)
    moved = ball_table([60.0, 60.0, 58.0], events=["ball_snap", None, "tackle"])
    assert infer_offense_direction(midfield, moved) == (Direction.LEFT, "DISPLACEMENT")

    still = ball_table([60.0, 60.1, 60.2])
    assert infer_offense_direction(midfield, still, convention=StadiumConvention()) == (Direction.LEFT, "CONVENTION")
    with pytest.raises(DataError) as exc:
        infer_offense_direction(midfield, still)
    assert exc.value.code == "DIRECTION_UNKNOWN"


def test_snap_frame_requires_snap_event(make_play):
    labelled = ball_table([40.0, 41.0, 42.0], snap_at=2)
    assert snap_frame(labelled)["frame_index"] == 2
    assert has_snap_event(labelled)

    unlabelled = ball_table([40.0, 41.0, 42.0], events=[None, None, "tackle"])
    assert snap_frame(unlabelled) is None
    assert not has_snap_event(unlabelled)
    assert snap_frame(unlabelled.iloc[:0]) is None
    # direction inference still reads the first frame
    play = make_play(yardline_from_own_goal=30.0)
    assert infer_offense_direction(play, unlabelled) == (Direction.RIGHT, "YARDLINE")


def test_normalize_dataset(make_play):
    plays = [
        make_play(play_id="1", quarter=2, yardline_from_own_goal=30.0),
        make_play(play_id="2", quarter=2, yardline_from_own_goal=50.0),
        make_play(play_id="3", quarter=2),
    ]
    frames = pd.concat([
        ball_table([80.0, 79.0, 78.0], play_id="1"),
        ball_table([60.0, 60.0, 60.1], play_id="2"),
    ], ignore_index=True)
    ds = assemble_games(frames, plays).datasets[0]

    normalized = normalize_dataset(ds)
    assert normalized.directions == {("g1", "1"): Direction.LEFT}
    assert normalized.flags["DIRECTION_UNKNOWN"] == ["2"]
    assert normalized.flags["NO_TRACKING"] == ["3"]
    assert normalized.ball_track("1")["x"].tolist() == pytest.approx([40.0, 41.0, 42.0])
    assert normalized.ball_track("2")["x"].tolist() == pytest.approx([60.0, 60.0, 60.1])

    with_convention = normalize_dataset(ds, StadiumConvention())
    assert with_convention.directions[("g1", "2")] == Direction.LEFT
    assert "DIRECTION_UNKNOWN" not in with_convention.flags


def test_constant_velocity_kinematics():
    n = 12
    table = ball_table(10.0 + 0.5 * np.arange(n))
    kin = compute_kinematics(table)
    assert kin["speed"].to_numpy() == pytest.approx(np.full(n, 5.0))
    assert kin["acceleration"].to_numpy() == pytest.approx(np.zeros(n), abs=1e-9)
    assert kin["direction"].to_numpy() == pytest.approx(np.full(n, 90.0))
    assert kin["distance"].iloc[-1] == pytest.approx(0.5 * (n - 1))

    with pytest.raises(ValidationError) as exc:
        compute_kinematics(table.iloc[:2])
    assert exc.value.code == "TRACK_TOO_SHORT"


def test_uniform_acceleration():
    t = np.arange(15) * 0.1
    table = ball_table(20.0 + t ** 2)
    kin = compute_kinematics(table)
    assert kin["speed"].to_numpy() == pytest.approx(2 * t, abs=1e-9)
    assert kin["acceleration"].to_numpy() == pytest.approx(np.full(15, 2.0), abs=1e-6)

    still = compute_kinematics(ball_table([30.0, 30.0, 30.0]))
    assert still["direction"].isna().all()


def test_max_speed_skips_contact_frames(make_frame):
    steps = [0.5] * 7 + [1.5] + [0.5] * 2
    xs = 10.0 + np.concatenate([[0.0], np.cumsum(steps)])
    events = [None] * 11
    events[7] = "tackle"
    summary = max_speed(ball_table(xs, events=events))
    assert summary.max_speed == pytest.approx(5.0)
    assert summary.max_speed_unfiltered >= 10.0 - 1e-9
    assert summary.excluded_frames == 4

    frames = [make_frame(10.0 + 0.5 * i, frame_index=i + 1) for i in range(5)]
    assert max_speed(frames).max_speed == pytest.approx(5.0)


def test_frame_kinematics_skips_short_tracks():
    frames = pd.concat([
        ball_table(10.0 + 0.5 * np.arange(5), play_id="1"),
        ball_table([10.0, 10.5], play_id="2"),
    ], ignore_index=True)
    kin = frame_kinematics(frames, workers=2)
    assert set(kin["play_id"]) == {"1"}
    assert len(kin) == 5
    assert list(kin.columns[:3]) == ["game_id", "play_id", "entity_id"]


def test_speed_calibration_metadata():
    assert speed_calibration_metadata([2018, 2019, 0]) == {"seasons": [2018, 2019], "speed_calibration_varies": True}
    assert speed_calibration_metadata([2018])["speed_calibration_varies"] is False
