# tests/conftest.py
import numpy as np
import pandas as pd
import pytest

from fourthdown.config import DEFAULT_GO_RANGE_FILE, SchemaConfig, load_config
from fourthdown.core.types import BALL, FieldPoint, PlayRecord, PlayType, TrackingFrame
from fourthdown.decisions.go_range import load_go_range
from fourthdown.synth import WorldConfig, generate
from fourthdown.synth.game import PILOT_CALIBRATION

# small enough for the default suite; pilot bank is cached per world
SMALL_WORLD = WorldConfig(n_games=40, players_per_frame=2, pilot_games=150)


def _play(**changes) -> PlayRecord:
    values = dict(
        game_id="g1",
        play_id="1",
        quarter=2,
        game_clock_remaining=600.0,
        down=4,
        yards_to_go_integer=1,
        yardline_from_own_goal=55.0,
        possession_team="AAA",
        home_team="AAA",
        away_team="BBB",
        score_differential=0,
        timeouts_possession=3,
        timeouts_opponent=3,
        play_type=PlayType.PUNT,
        yards_gained=0,
        series_id="s1",
        goal_to_go=False,
    )
    values.update(changes)
    return PlayRecord(**values)


@pytest.fixture
def make_play():
    return _play


def _frame(x, y=26.0, frame_index=1, entity_id=BALL, game_id="g1", play_id="1",
           event=None, direction=90.0, speed=None) -> TrackingFrame:
    return TrackingFrame(
        game_id=game_id,
        play_id=play_id,
        entity_id=entity_id,
        frame_index=frame_index,
        timestamp=round((frame_index - 1) * 0.1, 9),
        point=FieldPoint(x, y),
        speed=speed,
        direction=direction,
        event=event,
    )


@pytest.fixture
def make_frame():
    return _frame


@pytest.fixture
def make_track():
    """Ball track of evenly spaced frames at 0.1 s, snap on ``snap_at``."""
    def build(xs, y=26.0, snap_at=1, play_id="1", game_id="g1"):
        return [
            _frame(x, y, frame_index=i + 1, play_id=play_id, game_id=game_id,
                   event="ball_snap" if i + 1 == snap_at else None)
            for i, x in enumerate(xs)
        ]
    return build


@pytest.fixture
def schema():
    return SchemaConfig()


@pytest.fixture
def config(tmp_path):
    return load_config(overrides={
        "runtime.output_dir": str(tmp_path / "out"),
        "runtime.audit_dir": str(tmp_path / "audit"),
        "runtime.db_url": f"sqlite:///{tmp_path / 'runs.sqlite'}",
        "runtime.threads": 2,
        "bootstrap.replicates": 200,
    }, use_env=False)


@pytest.fixture(scope="session")
def go_range():
    return load_go_range(DEFAULT_GO_RANGE_FILE)


@pytest.fixture(scope="session")
def small_world(go_range):
    return generate(SMALL_WORLD, seed=7, go_range=go_range, calibration=PILOT_CALIBRATION)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def synthetic_cohort(rng, n=2000, go_effect=0.03, n_games=100):
    """
    Cohort-shaped frame where the go decision depends on precise distance
    and the go-minus-kick WPA gap is ``go_effect`` for every play.
    """
    precise = rng.uniform(0.05, 1.95, n)
    yardline = rng.integers(30, 90, n).astype(float)
    score = rng.integers(-14, 15, n).astype(float)
    went = rng.random(n) < 1.0 / (1.0 + np.exp(-(1.2 - 1.6 * precise - 0.03 * score)))
    noise = rng.normal(0.0, 0.05, n)
    return pd.DataFrame({
        "game_id": [f"g{i % n_games:03d}" for i in range(n)],
        "play_id": [str(i) for i in range(n)],
        "offense": [f"T{i % 8}" for i in range(n)],
        "yardline": yardline,
        "pbp_bucket": 1,
        "precise_yards": precise,
        "source": "TRACKING_BALL",
        "seconds_remaining": rng.uniform(0, 3600, n),
        "score_differential": score,
        "timeouts_possession": rng.integers(0, 4, n),
        "timeouts_opponent": rng.integers(0, 4, n),
        "quarter": rng.integers(1, 5, n),
        "goal_to_go": False,
        "pre_play_wp": rng.uniform(0.2, 0.8, n),
        "went_for_it": went,
        "converted": None,
        "wpa": np.where(went, go_effect, 0.0) - 0.05 * precise + noise,
        "eligible": True,
    })


@pytest.fixture
def make_cohort():
    return synthetic_cohort
