# tests/test_core.py
import numpy as np
import pandas as pd
import pytest

from fourthdown.config import AnalysisConfig, load_config
from fourthdown.core.errors import ConfigError, DataError, FourthDownError, ValidationError, VerificationError
from fourthdown.core.types import FIELD_LENGTH, FIELD_WIDTH, FieldPoint, GoDecision
from fourthdown.core.validation import out_of_range_mask, spacing_violations, validate_frame


def test_error_exit_codes_and_payload():
    assert ValidationError("X").exit_code == 2
    assert ConfigError("X").exit_code == 2
    assert DataError("X").exit_code == 3
    assert VerificationError("X").exit_code == 4
    assert FourthDownError("X").exit_code == 1

    err = DataError("TOO_FEW_PAIRS", "3 pairs", {"n_pairs": 3})
    assert err.to_dict() == {"error": "TOO_FEW_PAIRS", "message": "3 pairs", "details": {"n_pairs": 3}}
    assert isinstance(ConfigError("X"), ValidationError)


def test_field_point_bounds():
    assert FieldPoint(0.0, 0.0).in_bounds()
    assert FieldPoint(FIELD_LENGTH, FIELD_WIDTH).in_bounds()
    assert not FieldPoint(-0.01, 10.0).in_bounds()
    assert not FieldPoint(60.0, FIELD_WIDTH + 0.01).in_bounds()


def test_go_decision_rejects_conversion_on_kick():
    assert GoDecision(("g", "1"), True, True).converted is True
    assert GoDecision(("g", "1"), False).converted is None
    with pytest.raises(ValueError):
        GoDecision(("g", "1"), False, True)


def test_play_record_clock(make_play):
    assert make_play(quarter=1, game_clock_remaining=900.0).seconds_remaining == 3600.0
    assert make_play(quarter=4, game_clock_remaining=12.0).seconds_remaining == 12.0
    assert make_play(quarter=5, game_clock_remaining=300.0).seconds_remaining == 300.0
    play = make_play(possession_team="BBB")
    assert play.defense_team == "AAA"
    assert play.is_fourth_down and play.key == ("g1", "1")


def test_validate_frame_rules(make_frame):
    ok = make_frame(50.0)
    assert validate_frame(ok) is ok

    with pytest.raises(ValidationError) as exc:
        validate_frame(make_frame(121.0))
    assert exc.value.code == "COORD_OUT_OF_RANGE"

    with pytest.raises(ValidationError) as exc:
        validate_frame(make_frame(50.0, direction=360.0))
    assert exc.value.code == "BAD_DIRECTION"

    # 0.12 s is inside the tolerance, 0.2 s is not
    nxt = make_frame(50.5, frame_index=2)
    assert validate_frame(nxt, ok) is nxt
    late = make_frame(50.5, frame_index=3)
    with pytest.raises(ValidationError) as exc:
        validate_frame(late, ok)
    assert exc.value.code == "BAD_FRAME_SPACING"
    with pytest.raises(ValidationError):
        validate_frame(ok, nxt)


def test_vectorized_checks():
    mask = out_of_range_mask(np.array([0.0, 120.0, 120.5, np.nan]), np.array([0.0, 53.0, 10.0, 10.0]))
    assert mask.tolist() == [False, False, True, True]

    frames = pd.DataFrame({
        "game_id": ["g"] * 4,
        "play_id": ["1"] * 4,
        "entity_id": ["BALL"] * 3 + ["7"],
        "frame_index": [1, 2, 4, 9],
        "timestamp": [0.0, 0.1, 0.3, 5.0],
        "x": 0.0,
        "y": 0.0,
    })
    assert spacing_violations(frames).tolist() == [False, False, True, False]


def test_config_precedence(tmp_path, monkeypatch):
    toml = tmp_path / "run.toml"
    toml.write_text("[matching]\nseed = 11\ncaliper_sd = 0.25\n\n[runtime]\nthreads = 3\n", encoding="utf-8")

    config = load_config(str(toml), use_env=False)
    assert config.matching.seed == 11
    assert config.matching.caliper_sd == 0.25
    assert config.runtime.threads == 3
    assert config.worker_count == 3

    monkeypatch.setenv("FOURTHDOWN_MATCH_SEED", "99")
    assert load_config(str(toml)).matching.seed == 99
    assert load_config(str(toml), {"matching.seed": 5}).matching.seed == 5


def test_config_defaults_and_errors(tmp_path):
    config = load_config(use_env=False)
    assert config.matching.caliper_sd == pytest.approx(0.2)
    assert config.bootstrap.level == pytest.approx(0.95)
    assert config.go_range_path.name == "go_range.csv"
    assert isinstance(config.to_dict()["schema"]["tracking"], dict)
    assert isinstance(AnalysisConfig().schema.tracking, dict)

    with pytest.raises(ConfigError) as exc:
        load_config(overrides={"matching.nope": 1}, use_env=False)
    assert exc.value.code == "UNKNOWN_CONFIG_KEY"
    with pytest.raises(ConfigError) as exc:
        load_config(overrides={"kinematics.window": 4}, use_env=False)
    assert exc.value.code == "BAD_CONFIG_VALUE"
    with pytest.raises(ConfigError) as exc:
        load_config(str(tmp_path / "missing.toml"), use_env=False)
    assert exc.value.code == "CONFIG_NOT_FOUND"
