# tests/test_synth.py
import json

import numpy as np
import pytest
from pandas.testing import assert_frame_equal

from fourthdown.causal import MatchedPair
from fourthdown.core.errors import DataError, ValidationError, VerificationError
from fourthdown.decisions import COHORT_COLUMNS
from fourthdown.synth import (
    TRUTH_FILE,
    Calibration,
    WorldConfig,
    calibrate,
    check_calibration,
    expected_wpa,
    forced_go_gains,
    generate,
    generate_world_tables,
    matched_true_effect,
    monte_carlo_effect,
    oracle_wp,
    pbp_yardline,
    sample_true_effect,
    true_effect,
)
from fourthdown.synth.calibrate import pilot_bank, pilot_world
from fourthdown.synth.game import PILOT_CALIBRATION

from conftest import SMALL_WORLD


def test_world_config_validation():
    assert WorldConfig().validate() == WorldConfig()
    with pytest.raises(ValidationError) as exc:
        WorldConfig(n_games=0, snap_frame=20, target_median_go=1.5).validate()
    assert exc.value.code == "INVALID_CONFIG"
    assert len(exc.value.details["problems"]) == 3
    with pytest.raises(ValidationError):
        WorldConfig(target_naive_effect=0.02).validate()


@pytest.mark.parametrize("spot, yardline", [(0.2, 1), (49.49, 49), (49.5, 50), (99.7, 99), (63.0, 63)])
def test_pbp_yardline(spot, yardline):
    assert pbp_yardline(spot) == yardline


def test_oracle_wp_shape():
    world = WorldConfig()
    assert oracle_wp(world, 0.0, world.wp_y0, 1800.0) == pytest.approx(0.5)
    assert oracle_wp(world, 7.0, 50.0, 60.0) > oracle_wp(world, 7.0, 50.0, 3000.0)
    assert oracle_wp(world, -14.0, 50.0, 0.0) < 0.01


def test_generate_is_worker_invariant(go_range):
    world = SMALL_WORLD.replace(n_games=6)
    one = generate(world, seed=3, go_range=go_range, calibration=PILOT_CALIBRATION, workers=1)
    three = generate(world, seed=3, go_range=go_range, calibration=PILOT_CALIBRATION, workers=3)
    assert_frame_equal(one.latents(), three.latents())
    for a, b in zip(one.games, three.games):
        assert a.meta == b.meta
        assert a.plays == b.plays
        assert_frame_equal(a.frames, b.frames)
    assert one.true_effect == three.true_effect

    other = generate(world, seed=4, go_range=go_range, calibration=PILOT_CALIBRATION)
    assert other.latents()["distance"].tolist() != one.latents()["distance"].tolist()


def test_generated_world_shape(small_world):
    assert len(small_world.games) == SMALL_WORLD.n_games
    first = small_world.games[0].meta
    assert first.game_id == "201700000" and first.season == 2017
    assert small_world.seasons()["201800001"] == 2018

    latents = small_world.latents()
    assert (latents["distance"] > 0).all()
    assert (latents["pbp_yardline"].between(1, 99)).all()
    # only eligible plays go for it, and only go plays carry a conversion
    assert not (latents["went_for_it"] & ~latents["eligible"]).any()
    assert latents.loc[~latents["went_for_it"], "converted"].isna().all()
    np.testing.assert_allclose(latents["oracle_wpa"], latents["wp_after"] - latents["pre_wp"])

    for game in small_world.games:
        fourth = [p for p in game.plays if p.is_fourth_down]
        assert len(fourth) == len(game.latents)
        assert all(p.home_team == game.meta.home_team for p in game.plays)

    truth = small_world.truth()
    assert {"seed", "world", "calibration", "true_effect", "sample_true_effect",
            "latent_medians", "seasons", "latents"} <= set(truth)
    assert truth["sample_true_effect"] == pytest.approx(sample_true_effect(truth["latents"]))


def test_world_write_and_streams(small_world, tmp_path):
    paths = small_world.write(tmp_path / "world")
    assert all(p.exists() for p in paths.values())
    truth = json.loads(paths[TRUTH_FILE].read_text(encoding="utf-8"))
    assert truth["seed"] == 7
    assert truth["n_games"] == SMALL_WORLD.n_games

    tracking, plays, games, sidecar = small_world.streams()
    assert tracking.readline().startswith("gameId,playId")
    assert len(games.read().strip().splitlines()) == SMALL_WORLD.n_games + 1
    assert json.loads(sidecar)["true_effect"] == pytest.approx(small_world.true_effect)


def test_sample_true_effect():
    latents = [
        {"eligible": True, "went_for_it": False, "expected_go_wp": 0.6, "expected_kick_wp": 0.5},
        {"eligible": True, "went_for_it": False, "expected_go_wp": 0.4, "expected_kick_wp": 0.4},
        {"eligible": True, "went_for_it": True, "expected_go_wp": 0.9, "expected_kick_wp": 0.1},
        {"eligible": False, "went_for_it": False, "expected_go_wp": 0.9, "expected_kick_wp": 0.1},
    ]
    assert sample_true_effect(latents) == pytest.approx(0.05)
    with pytest.raises(DataError) as exc:
        sample_true_effect(latents[2:])
    assert exc.value.code == "NO_ELIGIBLE_PLAYS"


def test_check_calibration():
    world = WorldConfig()
    hit = {"go_rate_short": 0.705, "go_rate_long": 0.30, "median_go": 0.70, "median_no_go": 0.98}
    check_calibration(world, Calibration(0.0, -1.0, 2.0, 2.0, hit))

    missed = dict(hit, median_no_go=1.05)
    with pytest.raises(VerificationError) as exc:
        check_calibration(world, Calibration(0.0, -1.0, 2.0, 2.0, missed))
    assert exc.value.code == "CALIBRATION_FAILED"
    assert list(exc.value.details["missed"]) == ["median_no_go"]
    assert exc.value.exit_code == 4


def test_calibrate_hits_go_rates(go_range):
    calib = calibrate(SMALL_WORLD, go_range)
    assert calib.achieved["go_rate_short"] == pytest.approx(SMALL_WORLD.target_go_short, abs=0.01)
    assert calib.achieved["go_rate_long"] == pytest.approx(SMALL_WORLD.target_go_long, abs=0.01)
    assert calib.decision_distance < 0
    assert 1.0 <= calib.beta_a <= 50.0 and 1.0 <= calib.beta_b <= 50.0
    assert calib.achieved["bank_states"] == len(pilot_bank(pilot_world(SMALL_WORLD), go_range))

    fixed = calibrate(SMALL_WORLD.replace(decision_intercept=0.5, decision_distance=-2.0), go_range)
    assert (fixed.decision_intercept, fixed.decision_distance) == (0.5, -2.0)


def test_pilot_world_shares_cache():
    tweaked = SMALL_WORLD.replace(n_games=999, players_per_frame=22, beta_a=3.0, wp_kappa=0.2, wp_y0=10.0)
    assert pilot_world(tweaked) == pilot_world(SMALL_WORLD)


def test_world_tables(go_range):
    world = SMALL_WORLD.replace(n_games=60)
    tables = generate_world_tables(world, seed=11, go_range=go_range, calibration=PILOT_CALIBRATION)
    cohort = tables.cohort
    assert list(cohort.columns) == COHORT_COLUMNS
    assert len(cohort) > 0
    assert not (cohort["went_for_it"] & ~cohort["eligible"]).any()
    assert cohort.loc[~cohort["went_for_it"], "converted"].isna().all()
    assert set(tables.seasons.values()) == set(world.seasons)
    assert set(cohort["game_id"]) <= set(tables.seasons)
    assert (cohort["precise_yards"] > 0).all()

    again = generate_world_tables(world, seed=11, go_range=go_range, calibration=PILOT_CALIBRATION)
    assert_frame_equal(again.cohort, cohort)


def test_expected_wpa_and_matched_truth(go_range):
    world = SMALL_WORLD.replace(n_games=60)
    tables = generate_world_tables(world, seed=11, go_range=go_range, calibration=PILOT_CALIBRATION)
    latents = tables.latents
    as_played = expected_wpa(world, latents)
    forced = expected_wpa(world, latents.assign(went_for_it=True))
    kicked = expected_wpa(world, latents.assign(went_for_it=False))
    np.testing.assert_allclose(forced - kicked, latents["forced_go_gain"], atol=1e-12)
    np.testing.assert_allclose(as_played, np.where(latents["went_for_it"], forced, kicked))

    # punts have one outcome, so realized and expected WPA agree
    realized = tables.cohort.set_index(["game_id", "play_id"]).loc[
        list(zip(latents["game_id"], latents["play_id"])), "wpa"].to_numpy(dtype=float)
    punts = (~latents["went_for_it"] & (latents["spot"] < world.fg_min_yardline)).to_numpy()
    assert punts.any()
    np.testing.assert_allclose(as_played[punts], realized[punts], atol=1e-12)

    kicks = latents[latents["eligible"] & ~latents["went_for_it"]].head(3)
    goes = latents[latents["went_for_it"]].head(3)
    pairs = [MatchedPair((k.game_id, k.play_id), (g.game_id, g.play_id), 0.0)
             for k, g in zip(kicks.itertuples(), goes.itertuples())]
    gains = forced_go_gains(latents)
    assert len(gains) == len(latents)
    assert matched_true_effect(gains, pairs) == pytest.approx(kicks["forced_go_gain"].mean())
    with pytest.raises(DataError) as exc:
        matched_true_effect({}, pairs)
    assert exc.value.code == "MISSING_LATENT"
    with pytest.raises(DataError) as exc:
        matched_true_effect(gains, [])
    assert exc.value.code == "NO_MATCHED_PAIRS"
    assert forced_go_gains([]) == {}


@pytest.mark.slow
def test_quadrature_matches_monte_carlo(go_range):
    world = WorldConfig()
    bank = pilot_bank(pilot_world(world), go_range, workers=4)
    calib = calibrate(world, go_range, bank=bank)
    exact = true_effect(world, calib, go_range, bank)
    finer = true_effect(world, calib, go_range, bank, panels=32, nodes=10)
    assert exact == pytest.approx(finer, abs=5e-4)
    sampled = monte_carlo_effect(world, calib, go_range, n_pairs=1_000_000, seed=5, bank=bank)
    assert sampled == pytest.approx(exact, abs=0.001)
