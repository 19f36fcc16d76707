# tests/test_acceptance.py
"""Long synthetic replications. Run with ``pytest -m slow``."""
import json
import time

import numpy as np
import pytest

from fourthdown.causal import run_analysis
from fourthdown.config import load_config
from fourthdown.core.types import AnalysisMode
from fourthdown.gam import predict
from fourthdown.ingest.loader import load_dataset
from fourthdown.report import fit_decision_curves
from fourthdown.synth import (
    GAMES_FILE,
    PLAYS_FILE,
    TRACKING_FILE,
    TRUTH_FILE,
    WorldConfig,
    calibrate,
    calibrate_effects,
    forced_go_gains,
    generate,
    generate_world_tables,
    matched_true_effect,
)
from fourthdown.synth.game import PILOT_CALIBRATION
from fourthdown.workflow import run_pipeline

pytestmark = pytest.mark.slow

N_WORLDS = 100
# these go through written files and the whole graph instead of the tables shortcut
PIPELINE_SEEDS = (0, 33, 66)
ATTENUATION_SEEDS = 20


@pytest.fixture(scope="module")
def calibrated(go_range):
    world = WorldConfig(n_games=1000)
    return world, calibrate(world, go_range)


@pytest.fixture
def fast_config(tmp_path):
    return load_config(overrides={
        "runtime.audit_dir": str(tmp_path / "audit"),
        "runtime.threads": 4,
        "bootstrap.replicates": 500,
    }, use_env=False)


def _pipeline_world(world, calib, seed, go_range, config, out):
    """One world through files, ingest, tracking yardage and the full graph."""
    paths = generate(world.replace(players_per_frame=0), seed, go_range, calib, workers=4).write(out / "data")
    with open(paths[TRUTH_FILE], encoding="utf-8") as f:
        truth = json.load(f)
    state = run_pipeline(config, [paths[TRACKING_FILE]], [paths[PLAYS_FILE]], paths[GAMES_FILE],
                         out_dir=out / "run", truth=truth, persist=False, run_id=f"world-{seed}")
    report = state["verification"]
    assert report["recovery"]["passed"], report["recovery"]
    assert report["matched_true_effect"] == pytest.approx(
        matched_true_effect(forced_go_gains(truth["latents"]),
                            state["analysis"].modes[AnalysisMode.PRECISE].pairs))
    return state["analysis"], report["matched_true_effect"]


def test_replicated_worlds_recover_confounding(calibrated, go_range, fast_config, tmp_path):
    world, calib = calibrated
    above = 0
    grows = 0
    covered = 0
    for seed in range(N_WORLDS):
        if seed in PIPELINE_SEEDS:
            result, truth = _pipeline_world(world, calib, seed, go_range, fast_config, tmp_path / f"w{seed}")
        else:
            tables = generate_world_tables(world, seed, go_range, calib, workers=4)
            result = run_analysis(tables.cohort, fast_config, tables.seasons, workers=4)
            truth = matched_true_effect(forced_go_gains(tables.latents),
                                        result.modes[AnalysisMode.PRECISE].pairs)
        integer = result.estimate(AnalysisMode.INTEGER_BUCKET)
        precise = result.estimate(AnalysisMode.PRECISE)
        above += integer.per_play_wpa_diff > precise.per_play_wpa_diff
        grows += bool(result.squeeze["confounder_grows"])
        covered += precise.ci_low <= truth <= precise.ci_high
    assert above >= 95
    assert grows >= 90
    assert covered >= 90


def test_attenuation_with_naive_effect_calibrated(calibrated, go_range, fast_config):
    world, calib = calibrated
    solved = calibrate_effects(world, calib, go_range, workers=4)
    assert solved.world.replace(wp_kappa=world.wp_kappa, wp_y0=world.wp_y0) == world
    assert solved.naive_effect == pytest.approx(0.038, abs=0.001)

    naive, precise = [], []
    for seed in range(1000, 1000 + ATTENUATION_SEEDS):
        tables = generate_world_tables(solved.world, seed, go_range, calib, workers=4)
        result = run_analysis(tables.cohort, fast_config, tables.seasons, workers=4, diagnostics=False)
        naive.append(result.estimate(AnalysisMode.INTEGER_BUCKET).per_play_wpa_diff)
        precise.append(result.estimate(AnalysisMode.PRECISE).per_play_wpa_diff)
    assert np.mean(naive) == pytest.approx(0.038, abs=0.005)
    assert 0.018 <= np.mean(precise) <= 0.028


def test_calibrated_curve_endpoints(calibrated, go_range):
    world, calib = calibrated
    tables = generate_world_tables(world.replace(n_games=4000), 1, go_range, calib, workers=4)
    curves = fit_decision_curves(tables.cohort, workers=4)

    for d, attempt, conversion in ((0.25, 0.70, 0.79), (1.75, 0.30, 0.55)):
        assert float(predict(curves.attempt, [d])[0]) == pytest.approx(attempt, abs=0.03)
        assert float(predict(curves.conversion, [d])[0]) == pytest.approx(conversion, abs=0.03)


def test_ingest_throughput(go_range, tmp_path):
    world = WorldConfig(n_games=10, frames_per_play=20)
    paths = generate(world, seed=2, go_range=go_range, calibration=PILOT_CALIBRATION, workers=4).write(tmp_path)
    with open(paths[TRACKING_FILE], encoding="utf-8") as f:
        rows = sum(1 for _ in f) - 1

    config = load_config(overrides={"runtime.threads": 4}, use_env=False)
    start = time.perf_counter()
    assembly, _ = load_dataset([str(paths[TRACKING_FILE])], [str(paths[PLAYS_FILE])], config,
                               str(paths[GAMES_FILE]))
    elapsed = time.perf_counter() - start
    assert len(assembly.datasets) == 10
    assert elapsed < 5.0 * max(rows, 300_000) / 300_000
