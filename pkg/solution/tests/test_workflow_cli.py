# tests/test_workflow_cli.py
import json

import pytest

import cli
from fourthdown.config import load_config
from fourthdown.report.auditor import RunAuditor
from fourthdown.store import RunRepository
from fourthdown.synth import GAMES_FILE, PLAYS_FILE, TRACKING_FILE, TRUTH_FILE
from fourthdown.workflow import (
    COHORT_FILE,
    DISCREPANCY_FILE,
    ESTIMATE_FILE,
    YARDAGE_FILE,
    recovery_check,
    run_pipeline,
)


@pytest.fixture(scope="module")
def world_dir(small_world, tmp_path_factory):
    out = tmp_path_factory.mktemp("world")
    small_world.write(out)
    return out


@pytest.fixture
def truth(world_dir):
    with open(world_dir / TRUTH_FILE, encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def cli_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FOURTHDOWN_AUDIT_DIR", str(tmp_path / "audit"))
    monkeypatch.setenv("FOURTHDOWN_DB_URL", f"sqlite:///{tmp_path / 'runs.sqlite'}")
    monkeypatch.setenv("FOURTHDOWN_THREADS", "2")
    return tmp_path


def inputs(world_dir):
    return {
        "tracking_paths": [world_dir / TRACKING_FILE],
        "plays_paths": [world_dir / PLAYS_FILE],
        "games_path": world_dir / GAMES_FILE,
    }


def test_unknown_stop_after(config):
    with pytest.raises(ValueError):
        run_pipeline(config, stop_after="bogus")


def test_missing_inputs_end_in_error_state(config):
    state = run_pipeline(config, persist=False, run_id="r-empty")
    assert state["error"]["error"] == "NO_INPUT"
    assert state["error"]["node"] == "node_ingest"
    assert state["error"]["exit_code"] == 3
    assert state["summary"] == {}

    audits = RunAuditor(config.runtime.audit_dir).search_audits(run_id="r-empty", event_type="node_error")
    assert len(audits) == 1


def test_pipeline_through_distance(config, world_dir, truth, tmp_path):
    out = tmp_path / "run"
    state = run_pipeline(config, **inputs(world_dir), out_dir=out, stop_after="distance", persist=False)
    assert state["error"] is None
    assert set(state["summary"]) == {"ingest", "normalize", "distance"}
    assert state["summary"]["ingest"]["n_games"] == truth["n_games"]
    assert state["summary"]["ingest"]["n_plays"] == truth["n_plays"]
    assert state["summary"]["normalize"]["direction_unknown"] == 0
    assert (out / YARDAGE_FILE).exists() and (out / DISCREPANCY_FILE).exists()
    assert "cohort" not in state

    recovery = recovery_check(state["yardage"], truth["latents"])
    assert recovery["passed"], recovery
    assert recovery["checked"] == len(truth["latents"])

    missing = recovery_check(state["yardage"], [{"game_id": "nope", "play_id": "1", "distance": 1.0}])
    assert missing["passed"] is False and missing["missing"] == ["nope:1"]


def test_pipeline_through_estimate(world_dir, truth, tmp_path):
    config = load_config(overrides={
        "runtime.audit_dir": str(tmp_path / "audit"),
        "runtime.db_url": f"sqlite:///{tmp_path / 'runs.sqlite'}",
        "runtime.threads": 2,
        "bootstrap.replicates": 200,
        "analysis.min_pairs": 10,
    }, use_env=False)
    out = tmp_path / "run"
    state = run_pipeline(config, **inputs(world_dir), out_dir=out, stop_after="estimate",
                         truth=truth, command="estimate", run_id="r-est")
    assert state["error"] is None, state["error"]
    assert state["summary"]["fit_wp"]["wpa_source"] == "oracle"
    assert state["summary"]["fit_wp"]["cohort_plays"] == len(truth["latents"])
    assert "diagnostics" not in state["summary"]
    assert (out / COHORT_FILE).exists()

    estimates = json.loads((out / ESTIMATE_FILE).read_text(encoding="utf-8"))
    assert set(estimates) == {"INTEGER_BUCKET", "PRECISE"}
    for est in estimates.values():
        assert est["ci_low"] <= est["per_play_wpa_diff"] <= est["ci_high"]
        assert (out / f"matched_pairs_{est['mode']}.csv").exists()

    stored = RunRepository(config.runtime.db_url).get_run("r-est")
    assert stored["status"] == "completed"
    assert {e["mode"] for e in stored["estimates"]} == {"INTEGER_BUCKET", "PRECISE"}
    assert {m["name"] for m in stored["model_fits"]} == {
        "win_probability", "propensity_INTEGER_BUCKET", "propensity_PRECISE",
    }


def test_cli_exit_codes(cli_env, capsys, tmp_path):
    assert cli.main(["ingest", "--out", str(tmp_path / "out"), "--no-store"]) == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "NO_INPUT"

    assert cli.main(["estimate", "--config", str(tmp_path / "missing.toml")]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "CONFIG_NOT_FOUND"

    with pytest.raises(SystemExit):
        cli.main(["no-such-command"])


def test_cli_distance(cli_env, world_dir, capsys):
    out = cli_env / "distance"
    code = cli.main(["distance", "--data-dir", str(world_dir), "--out", str(out), "--log-level", "WARNING"])
    captured = capsys.readouterr()
    assert code == 0, captured.err
    result = json.loads(captured.out)
    assert result["out_dir"] == str(out)
    assert result["distance"]["fourth_downs"] > 0
    assert (out / YARDAGE_FILE).exists()
    # stored in the registry named by the environment
    runs = RunRepository(f"sqlite:///{cli_env / 'runs.sqlite'}").list_runs()
    assert [r["command"] for r in runs] == ["distance"]


@pytest.mark.slow
def test_cli_simulate_then_verify(cli_env, capsys):
    data = cli_env / "sim"
    assert cli.main(["simulate", "--seed", "3", "--games", "150", "--out", str(data)]) == 0
    simulated = json.loads(capsys.readouterr().out)
    assert simulated["n_games"] == 150
    assert all((data / name).exists() for name in (TRACKING_FILE, PLAYS_FILE, GAMES_FILE, TRUTH_FILE))

    out = cli_env / "verify"
    code = cli.main(["verify", "--data-dir", str(data), "--out", str(out), "--no-store"])
    captured = capsys.readouterr()
    assert code in (0, 4), captured.err
    report = json.loads((out / "verify.json").read_text(encoding="utf-8"))
    assert report["checks"]["recoverability"] is True
    assert report["checks"]["integer_above_precise"] is True
    assert report["true_effect"] == pytest.approx(simulated["true_effect"])
    assert (out / "figures" / "conditional_gaps.svg").exists()
