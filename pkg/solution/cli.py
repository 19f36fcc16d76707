# cli.py
"""
Command-line surface for the fourth-down analysis.

    python cli.py simulate --seed 7 --games 50 --out ./out/sim
    python cli.py verify --data-dir ./out/sim
    python cli.py estimate --tracking tracking.csv --plays plays.csv --games games.csv

Exit codes: 0 success, 2 validation failure, 3 data error, 4 verification
failure (1 for anything unexpected). Failures print a JSON error document
on stderr; successful runs print their summary JSON on stdout.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from utils import ensure_dir, save_json, to_json

from fourthdown.config import AnalysisConfig, load_config
from fourthdown.core.errors import DataError, FourthDownError, ValidationError, VerificationError
from fourthdown.report.figures import CURVE_FILES, curves_figure, fit_decision_curves
from fourthdown.synth import GAMES_FILE, PLAYS_FILE, TRACKING_FILE, TRUTH_FILE, WorldConfig, generate
from fourthdown.workflow import run_pipeline

logger = logging.getLogger("fourthdown.cli")

# subcommand -> (last pipeline node, extra run_pipeline options)
PIPELINE_COMMANDS = {
    "ingest": ("ingest", {}),
    "normalize": ("normalize", {"write_normalized": True}),
    "distance": ("distance", {}),
    "fit-wp": ("fit_wp", {}),
    "fit-gam": ("fit_wp", {}),
    "estimate": ("estimate", {}),
    "figures": ("diagnostics", {"figures": True}),
}
GAM_SUMMARY_FILE = "gam_fit.json"
ERRORS_BY_EXIT_CODE = {2: ValidationError, 3: DataError, 4: VerificationError}


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--threads", type=int, help="worker cap (default: machine parallelism)")
    parser.add_argument("--out", help="output directory (default: runtime.output_dir)")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--no-store", action="store_true", help="skip the run registry")


def _add_inputs(parser: argparse.ArgumentParser):
    parser.add_argument("--tracking", nargs="+", default=[], help="tracking CSV file(s)")
    parser.add_argument("--plays", nargs="+", default=[], help="play-by-play CSV file(s)")
    parser.add_argument("--games", help="games CSV with final scores")
    parser.add_argument("--data-dir", help=f"directory holding {TRACKING_FILE}, {PLAYS_FILE} and {GAMES_FILE}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fourthdown", description="Fourth-down tracking analytics")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("ingest", "validate and assemble tracking and play-by-play files"),
        ("normalize", "flip plays to a left-to-right offense and compute kinematics"),
        ("distance", "precise distance to the line to gain plus the discrepancy report"),
        ("fit-gam", "attempt and conversion curves over precise distance"),
        ("fit-wp", "fit the win probability model and build the fourth-down cohort"),
        ("estimate", "matched go-for-it effect in integer-bucket and precise modes"),
        ("figures", "density, curve and conditional-gap series as CSV and SVG"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        _add_inputs(p)

    p = sub.add_parser("simulate", help="write a synthetic world in the ingest schemas")
    _add_common(p)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--games", type=int, default=WorldConfig.n_games)

    p = sub.add_parser("verify", help="synthetic end-to-end run checked against the ground truth")
    _add_common(p)
    p.add_argument("--data-dir", help="output of `simulate`; generated first when absent")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--games", type=int, default=WorldConfig.n_games)
    return parser


def _config(args) -> AnalysisConfig:
    overrides: Dict[str, Any] = {}
    if args.threads is not None:
        overrides["runtime.threads"] = args.threads
    if args.out:
        overrides["runtime.output_dir"] = args.out
    if args.log_level:
        overrides["runtime.log_level"] = args.log_level
    return load_config(args.config, overrides)


def _setup_logging(level: str):
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _inputs(args) -> Dict[str, Any]:
    tracking: List[str] = list(args.tracking)
    plays: List[str] = list(args.plays)
    games: Optional[str] = args.games
    if args.data_dir:
        data = Path(args.data_dir)
        tracking = tracking or [str(data / TRACKING_FILE)]
        plays = plays or [str(data / PLAYS_FILE)]
        if games is None and (data / GAMES_FILE).exists():
            games = str(data / GAMES_FILE)
    return {"tracking_paths": tracking, "plays_paths": plays, "games_path": games}


def _state_result(state: Dict[str, Any]) -> Dict[str, Any]:
    error = state.get("error")
    if error:
        error_class = ERRORS_BY_EXIT_CODE.get(error.get("exit_code"), FourthDownError)
        raise error_class(error.get("error", "INTERNAL_ERROR"), error.get("message", ""), error.get("details", {}))
    return {"run_id": state["run_id"], "out_dir": state["out_dir"], **state.get("summary", {})}


def run_command(args, config: AnalysisConfig) -> Dict[str, Any]:
    if args.command == "simulate":
        return simulate(config, args.seed, args.games, args.out or config.runtime.output_dir)
    if args.command == "verify":
        return verify(config, args)

    stop_after, options = PIPELINE_COMMANDS[args.command]
    state = run_pipeline(config, command=args.command, stop_after=stop_after, persist=not args.no_store,
                         **_inputs(args), **options)
    result = _state_result(state)
    if args.command == "fit-gam":
        result["gam"] = fit_gam(state, config)
    return result


def fit_gam(state: Dict[str, Any], config: AnalysisConfig) -> Dict[str, Any]:
    cohort = state["cohort"]
    if cohort.empty:
        raise DataError("NO_ELIGIBLE_PLAYS", "cohort is empty")
    curves = fit_decision_curves(cohort, config, config.worker_count)
    table, svg = curves_figure(curves)
    out = Path(state["out_dir"])
    table.to_csv(out / CURVE_FILES[0], index=False, lineterminator="\n")
    with open(out / CURVE_FILES[1], "w", encoding="utf-8", newline="\n") as f:
        f.write(svg)
    summary = curves.summary()
    save_json(summary, out / GAM_SUMMARY_FILE)
    return summary


def simulate(config: AnalysisConfig, seed: int, n_games: int, out_dir: str) -> Dict[str, Any]:
    world = WorldConfig().replace(n_games=n_games).validate()
    generated = generate(world, seed, workers=config.worker_count)
    paths = generated.write(out_dir, config.schema)
    truth = generated.truth()
    return {
        "files": {name: str(path) for name, path in paths.items()},
        "true_effect": truth["true_effect"],
        "sample_true_effect": truth["sample_true_effect"],
        "calibration": truth["calibration"],
        "latent_medians": truth["latent_medians"],
        "n_games": truth["n_games"],
        "n_plays": truth["n_plays"],
    }


def verify(config: AnalysisConfig, args) -> Dict[str, Any]:
    out = Path(args.out or config.runtime.output_dir)
    data = Path(args.data_dir) if args.data_dir else out / "world"
    if not (data / TRUTH_FILE).exists():
        ensure_dir(str(data))
        logger.info("no synthetic world in %s; generating seed %d with %d games", data, args.seed, args.games)
        simulate(config, args.seed, args.games, str(data))
    with open(data / TRUTH_FILE, "r", encoding="utf-8") as f:
        truth = json.load(f)
    state = run_pipeline(
        config,
        tracking_paths=[str(data / TRACKING_FILE)],
        plays_paths=[str(data / PLAYS_FILE)],
        games_path=str(data / GAMES_FILE),
        out_dir=str(out),
        command="verify",
        truth=truth,
        figures=True,
        persist=not args.no_store,
    )
    return _state_result(state)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config(args)
        _setup_logging(config.runtime.log_level)
        result = run_command(args, config)
    except FourthDownError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), default=str) + "\n")
        return exc.exit_code
    except Exception as exc:
        logger.exception("unexpected failure")
        sys.stderr.write(json.dumps({"error": "INTERNAL_ERROR", "message": str(exc), "details": {}}) + "\n")
        return 1
    sys.stdout.write(to_json(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
