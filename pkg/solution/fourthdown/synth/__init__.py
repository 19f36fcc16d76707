# fourthdown/synth/__init__.py
from .calibrate import calibrate, check_calibration, pilot_bank
from .effects import EffectCalibration, calibrate_effects, expected_wpa
from .game import GameSimulator, SimulatedGame, pbp_yardline
from .generate import (
    GAMES_FILE,
    PLAYS_FILE,
    TRACKING_FILE,
    TRUTH_FILE,
    GeneratedWorld,
    WorldTables,
    generate,
    generate_world_tables,
)
from .truth import forced_go_gains, matched_true_effect, monte_carlo_effect, sample_true_effect, true_effect
from .world import Calibration, WorldConfig, oracle_wp

__all__ = [
    "Calibration", "EffectCalibration", "GAMES_FILE", "GameSimulator", "GeneratedWorld", "PLAYS_FILE",
    "SimulatedGame", "TRACKING_FILE", "TRUTH_FILE", "WorldConfig", "WorldTables", "calibrate",
    "calibrate_effects", "check_calibration", "expected_wpa", "forced_go_gains", "generate",
    "generate_world_tables", "matched_true_effect", "monte_carlo_effect", "oracle_wp", "pbp_yardline",
    "pilot_bank", "sample_true_effect", "true_effect",
]
