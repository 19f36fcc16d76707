# fourthdown/synth/generate.py
"""
Generate synthetic worlds: full tracking and play-by-play files through the
ingest writers, or a cohort table straight from the state bank for fast
replications.
"""

import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from utils import ensure_dir, save_json, to_json

from ..config import DEFAULT_GO_RANGE_FILE, SchemaConfig
from ..core.types import YardageSource
from ..decisions.cohort import COHORT_COLUMNS
from ..decisions.go_range import GoRange, load_go_range
from ..ingest.assemble import GameDataset
from ..ingest.writers import write_games, write_plays, write_tracking
from .calibrate import calibrate, eligible_mask, max_go_table, pilot_bank, pilot_world
from .game import LATENT_COLUMNS, GameSimulator, SimulatedGame, team_name
from .truth import sample_true_effect, true_effect
from .world import (
    Calibration,
    WorldConfig,
    conversion_probability,
    decision_probability,
    expected_go_wp,
    expected_kick_wp,
    go_outcome_wp,
    kick_outcome_wp,
    oracle_wp,
    sample_distance,
)

logger = logging.getLogger(__name__)

TRACKING_FILE = "tracking.csv"
PLAYS_FILE = "plays.csv"
GAMES_FILE = "games.csv"
TRUTH_FILE = "truth.json"


@dataclass
class GeneratedWorld:
    world: WorldConfig
    calibration: Calibration
    seed: int
    games: List[SimulatedGame]
    true_effect: float
    sample_true_effect: float

    def datasets(self) -> List[GameDataset]:
        return [g.to_dataset() for g in self.games]

    def latents(self) -> pd.DataFrame:
        rows = [r for g in self.games for r in g.latents]
        return pd.DataFrame(rows, columns=LATENT_COLUMNS)

    def seasons(self) -> Dict[str, int]:
        return {g.meta.game_id: g.meta.season for g in self.games}

    def truth(self) -> Dict:
        latents = self.latents()
        return {
            "seed": self.seed,
            "world": self.world.to_dict(),
            "calibration": self.calibration.to_dict(),
            "true_effect": self.true_effect,
            "sample_true_effect": self.sample_true_effect,
            "latent_medians": latent_medians(latents),
            "n_games": len(self.games),
            "n_plays": sum(len(g.plays) for g in self.games),
            "seasons": self.seasons(),
            "latents": [r for g in self.games for r in g.latents],
        }

    def write(self, out_dir, schema: Optional[SchemaConfig] = None) -> Dict[str, Path]:
        schema = schema or SchemaConfig()
        out = Path(out_dir)
        ensure_dir(str(out))
        datasets = self.datasets()
        paths = {name: out / name for name in (TRACKING_FILE, PLAYS_FILE, GAMES_FILE, TRUTH_FILE)}
        n_frames = write_tracking(datasets, paths[TRACKING_FILE], schema)
        n_plays = write_plays(datasets, paths[PLAYS_FILE], schema)
        write_games([g.meta for g in self.games], paths[GAMES_FILE], schema)
        save_json(self.truth(), paths[TRUTH_FILE])
        logger.info("wrote %d frames and %d plays to %s", n_frames, n_plays, out)
        return paths

    def streams(self, schema: Optional[SchemaConfig] = None) -> Tuple[io.StringIO, io.StringIO, io.StringIO, str]:
        """(tracking, plays, games) CSV streams rewound to the start, plus the sidecar JSON."""
        schema = schema or SchemaConfig()
        datasets = self.datasets()
        tracking, plays, games = io.StringIO(), io.StringIO(), io.StringIO()
        write_tracking(datasets, tracking, schema)
        write_plays(datasets, plays, schema)
        write_games([g.meta for g in self.games], games, schema)
        for stream in (tracking, plays, games):
            stream.seek(0)
        return tracking, plays, games, to_json(self.truth())


def latent_medians(latents: pd.DataFrame) -> Dict[str, Dict[str, Optional[float]]]:
    """Median latent distance per bucket and decision over eligible plays."""
    out: Dict[str, Dict[str, Optional[float]]] = {}
    eligible = latents[latents["eligible"].astype(bool)]
    for bucket in sorted(eligible["pbp_bucket"].unique()):
        group = eligible[eligible["pbp_bucket"] == bucket]
        went = group["went_for_it"].astype(bool)
        out[str(int(bucket))] = {
            "go": float(group.loc[went, "distance"].median()) if went.any() else None,
            "no_go": float(group.loc[~went, "distance"].median()) if (~went).any() else None,
        }
    return out


def _resolve(world: WorldConfig, go_range: Optional[GoRange], calibration: Optional[Calibration],
             workers: int) -> Tuple[GoRange, Calibration]:
    world.validate()
    go_range = go_range or load_go_range(DEFAULT_GO_RANGE_FILE)
    return go_range, calibration or calibrate(world, go_range, workers)


def generate(world: WorldConfig, seed: int, go_range: Optional[GoRange] = None,
             calibration: Optional[Calibration] = None, workers: int = 1) -> GeneratedWorld:
    """
    Simulate ``world.n_games`` games. Game i draws from a generator seeded
    with (seed, i), so output does not depend on the worker count.
    """
    go_range, calib = _resolve(world, go_range, calibration, workers)
    simulator = GameSimulator(world, calib, go_range)
    if workers > 1 and world.n_games > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            games = list(pool.map(lambda i: simulator.play_game(i, seed), range(world.n_games)))
    else:
        games = [simulator.play_game(i, seed) for i in range(world.n_games)]

    latents = [r for g in games for r in g.latents]
    generated = GeneratedWorld(
        world=world,
        calibration=calib,
        seed=seed,
        games=games,
        true_effect=true_effect(world, calib, go_range),
        sample_true_effect=sample_true_effect(latents),
    )
    logger.info("generated %d games, %d fourth downs, true effect %.4f (sample %.4f)",
                len(games), len(latents), generated.true_effect, generated.sample_true_effect)
    return generated


@dataclass
class WorldTables:
    cohort: pd.DataFrame
    latents: pd.DataFrame
    seasons: Dict[str, int]
    true_effect: float
    sample_true_effect: float
    calibration: Calibration


def generate_world_tables(world: WorldConfig, seed: int, go_range: Optional[GoRange] = None,
                          calibration: Optional[Calibration] = None, workers: int = 1) -> WorldTables:
    """
    Cohort rows drawn directly from the fourth-down state bank, with oracle
    pre-play WP and WPA. The bank supplies about as many states per game as
    the full simulator produces.
    """
    go_range, calib = _resolve(world, go_range, calibration, workers)
    bank = pilot_bank(pilot_world(world), go_range, workers)
    table = max_go_table(go_range)
    rng = np.random.default_rng(seed)
    n = max(1, int(round(len(bank) / world.pilot_games * world.n_games)))

    states = bank.iloc[rng.integers(0, len(bank), n)].reset_index(drop=True)
    ltg = states["line_to_gain"].to_numpy(dtype=float)
    margin = states["score_differential"].to_numpy(dtype=float)
    seconds = states["seconds_remaining"].to_numpy(dtype=float)
    d = sample_distance(world, calib, rng, n)
    spot = ltg - d
    elig = eligible_mask(table, ltg, d)
    pi = decision_probability(world, calib, d, spot, margin)
    went = elig & (rng.random(n) < pi)
    after = np.maximum(seconds - world.fourth_down_seconds, 0.0)
    converted = rng.random(n) < conversion_probability(world, d)
    converted_wp, failed_wp = go_outcome_wp(world, d, spot, margin, after)
    made_wp, missed_wp, p_make = kick_outcome_wp(world, spot, margin, after)
    made = rng.random(n) < p_make
    pre = oracle_wp(world, margin, spot, seconds)
    post = np.where(went, np.where(converted, converted_wp, failed_wp), np.where(made, made_wp, missed_wp))

    game_index = np.arange(n) % world.n_games
    seasons = {f"{world.seasons[g % len(world.seasons)]}{g:05d}": world.seasons[g % len(world.seasons)]
               for g in range(world.n_games)}
    game_ids = [f"{world.seasons[g % len(world.seasons)]}{g:05d}" for g in game_index]
    yardline = np.clip(np.floor(spot + 0.5), 1, 99)
    bucket = np.where(d < 2.0, 1, np.floor(d)).astype(int)
    cohort = pd.DataFrame({
        "game_id": game_ids,
        "play_id": [str(i + 1) for i in range(n)],
        "offense": [team_name(int(t)) for t in rng.integers(0, world.n_teams, n)],
        "yardline": yardline,
        "pbp_bucket": bucket,
        "precise_yards": d,
        "source": YardageSource.TRACKING_BALL.value,
        "seconds_remaining": seconds,
        "score_differential": margin.astype(int),
        "timeouts_possession": states["timeouts_possession"].to_numpy(dtype=int),
        "timeouts_opponent": states["timeouts_opponent"].to_numpy(dtype=int),
        "quarter": states["quarter"].to_numpy(dtype=int),
        "goal_to_go": states["goal_to_go"].astype(bool).to_numpy(),
        "pre_play_wp": pre,
        "went_for_it": went,
        "converted": np.where(went, converted, None),
        "wpa": post - pre,
        "eligible": elig,
    })[COHORT_COLUMNS]
    cohort = cohort.sort_values(["game_id", "play_id"], kind="mergesort").reset_index(drop=True)

    gain = expected_go_wp(world, d, spot, margin, after) - expected_kick_wp(world, spot, margin, after)
    latents = pd.DataFrame({
        "game_id": game_ids, "play_id": [str(i + 1) for i in range(n)], "distance": d, "spot": spot,
        "score_differential": margin, "seconds_remaining": seconds,
        "eligible": elig, "went_for_it": went, "propensity": pi, "forced_go_gain": gain,
    })
    kicks = elig & ~went
    sample = float(gain[kicks].mean()) if kicks.any() else float("nan")
    return WorldTables(cohort, latents, seasons, true_effect(world, calib, go_range, bank), sample, calib)
