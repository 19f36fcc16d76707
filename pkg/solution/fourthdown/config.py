# fourthdown/config.py
"""
Analysis configuration.

Precedence (lowest first): shipped defaults, TOML file, environment
(``FOURTHDOWN_*`` keys, read through python-dotenv), explicit overrides
(CLI flags). Every tunable the analysis leaves open lives here so a run is
reproducible from its config dump.
"""

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from dotenv import load_dotenv

from .core.errors import ConfigError

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

CONFIG_DIR = Path(__file__).resolve().parent.parent / "data" / "config"
DEFAULT_CONFIG_FILE = CONFIG_DIR / "default.toml"
DEFAULT_GO_RANGE_FILE = CONFIG_DIR / "go_range.csv"

# Big Data Bowl 2019 naming
DEFAULT_TRACKING_COLUMNS = {
    "game_id": "gameId",
    "play_id": "playId",
    "entity_id": "nflId",
    "frame_index": "frameId",
    "timestamp": "time",
    "x": "x",
    "y": "y",
    "speed": "s",
    "direction": "dir",
    "event": "event",
}
REQUIRED_TRACKING_FIELDS = ("game_id", "play_id", "entity_id", "frame_index", "timestamp", "x", "y")

DEFAULT_PLAY_COLUMNS = {
    "game_id": "gameId",
    "play_id": "playId",
    "quarter": "quarter",
    "game_clock": "gameClock",
    "down": "down",
    "yards_to_go": "yardsToGo",
    "possession_team": "possessionTeam",
    "home_team": "homeTeam",
    "away_team": "awayTeam",
    "yardline_number": "yardlineNumber",
    "yardline_side": "yardlineSide",
    "score_home": "scoreHome",
    "score_away": "scoreAway",
    "home_timeouts": "homeTimeouts",
    "away_timeouts": "awayTimeouts",
    "play_type": "playType",
    "yards_gained": "yardsGained",
    "series_id": "seriesId",
    "goal_to_go": "goalToGo",
    # optional; absent in the default files
    "play_direction": "playDirection",
}
OPTIONAL_PLAY_FIELDS = ("play_direction",)

DEFAULT_GAME_COLUMNS = {
    "game_id": "gameId",
    "season": "season",
    "week": "week",
    "home_team": "homeTeam",
    "away_team": "awayTeam",
    "home_final": "homeFinalScore",
    "away_final": "awayFinalScore",
}


@dataclass(frozen=True)
class SchemaConfig:
    tracking: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_TRACKING_COLUMNS))
    plays: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_PLAY_COLUMNS))
    games: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_GAME_COLUMNS))
    ball_sentinel: str = ""
    error_budget: float = 0.001


@dataclass(frozen=True)
class KinematicsConfig:
    smooth_speed: bool = False
    window: int = 3


@dataclass(frozen=True)
class GamConfig:
    n_interior_knots: int = 10
    degree: int = 3
    penalty_order: int = 2
    lambda_grid: List[float] = field(default_factory=lambda: [10 ** (k / 2) for k in range(-8, 9)])
    max_iter: int = 50
    tol: float = 1e-8


@dataclass(frozen=True)
class WinProbConfig:
    features: List[str] = field(default_factory=lambda: [
        "score_differential", "score_time_ratio", "yardline", "down", "distance",
        "timeouts_differential", "possession",
    ])
    time_knots: int = 6
    penalty: float = 1.0


@dataclass(frozen=True)
class PropensityConfig:
    extra_terms: List[str] = field(default_factory=lambda: ["goal_to_go", "late_trailing"])
    ridge: float = 1e-6


@dataclass(frozen=True)
class MatchingConfig:
    caliper_sd: float = 0.2
    seed: int = 1729


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 2000
    level: float = 0.95
    seed: int = 2718


@dataclass(frozen=True)
class AnalysisConfigSection:
    include_overtime: bool = True
    go_range_file: str = ""
    min_pairs: int = 30
    min_group_size: int = 10


@dataclass(frozen=True)
class RuntimeConfig:
    threads: int = 0
    output_dir: str = "./out"
    db_url: str = "sqlite:///./data/core/runs.sqlite"
    audit_dir: str = "./data/core/audit"
    log_level: str = "INFO"


@dataclass(frozen=True)
class AnalysisConfig:
    schema: SchemaConfig = field(default_factory=SchemaConfig)
    kinematics: KinematicsConfig = field(default_factory=KinematicsConfig)
    gam: GamConfig = field(default_factory=GamConfig)
    wp: WinProbConfig = field(default_factory=WinProbConfig)
    propensity: PropensityConfig = field(default_factory=PropensityConfig)
    matching: MatchingConfig = field(default_factory=MatchingConfig)
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    analysis: AnalysisConfigSection = field(default_factory=AnalysisConfigSection)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)

    @property
    def go_range_path(self) -> Path:
        return Path(self.analysis.go_range_file) if self.analysis.go_range_file else DEFAULT_GO_RANGE_FILE

    @property
    def worker_count(self) -> int:
        return self.runtime.threads if self.runtime.threads > 0 else (os.cpu_count() or 1)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


# environment key -> dotted config path
ENV_KEYS = {
    "FOURTHDOWN_THREADS": "runtime.threads",
    "FOURTHDOWN_OUTPUT_DIR": "runtime.output_dir",
    "FOURTHDOWN_DB_URL": "runtime.db_url",
    "FOURTHDOWN_AUDIT_DIR": "runtime.audit_dir",
    "FOURTHDOWN_LOG_LEVEL": "runtime.log_level",
    "FOURTHDOWN_GO_RANGE_FILE": "analysis.go_range_file",
    "FOURTHDOWN_MATCH_SEED": "matching.seed",
    "FOURTHDOWN_BOOTSTRAP_SEED": "bootstrap.seed",
}


def _coerce(section: Any, name: str, value: Any) -> Any:
    current = getattr(section, name)
    try:
        if isinstance(current, bool):
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float):
            return float(value)
        if isinstance(current, dict):
            merged = dict(current)
            merged.update({str(k): str(v) for k, v in dict(value).items()})
            return merged
        if isinstance(current, list):
            return list(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError("BAD_CONFIG_VALUE", f"{name}={value!r}: {exc}") from exc


def _apply(config: AnalysisConfig, updates: Mapping[str, Mapping[str, Any]]) -> AnalysisConfig:
    changes = {}
    for section_name, values in updates.items():
        if not hasattr(config, section_name):
            raise ConfigError("UNKNOWN_CONFIG_SECTION", section_name)
        section = changes.get(section_name, getattr(config, section_name))
        section_changes = {}
        for key, value in values.items():
            if not hasattr(section, key):
                raise ConfigError("UNKNOWN_CONFIG_KEY", f"{section_name}.{key}")
            section_changes[key] = _coerce(section, key, value)
        changes[section_name] = dataclasses.replace(section, **section_changes)
    return dataclasses.replace(config, **changes)


def _nest(dotted: Mapping[str, Any]) -> Dict[str, Dict[str, Any]]:
    nested: Dict[str, Dict[str, Any]] = {}
    for key, value in dotted.items():
        if value is None:
            continue
        parts = key.split(".", 1)
        if len(parts) != 2:
            raise ConfigError("BAD_CONFIG_KEY", f"expected section.key, got {key!r}")
        nested.setdefault(parts[0], {})[parts[1]] = value
    return nested


def _flatten_toml(data: Mapping[str, Any]) -> Dict[str, Dict[str, Any]]:
    # [schema.tracking] style tables arrive nested one level deeper
    out: Dict[str, Dict[str, Any]] = {}
    for section, values in data.items():
        if not isinstance(values, Mapping):
            raise ConfigError("BAD_CONFIG_FILE", f"top-level key {section!r} must be a table")
        out[section] = dict(values)
    return out


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None,
                use_env: bool = True) -> AnalysisConfig:
    config = AnalysisConfig()

    file_path = Path(path) if path else (DEFAULT_CONFIG_FILE if DEFAULT_CONFIG_FILE.exists() else None)
    if file_path is not None:
        if not file_path.exists():
            raise ConfigError("CONFIG_NOT_FOUND", str(file_path))
        try:
            with open(file_path, "rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("BAD_CONFIG_FILE", f"{file_path}: {exc}") from exc
        config = _apply(config, _flatten_toml(data))

    if use_env:
        load_dotenv()
        env_values = {dotted: os.environ[key] for key, dotted in ENV_KEYS.items() if os.environ.get(key)}
        config = _apply(config, _nest(env_values))

    if overrides:
        config = _apply(config, _nest(overrides))

    _check(config)
    return config


def _check(config: AnalysisConfig) -> None:
    if not 0 <= config.schema.error_budget < 1:
        raise ConfigError("BAD_CONFIG_VALUE", "schema.error_budget must be in [0, 1)")
    if config.gam.degree < 0 or config.gam.n_interior_knots < 0 or config.gam.penalty_order < 0:
        raise ConfigError("BAD_CONFIG_VALUE", "gam degree/knots/penalty_order must be nonnegative")
    if not config.gam.lambda_grid or any(lam < 0 for lam in config.gam.lambda_grid):
        raise ConfigError("BAD_CONFIG_VALUE", "gam.lambda_grid must hold nonnegative values")
    if config.matching.caliper_sd < 0:
        raise ConfigError("BAD_CONFIG_VALUE", "matching.caliper_sd must be nonnegative")
    if not 0 < config.bootstrap.level < 1 or config.bootstrap.replicates < 1:
        raise ConfigError("BAD_CONFIG_VALUE", "bootstrap.level in (0, 1), replicates >= 1")
    if config.kinematics.window < 1 or config.kinematics.window % 2 == 0:
        raise ConfigError("BAD_CONFIG_VALUE", "kinematics.window must be a positive odd integer")
