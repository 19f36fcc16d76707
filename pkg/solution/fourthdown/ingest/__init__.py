# fourthdown/ingest/__init__.py
from .assemble import AssemblyResult, GameDataset, assemble_games
from .loader import load_dataset
from .parsers import GameMeta, ParseReport, RowError, parse_games, parse_plays, parse_tracking
from .writers import write_games, write_plays, write_tracking

__all__ = [
    "AssemblyResult", "GameDataset", "GameMeta", "ParseReport", "RowError",
    "assemble_games", "load_dataset", "parse_games", "parse_plays", "parse_tracking",
    "write_games", "write_plays", "write_tracking",
]
