# fourthdown/decisions/go_range.py
"""Go-for-it range: the field positions and distances where going is a live option."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import pandas as pd

from ..core.errors import ConfigError

logger = logging.getLogger(__name__)

GO_RANGE_COLUMNS = ["yardline_low", "yardline_high", "max_distance_go"]


@dataclass(frozen=True)
class GoRange:
    rows: Tuple[Tuple[int, int, int], ...]

    def max_distance(self, yardline: float) -> int:
        yl = int(round(yardline))
        for low, high, max_go in self.rows:
            if low <= yl <= high:
                return max_go
        return 0

    def eligible(self, yardline: float, bucket: int) -> bool:
        return bucket <= self.max_distance(yardline)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.rows), columns=GO_RANGE_COLUMNS)


def load_go_range(path: Union[str, Path]) -> GoRange:
    try:
        table = pd.read_csv(path)
    except (FileNotFoundError, pd.errors.EmptyDataError) as exc:
        raise ConfigError("BAD_GO_RANGE", f"cannot read go range table {path}: {exc}") from exc
    missing = [c for c in GO_RANGE_COLUMNS if c not in table.columns]
    if missing:
        raise ConfigError("BAD_GO_RANGE", f"go range table lacks {missing}")
    rows: List[Tuple[int, int, int]] = []
    for r in table[GO_RANGE_COLUMNS].itertuples(index=False):
        low, high, max_go = int(r.yardline_low), int(r.yardline_high), int(r.max_distance_go)
        if not 1 <= low <= high <= 99 or max_go < 0:
            raise ConfigError("BAD_GO_RANGE", f"bad row {low}-{high}: {max_go}")
        rows.append((low, high, max_go))
    rows.sort()
    for (_, h1, _), (l2, _, _) in zip(rows, rows[1:]):
        if l2 <= h1:
            raise ConfigError("BAD_GO_RANGE", f"overlapping yardline ranges at {l2}")
    logger.debug("loaded %d go range rows from %s", len(rows), path)
    return GoRange(tuple(rows))
