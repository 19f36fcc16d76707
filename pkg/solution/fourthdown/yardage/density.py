# fourthdown/yardage/density.py
"""Kernel density curves of precise distance, split by bucket and decision."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import gaussian_kde, norm

from ..core.errors import DataError

logger = logging.getLogger(__name__)

MIN_GROUP_SIZE = 10
GRID_POINTS = 1024
# bandwidth used when a group has no spread
DEGENERATE_BANDWIDTH = 0.01

GroupKey = Tuple[int, bool]


@dataclass
class DensityCurves:
    grid: np.ndarray
    densities: Dict[GroupKey, np.ndarray] = field(default_factory=dict)
    medians: Dict[GroupKey, float] = field(default_factory=dict)
    bandwidths: Dict[GroupKey, float] = field(default_factory=dict)
    counts: Dict[GroupKey, int] = field(default_factory=dict)

    def integral(self, key: GroupKey) -> float:
        return float(trapezoid(self.densities[key], self.grid))

    def median_gap(self, bucket: int = 1) -> Optional[float]:
        """No-go median minus go median for one bucket."""
        go, kick = self.medians.get((bucket, True)), self.medians.get((bucket, False))
        if go is None or kick is None:
            return None
        return kick - go

    def to_rows(self):
        for (bucket, went), dens in sorted(self.densities.items()):
            for x, d in zip(self.grid, dens):
                yield {"bucket": bucket, "went_for_it": went, "distance": float(x), "density": float(d)}


def _bandwidth(values: np.ndarray) -> Optional[gaussian_kde]:
    if np.ptp(values) == 0:
        return None
    return gaussian_kde(values, bw_method="silverman")


def distance_density(groups: Mapping[GroupKey, Sequence[float]], grid: Optional[np.ndarray] = None,
                     min_group_size: int = MIN_GROUP_SIZE) -> DensityCurves:
    """
    Gaussian KDE (Silverman bandwidth) per (bucket, went_for_it) group on
    one common grid, with group medians.
    """
    arrays = {k: np.asarray(v, dtype=float) for k, v in groups.items()}
    small = {f"{k[0]}/{'go' if k[1] else 'kick'}": len(v) for k, v in arrays.items() if len(v) < min_group_size}
    if small:
        raise DataError("GROUP_TOO_SMALL", f"groups below {min_group_size} observations: {small}", {"groups": small})
    if not arrays:
        raise DataError("GROUP_TOO_SMALL", "no groups to estimate")

    kdes = {k: _bandwidth(v) for k, v in arrays.items()}
    bws = {}
    for k, v in arrays.items():
        kde = kdes[k]
        bws[k] = DEGENERATE_BANDWIDTH if kde is None else float(np.sqrt(kde.covariance[0, 0]))

    if grid is None:
        pad = 4.0 * max(bws.values())
        lo = min(v.min() for v in arrays.values()) - pad
        hi = max(v.max() for v in arrays.values()) + pad
        grid = np.linspace(lo, hi, GRID_POINTS)

    curves = DensityCurves(grid=np.asarray(grid, dtype=float))
    for k, v in arrays.items():
        kde = kdes[k]
        if kde is None:
            curves.densities[k] = norm.pdf(curves.grid, loc=v[0], scale=DEGENERATE_BANDWIDTH)
        else:
            curves.densities[k] = kde(curves.grid)
        curves.medians[k] = float(np.median(v))
        curves.bandwidths[k] = bws[k]
        curves.counts[k] = len(v)
        logger.debug("density %s: n=%d median=%.3f bw=%.4f", k, len(v), curves.medians[k], bws[k])
    return curves
