"""Randomized-grid rounding of raw risk estimates.

The head interval [0, alpha0] maps to alpha0/2; anything above maps to
alpha/2 + alpha*k with k = round((raw - alpha0)/alpha), half away from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .planner import RoundingGrid


@dataclass(frozen=True)
class RoundedEstimate:
    value: float
    interval_index: int
    raw: float


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def round_estimate(raw: float, grid: RoundingGrid) -> RoundedEstimate:
    raw = float(raw)
    if not math.isfinite(raw) or raw < 0:
        raise ValueError(f"raw estimate must be finite and non-negative, got {raw}")
    if raw <= grid.alpha0:
        return RoundedEstimate(grid.alpha0 / 2, -1, raw)
    k = _round_half_away((raw - grid.alpha0) / grid.alpha)
    return RoundedEstimate(grid.alpha / 2 + grid.alpha * k, k, raw)


def rounding_offset_bound(grid: RoundingGrid) -> float:
    """Nominal offset alpha/2 (exact when alpha0 = alpha/2; at most alpha in general)."""
    return grid.alpha / 2
