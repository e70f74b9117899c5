"""Uniform cell partition of the truncated size domain.

Cell ``i`` (1-based) covers the half-open interval
``[(i - 1/2) * eps, (i + 1/2) * eps)`` so that its center sits at ``i * eps``.
The region ``[0, eps/2)`` below the first cell carries no unknowns; sizes at or
beyond ``(m + 1/2) * eps`` fall outside the truncated domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Immutable uniform grid with cell width ``epsilon`` on ``[0, x_max]``."""

    epsilon: float
    x_max: float
    m: int

    @property
    def lower(self) -> float:
        """Left edge of the first cell."""
        return 0.5 * self.epsilon

    @property
    def upper(self) -> float:
        """Right edge of the last cell."""
        return (self.m + 0.5) * self.epsilon

    def centers(self) -> np.ndarray:
        """Cell centers ``eps * i`` for ``i = 1..m``."""
        return self.epsilon * np.arange(1, self.m + 1, dtype=float)

    def left_edges(self) -> np.ndarray:
        return self.epsilon * (np.arange(1, self.m + 1, dtype=float) - 0.5)

    def right_edges(self) -> np.ndarray:
        return self.epsilon * (np.arange(1, self.m + 1, dtype=float) + 0.5)


def build_grid(epsilon: float, x_max: float = 10.0) -> Grid:
    """Build the cell partition with ``m = floor(x_max/epsilon - 1/2)`` cells.

    Raises ``ValueError`` if ``epsilon`` is outside ``(0, 1)`` or the domain is
    too short to hold three cells.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if x_max < 3.0 * epsilon:
        raise ValueError(f"x_max={x_max} too small for 3 cells of width {epsilon}")
    # Nudge guards against ratios like 10/0.005 landing just below an integer.
    m = int(math.floor(x_max / epsilon - 0.5 + 1e-9))
    if m < 3:
        raise ValueError(f"grid would have only {m} cells; need at least 3")
    return Grid(epsilon=epsilon, x_max=x_max, m=m)


def cell_of(grid: Grid, x: float) -> int | None:
    """Return the 1-based index of the cell containing ``x``, or ``None``.

    ``None`` covers both the dust region ``[0, eps/2)`` and sizes beyond the
    truncated domain.  Negative ``x`` is a domain error.
    """
    if x < 0.0:
        raise ValueError(f"negative size x={x}")
    if x < grid.lower or x >= grid.upper:
        return None
    i = int(math.floor(x / grid.epsilon + 0.5))
    # Guard against roundoff at the right edge of the last cell.
    return min(max(i, 1), grid.m)


def r_eps(grid: Grid, x: float) -> float:
    """Right endpoint of the cell containing ``x``.

    Computed as ``floor(x/eps + 1/2) * eps + eps/2``; the same formula extends
    past the truncated grid.  Satisfies ``|r_eps(x) - x| <= eps`` for ``x >= 0``.
    """
    if x < 0.0:
        raise ValueError(f"negative size x={x}")
    eps = grid.epsilon
    return math.floor(x / eps + 0.5) * eps + 0.5 * eps
