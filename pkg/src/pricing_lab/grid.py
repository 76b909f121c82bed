"""Residual price grid, conservative probes, and optimistic index scores.

The grid discretizes the noise support [-c, c] into points w_i = -c + 2i*delta
for i = 0..M with M = ceil(c / delta). Only indices 0..M-1 are ever queried.
Playing index j means posting u_hat + w_{j+1} - 3*delta: one full grid step
below the optimistic target, so that even with u_hat off by delta the realized
residual stays inside [w_{j-1}, w_j] and the observed sale rate is sandwiched
between S(w_j) and S(w_{j-1}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpecError


@dataclass(frozen=True)
class ResidualGrid:
    """Uniform residual grid over the noise support."""

    c: float
    delta: float
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.delta <= 0 or self.delta > self.c:
            raise InvalidSpecError(f"grid step {self.delta} outside (0, c={self.c}]")
        m = math.ceil(self.c / self.delta - 1e-12)
        pts = -self.c + 2.0 * self.delta * np.arange(m + 1)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        """Number of queryable indices (points minus one)."""
        return len(self.points) - 1


def build_grid(c: float, delta: float) -> ResidualGrid:
    """Grid with M = ceil(c / delta) queryable indices; w_M >= c by construction."""
    return ResidualGrid(c, delta)


def probe_price(u_hat: float, j: int, grid: ResidualGrid, price_cap: float) -> tuple[float, bool]:
    """Conservative price for index j, clipped to [0, price_cap].

    Returns (price, clipped). Clipping never fires when the buffer condition
    holds; the flag is kept for diagnostics on hand-built instances.
    """
    raw = u_hat + grid.points[j + 1] - 3.0 * grid.delta
    price = min(max(raw, 0.0), price_cap)
    return price, price != raw


def conf_radius(n: int, horizon: int, c_ucb: float) -> float:
    """Count-based confidence radius c_ucb * sqrt(ln(horizon) / max(1, n))."""
    return c_ucb * math.sqrt(math.log(horizon) / max(1, n))


def ucb_score(u_hat: float, j: int, grid: ResidualGrid, m_hat: float, bonus: float) -> float:
    """Optimistic revenue proxy: (u_hat + w_{j+1} + delta) * min(1, m_hat + bonus)."""
    return (u_hat + grid.points[j + 1] + grid.delta) * min(1.0, m_hat + bonus)


def choose_action(scores: np.ndarray, radii: np.ndarray, delta: float) -> tuple[int, int, str]:
    """Pick the score argmax and decide how to play it.

    Returns (winner, played_index, mode). Exact score ties resolve to the
    lowest index. Thin counts (radius above delta) are played directly so the
    estimate firms up; otherwise the winner is redirected one step down, or
    played in place when it is already the boundary index 0.
    """
    j = int(np.argmax(scores))
    if radii[j] > delta:
        return j, j, "direct"
    if j == 0:
        return j, 0, "boundary"
    return j, j - 1, "redirect"


@dataclass
class ProbeStats:
    """Per-index play counts and sale totals."""

    m: int
    n: np.ndarray = field(init=False)
    wins: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.n = np.zeros(self.m, dtype=np.int64)
        self.wins = np.zeros(self.m)

    def update(self, j: int, o: int) -> None:
        self.n[j] += 1
        self.wins[j] += o

    def m_hat(self) -> np.ndarray:
        """Empirical sale rates; untouched indices report 0."""
        return self.wins / np.maximum(self.n, 1)

    def radii(self, horizon: int, c_ucb: float) -> np.ndarray:
        return c_ucb * np.sqrt(math.log(horizon) / np.maximum(self.n, 1))

    def snapshot(self) -> dict:
        """Read-only view for logging."""
        return {
            "n": self.n.tolist(),
            "m_hat": self.m_hat().tolist(),
        }
