"""Three-stage contextual pricing policy: estimate, warm up, adapt.

Stage 1 (rounds 1..t1, t1 = ceil(T^(2/3))): post uniform random prices on
[0, price_cap] and regress the scaled sale bit on the context to learn the
valuation model. Stage 2 (the next tw = t1 rounds): probe every residual grid
index uniformly at random to seed the per-index sale-rate estimates. Stage 3:
score each index optimistically and play the winner one conservative step
down the grid (redirect), unless its count is still so thin that the
confidence radius exceeds the grid step (direct) or it is already the lowest
index (boundary).

The model estimate is frozen when stage 1 ends; only the per-index sale
rates keep learning afterward. A single policy-owned random stream drives
stage-1 prices and stage-2 index draws, in that order, one draw per round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError, ProtocolError
from .estimator import DesignAccumulator, ThetaHat, accumulate, delta_for, rank_deficient, solve_theta
from .grid import ProbeStats, build_grid, choose_action, conf_radius, probe_price

STAGE_ESTIMATE = "estimate"
STAGE_WARMUP = "warmup"
STAGE_ADAPT = "adapt"


def stage_length(horizon: int) -> int:
    """Exact ceil(horizon^(2/3)): smallest m with m^3 >= horizon^2.

    Integer arithmetic sidesteps float cube-root wobble at perfect powers
    (1000 -> 100, 32000 -> 1008, 10^6 -> 10000).
    """
    target = horizon * horizon
    m = max(1, int(round(horizon ** (2.0 / 3.0))))
    while m**3 < target:
        m += 1
    while m > 1 and (m - 1) ** 3 >= target:
        m -= 1
    return m


@dataclass(frozen=True)
class CmrupConfig:
    """Policy knobs; defaults match the benchmark experiments."""

    horizon: int
    price_cap: float = 4.0
    support_radius: float = 1.0
    delta_mult: float = 0.35
    c_ucb: float = 0.5
    eig_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.horizon < 8:
            raise InvalidSpecError(f"horizon must be >= 8, got {self.horizon}")
        if self.price_cap <= 0 or self.support_radius <= 0:
            raise InvalidSpecError("price cap and support radius must be positive")
        if self.delta_mult <= 0 or self.c_ucb <= 0:
            raise InvalidSpecError("delta_mult and c_ucb must be positive")


class CmrupPolicy:
    """act/observe state machine over the three stages.

    act(x) returns a price; observe(o) feeds back the sale bit for the price
    just posted. Calling either out of turn raises ProtocolError. Diagnostic
    state (theta_hat, delta, grid, stats, direct_counts, clipped_probes) is
    exposed read-only for logging and tests.
    """

    def __init__(self, config: CmrupConfig, d: int, rng: np.random.Generator):
        if d < 1:
            raise InvalidSpecError(f"context dimension must be >= 1, got {d}")
        self.config = config
        self.d = d
        self.rng = rng
        self.t1 = stage_length(config.horizon)
        self.tw = self.t1
        self.rounds_played = 0
        self.theta_hat: ThetaHat | None = None
        self.grid = None
        self.stats: ProbeStats | None = None
        self.clipped_probes = 0
        self.direct_counts: np.ndarray | None = None
        self._acc = DesignAccumulator(d, config.price_cap)
        self._ln_horizon = math.log(config.horizon)
        self._pending: tuple | None = None
        # incremental stage-3 caches, rebuilt entry-wise as counts move
        self._bonus: np.ndarray | None = None
        self._cap: np.ndarray | None = None
        self._score_base: np.ndarray | None = None
        self._probe_base: np.ndarray | None = None

    @property
    def stage(self) -> str:
        done = self.rounds_played
        if done < self.t1:
            return STAGE_ESTIMATE
        if done < self.t1 + self.tw:
            return STAGE_WARMUP
        return STAGE_ADAPT

    def act(self, x: np.ndarray) -> float:
        if self._pending is not None:
            raise ProtocolError("act called twice without an observe in between")
        stage = self.stage
        if stage == STAGE_ESTIMATE:
            price = float(self.rng.uniform(0.0, self.config.price_cap))
            self._pending = (STAGE_ESTIMATE, np.array(x, dtype=float), price)
            return price
        u_hat = float(np.dot(x, self.theta_hat.theta))
        if stage == STAGE_WARMUP:
            j = int(self.rng.integers(self.grid.m))
            price, clipped = probe_price(u_hat, j, self.grid, self.config.price_cap)
            self.clipped_probes += clipped
            self._pending = (STAGE_WARMUP, j, price)
            return price
        scores = (u_hat + self._score_base) * self._cap
        winner, played, mode = choose_action(scores, self._bonus, self.grid.delta)
        if mode == "direct":
            self.direct_counts[played] += 1
        raw = u_hat + self._probe_base[played]
        price = min(max(raw, 0.0), self.config.price_cap)
        self.clipped_probes += price != raw
        self._pending = (STAGE_ADAPT, played, price)
        return price

    def observe(self, o: int) -> None:
        if self._pending is None:
            raise ProtocolError("observe called with no price outstanding")
        stage, payload, _price = self._pending
        self._pending = None
        self.rounds_played += 1
        if stage == STAGE_ESTIMATE:
            accumulate(self._acc, payload, o)
            if self.rounds_played == self.t1:
                self._finish_stage_one()
            return
        self.stats.update(payload, o)
        self._refresh_index(payload)

    def _finish_stage_one(self) -> None:
        cfg = self.config
        theta = solve_theta(self._acc, cfg.eig_tol)
        delta = delta_for(cfg.horizon, self.t1, self.d, cfg.delta_mult)
        if delta > cfg.support_radius:
            raise InvalidSpecError(
                f"grid step {delta:.4f} exceeds the noise support radius "
                f"{cfg.support_radius}; the horizon {cfg.horizon} is too short "
                f"for delta_mult={cfg.delta_mult}"
            )
        self.theta_hat = ThetaHat(theta, self.t1, delta, rank_deficient(self._acc, cfg.eig_tol))
        self.grid = build_grid(cfg.support_radius, delta)
        self.stats = ProbeStats(self.grid.m)
        self.direct_counts = np.zeros(self.grid.m, dtype=np.int64)
        pts = self.grid.points
        self._score_base = pts[1:] + delta
        self._probe_base = pts[1:] - 3.0 * delta
        self._bonus = np.full(self.grid.m, conf_radius(0, cfg.horizon, cfg.c_ucb))
        self._cap = np.minimum(1.0, self._bonus.copy())

    def _refresh_index(self, j: int) -> None:
        # keep per-index bonus and capped demand factor current without
        # recomputing the full vectors every round
        self._bonus[j] = conf_radius(int(self.stats.n[j]), self.config.horizon, self.config.c_ucb)
        m_hat_j = self.stats.wins[j] / self.stats.n[j]
        self._cap[j] = min(1.0, m_hat_j + self._bonus[j])

    def scores_for(self, u_hat: float) -> np.ndarray:
        """Current stage-3 score vector for a hypothetical estimate u_hat."""
        if self.grid is None:
            raise ProtocolError("scores are undefined before stage 1 completes")
        return (u_hat + self._score_base) * self._cap
