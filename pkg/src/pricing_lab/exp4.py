"""Exponential-weights pricing baseline over a sampled expert ensemble.

Each expert pairs a candidate valuation vector with a tabulated monotone
survival guess and recommends, per context, the fixed-grid price maximizing
its predicted revenue (ties to the lowest price). A single adversarial
exponential-weights learner mixes the recommendations with explicit uniform
exploration and updates from inverse-propensity reward estimates, so it never
exploits smoothness or continuity of the true demand curve.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cmrup import stage_length
from .errors import InvalidSpecError, ProtocolError
from .estimator import delta_for
from .grid import build_grid


@dataclass(frozen=True)
class HyperParams:
    """Grid spacing, action count, learning rate, exploration floor."""

    gamma: float
    k_act: int
    eta: float
    explore: float


def hyperparams(horizon: int, k_policy: int) -> HyperParams:
    """Horizon-indexed defaults.

    gamma = T^(-1/4) clipped to [0.02, 0.10]; k_act = floor(1/gamma) + 1;
    eta = min(0.5, sqrt(ln(K) / (T * k_act)));
    explore = min(0.2, sqrt(k_act * ln(K) / T)).
    """
    if horizon < 1 or k_policy < 1:
        raise InvalidSpecError(f"bad hyperparameter inputs: T={horizon} K={k_policy}")
    gamma = min(0.10, max(0.02, horizon**-0.25))
    k_act = int(math.floor(1.0 / gamma + 1e-12)) + 1
    log_k = math.log(k_policy)
    eta = min(0.5, math.sqrt(log_k / (horizon * k_act)))
    explore = min(0.2, math.sqrt(k_act * log_k / horizon))
    return HyperParams(gamma, k_act, eta, explore)


@dataclass(frozen=True)
class Ensemble:
    """Sampled experts: row e pairs theta[e] with the tabulated curve values[e].

    values has a leading 1.0 per row so that residuals left of the first
    tabulation point predict a sure sale; searchsorted picks the step.
    """

    theta: np.ndarray
    tab_points: np.ndarray
    values: np.ndarray


def _structured_curves(pts: np.ndarray, c: float) -> list[np.ndarray]:
    """Uniform-like, step-like, and cliff-like survival guesses."""
    out = [np.clip((c - pts) / (2.0 * c), 0.0, 1.0)]
    n = len(pts)
    for tau in (pts[n // 4], pts[n // 2], pts[(3 * n) // 4]):
        out.append((pts <= tau).astype(float))
    base = np.clip((c - pts) / (2.0 * c), 0.0, 1.0)
    for h in (0.2, 0.3, 0.5):
        out.append((1.0 - h) * base + h * (pts <= 0.0))
    return out


def sample_ensemble(
    d: int,
    rng: np.random.Generator,
    k_theta: int = 256,
    k_f: int = 64,
    k_policy: int = 2048,
    intercept_range: tuple[float, float] = (1.0, 3.0),
    slope_range: tuple[float, float] = (0.0, 0.3),
    tab_points: np.ndarray | None = None,
    c: float = 1.0,
) -> Ensemble:
    """Draw the expert ensemble.

    Valuation candidates are box-uniform with the box corners and center
    overwriting the first rows as structured anchors (never the truth).
    Survival candidates mix the structured shapes with random monotone
    curves; the k_policy experts are a uniform without-replacement sample
    of the k_theta x k_f cross product. Draw order: theta columns, then
    random curves, then the pair subsample.
    """
    if k_policy > k_theta * k_f:
        raise InvalidSpecError(f"k_policy={k_policy} exceeds {k_theta}x{k_f} pairs")
    if tab_points is None:
        tab_points = build_grid(c, delta_for(8000, stage_length(8000), d)).points
    thetas = np.empty((k_theta, d))
    thetas[:, 0] = rng.uniform(*intercept_range, k_theta)
    thetas[:, 1:] = rng.uniform(*slope_range, (k_theta, d - 1))
    anchors: list[np.ndarray] = []
    if 2**d <= 64:
        for combo in itertools.product(*[intercept_range] + [slope_range] * (d - 1)):
            anchors.append(np.array(combo))
    else:
        anchors.append(np.array([intercept_range[0]] + [slope_range[0]] * (d - 1)))
        anchors.append(np.array([intercept_range[1]] + [slope_range[1]] * (d - 1)))
    center = [np.mean(intercept_range)] + [np.mean(slope_range)] * (d - 1)
    anchors.append(np.array(center))
    n_anchor = min(len(anchors), k_theta)
    thetas[:n_anchor] = anchors[:n_anchor]

    curves = _structured_curves(tab_points, c)[: k_f]
    n_pts = len(tab_points)
    while len(curves) < k_f:
        drops = rng.random(n_pts + 1)
        drops /= drops.sum()
        curves.append(1.0 - np.cumsum(drops)[:n_pts])
    curve_mat = np.stack(curves)

    pair_idx = rng.choice(k_theta * k_f, size=k_policy, replace=False)
    ti, ci = pair_idx // k_f, pair_idx % k_f
    values = np.hstack([np.ones((k_policy, 1)), curve_mat[ci]])
    return Ensemble(theta=thetas[ti], tab_points=np.asarray(tab_points, float), values=values)


def importance_weighted_reward(price: float, o: int, price_cap: float, prob: float) -> float:
    """Unbiased reward estimate: normalized realized revenue over play probability."""
    return (price * o / price_cap) / prob


def mix_distribution(mass: np.ndarray, explore: float) -> np.ndarray:
    """Exploration-smoothed action distribution over the price grid."""
    k = len(mass)
    q = (1.0 - explore) * mass + explore / k
    return q / q.sum()


class D2Exp4Policy:
    """act/observe wrapper around the ensemble learner.

    Diagnostics after each act: last_action, last_prob, last_rec (per-expert
    recommended action indices), last_distribution.
    """

    def __init__(
        self,
        d: int,
        horizon: int,
        rng: np.random.Generator,
        price_cap: float = 4.0,
        support_radius: float = 1.0,
        k_theta: int = 256,
        k_f: int = 64,
        k_policy: int = 2048,
        ensemble: Ensemble | None = None,
    ):
        self.d = d
        self.horizon = horizon
        self.rng = rng
        self.price_cap = float(price_cap)
        self.hyper = hyperparams(horizon, k_policy if ensemble is None else len(ensemble.theta))
        self.prices = np.arange(self.hyper.k_act) * self.hyper.gamma * self.price_cap
        if ensemble is None:
            ensemble = sample_ensemble(
                d, rng, k_theta=k_theta, k_f=k_f, k_policy=k_policy, c=support_radius
            )
        self.ensemble = ensemble
        k = len(ensemble.theta)
        self.log_weights = np.full(k, -math.log(k))
        self._row = np.arange(k)[:, None]
        self.last_action: int | None = None
        self.last_prob: float | None = None
        self.last_rec: np.ndarray | None = None
        self.last_distribution: np.ndarray | None = None
        self._pending = False

    @property
    def weights(self) -> np.ndarray:
        w = np.exp(self.log_weights)
        return w / w.sum()

    def recommendations(self, x: np.ndarray) -> np.ndarray:
        """Per-expert argmax price index for context x (ties to lowest price)."""
        u = self.ensemble.theta @ x
        resid = self.prices[None, :] - u[:, None]
        idx = np.searchsorted(self.ensemble.tab_points, resid.ravel(), side="right")
        svals = self.ensemble.values[self._row, idx.reshape(resid.shape)]
        return np.argmax(self.prices * svals, axis=1)

    def act(self, x: np.ndarray) -> float:
        if self._pending:
            raise ProtocolError("act called twice without an observe in between")
        rec = self.recommendations(x)
        mass = np.bincount(rec, weights=self.weights, minlength=self.hyper.k_act)
        q = mix_distribution(mass, self.hyper.explore)
        a = int(self.rng.choice(self.hyper.k_act, p=q))
        self.last_action = a
        self.last_prob = float(q[a])
        self.last_rec = rec
        self.last_distribution = q
        self._pending = True
        return float(self.prices[a])

    def observe(self, o: int) -> None:
        if not self._pending:
            raise ProtocolError("observe called with no price outstanding")
        self._pending = False
        r_hat = importance_weighted_reward(
            float(self.prices[self.last_action]), o, self.price_cap, self.last_prob
        )
        if r_hat != 0.0:
            self.log_weights[self.last_rec == self.last_action] += self.hyper.eta * r_hat
        # renormalize in log space so weights stay a probability vector
        peak = self.log_weights.max()
        self.log_weights -= peak + math.log(np.exp(self.log_weights - peak).sum())
