"""First-stage valuation estimator from binary sale feedback.

With prices drawn uniformly on [0, price_cap], the scaled sale bit
z = price_cap * o satisfies E[z | x] = <x, theta*> whenever valuations stay
inside [0, price_cap], so ordinary least squares of z on x recovers theta*
without ever observing a valuation. The design may be rank-deficient early
on; the solve uses an eigenvalue-truncated pseudoinverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpecError

EIG_TOL = 1e-10


@dataclass
class DesignAccumulator:
    """Running second moments of the stage-1 regression.

    gram accumulates x x^T, moment accumulates z x with z = price_cap * o.
    Accumulation is order-independent, so batched and sequential feeds agree.
    """

    d: int
    price_cap: float
    gram: np.ndarray = field(init=False)
    moment: np.ndarray = field(init=False)
    count: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        self.gram = np.zeros((self.d, self.d))
        self.moment = np.zeros(self.d)


def accumulate(acc: DesignAccumulator, x: np.ndarray, o: int) -> None:
    """Fold one (context, sale bit) observation into the design."""
    acc.gram += np.outer(x, x)
    acc.moment += (acc.price_cap * o) * x
    acc.count += 1


def accumulate_batch(acc: DesignAccumulator, xs: np.ndarray, os: np.ndarray) -> None:
    """Vectorized accumulate; same result as row-by-row calls."""
    acc.gram += xs.T @ xs
    acc.moment += xs.T @ (acc.price_cap * np.asarray(os, dtype=float))
    acc.count += len(xs)


def solve_theta(acc: DesignAccumulator, eig_tol: float = EIG_TOL) -> np.ndarray:
    """Truncated-pseudoinverse least squares: gram^+ @ moment.

    Eigenvalues below eig_tol relative to the largest are treated as zero,
    which zeroes the coefficient along never-observed directions instead of
    blowing up. Never raises on rank deficiency; see rank_deficient().
    """
    return np.linalg.pinv(acc.gram, rcond=eig_tol, hermitian=True) @ acc.moment


def rank_deficient(acc: DesignAccumulator, eig_tol: float = EIG_TOL) -> bool:
    """Diagnostic flag: did the truncated solve drop any direction?"""
    eigs = np.linalg.eigvalsh(acc.gram)
    top = eigs[-1]
    if top <= 0:
        return True
    return bool(np.sum(eigs > eig_tol * top) < acc.d)


def delta_for(horizon: int, t1: int, d: int, delta_mult: float = 0.35) -> float:
    """Residual-grid half-step: delta_mult * sqrt(d * ln(horizon) / t1).

    Natural log. Shrinks like t1^(-1/2) for fixed horizon, which is what
    makes the stage-1 estimate land inside one grid step of the truth.
    """
    if horizon < 2:
        raise InvalidSpecError(f"horizon must be >= 2 for a positive grid step, got {horizon}")
    if t1 < 1 or d < 1 or delta_mult <= 0:
        raise InvalidSpecError(f"bad grid-step inputs: t1={t1} d={d} delta_mult={delta_mult}")
    return delta_mult * math.sqrt(d * math.log(horizon) / t1)


@dataclass(frozen=True)
class ThetaHat:
    """Frozen stage-1 output: point estimate plus the grid scale it implies."""

    theta: np.ndarray
    t1: int
    delta: float
    rank_deficient: bool
