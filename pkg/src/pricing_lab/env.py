"""Market simulator: demand-noise mixtures, survival curves, pricing instances.

Each round a buyer arrives with feature vector x (coordinate 0 is a fixed
intercept) and valuation y = <x, theta*> + xi. The seller posts a price p and
observes only the sale bit o = 1{p <= y}; a buyer indifferent at the posted
price buys. The noise xi is a finite mixture of point masses and uniform
segments supported on [-c, c] with zero mean. Nothing here assumes a density,
so demand curves may jump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError

WEIGHT_TOL = 1e-12
MEAN_TOL = 1e-12


@dataclass(frozen=True)
class Atom:
    """Point mass: P(xi = loc) = weight."""

    loc: float
    weight: float


@dataclass(frozen=True)
class Segment:
    """Uniform-density piece: weight spread evenly over (lo, hi)."""

    lo: float
    hi: float
    weight: float


@dataclass(frozen=True)
class NoiseSpec:
    """Finite mixture of atoms and uniform segments.

    Weights must lie in (0, 1] and sum to 1 within 1e-12; segments need
    lo < hi. Support and mean constraints are checked where a support
    radius is available (make_survival, PricingInstance).
    """

    components: tuple[Atom | Segment, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise InvalidSpecError("noise mixture needs at least one component")
        total = 0.0
        for comp in self.components:
            if not 0.0 < comp.weight <= 1.0:
                raise InvalidSpecError(f"component weight {comp.weight} outside (0, 1]")
            if isinstance(comp, Segment) and not comp.lo < comp.hi:
                raise InvalidSpecError(f"segment needs lo < hi, got [{comp.lo}, {comp.hi}]")
            total += comp.weight
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidSpecError(f"mixture weights sum to {total!r}, expected 1")

    def mean(self) -> float:
        out = 0.0
        for comp in self.components:
            if isinstance(comp, Atom):
                out += comp.weight * comp.loc
            else:
                out += comp.weight * 0.5 * (comp.lo + comp.hi)
        return out

    def support_radius(self) -> float:
        """Smallest c with all atoms and segment endpoints inside [-c, c]."""
        r = 0.0
        for comp in self.components:
            if isinstance(comp, Atom):
                r = max(r, abs(comp.loc))
            else:
                r = max(r, abs(comp.lo), abs(comp.hi))
        return r

    def sample(self, rng: np.random.Generator) -> float:
        """One draw. Consumes one component pick plus one uniform for segments."""
        weights = [c.weight for c in self.components]
        k = int(rng.choice(len(self.components), p=weights))
        comp = self.components[k]
        if isinstance(comp, Atom):
            return comp.loc
        return float(rng.uniform(comp.lo, comp.hi))

    def sample_block(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Vectorized draws with a documented order: component picks for the
        whole block first, then uniform fills per segment in component order."""
        weights = np.array([c.weight for c in self.components])
        ks = rng.choice(len(self.components), size=n, p=weights)
        out = np.empty(n)
        for idx, comp in enumerate(self.components):
            mask = ks == idx
            if isinstance(comp, Atom):
                out[mask] = comp.loc
            else:
                out[mask] = rng.uniform(comp.lo, comp.hi, int(mask.sum()))
        return out

    def to_dict(self) -> dict:
        items = []
        for comp in self.components:
            if isinstance(comp, Atom):
                items.append({"kind": "atom", "loc": comp.loc, "weight": comp.weight})
            else:
                items.append({"kind": "segment", "lo": comp.lo, "hi": comp.hi, "weight": comp.weight})
        return {"components": items}

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseSpec":
        unknown = set(data) - {"components"}
        if unknown:
            raise InvalidSpecError(f"unknown noise keys: {sorted(unknown)}")
        comps: list[Atom | Segment] = []
        for item in data.get("components", []):
            kind = item.get("kind")
            if kind == "atom":
                extra = set(item) - {"kind", "loc", "weight"}
                if extra:
                    raise InvalidSpecError(f"unknown atom keys: {sorted(extra)}")
                comps.append(Atom(float(item["loc"]), float(item["weight"])))
            elif kind == "segment":
                extra = set(item) - {"kind", "lo", "hi", "weight"}
                if extra:
                    raise InvalidSpecError(f"unknown segment keys: {sorted(extra)}")
                comps.append(Segment(float(item["lo"]), float(item["hi"]), float(item["weight"])))
            else:
                raise InvalidSpecError(f"unknown noise component kind: {kind!r}")
        return cls(tuple(comps))


def uniform_noise(c: float = 1.0) -> NoiseSpec:
    """Single uniform segment on [-c, c]."""
    return NoiseSpec((Segment(-c, c, 1.0),))


def cliff_noise(c: float = 1.0, jump: float = 0.3) -> NoiseSpec:
    """Atom of mass `jump` at zero plus a uniform remainder on [-c, c].

    The demand curve S drops by `jump` just past w = 0, so revenue is
    discontinuous in price there.
    """
    return NoiseSpec((Atom(0.0, jump), Segment(-c, c, 1.0 - jump)))


class SurvivalCurve:
    """Exact S(w) = P(xi >= w) for an atom/segment mixture on [-c, c].

    S is non-increasing and left-continuous: an atom at a contributes its
    full mass to S(a) and drops out just above a, matching the inclusive
    sale rule o = 1{p <= y}. Between consecutive breakpoints S is affine
    in w; S(w) = 1 for w <= -c and S(w) = 0 for w > c.
    """

    def __init__(self, noise: NoiseSpec, c: float):
        if c <= 0:
            raise InvalidSpecError(f"support radius must be positive, got {c}")
        if noise.support_radius() > c:
            raise InvalidSpecError(
                f"noise support radius {noise.support_radius()} exceeds c={c}"
            )
        self.noise = noise
        self.c = float(c)
        self._atoms = [(comp.loc, comp.weight) for comp in noise.components if isinstance(comp, Atom)]
        self._segs = [
            (comp.lo, comp.hi, comp.weight, 1.0 / (comp.hi - comp.lo))
            for comp in noise.components
            if isinstance(comp, Segment)
        ]
        pts = {-self.c, self.c}
        pts.update(loc for loc, _ in self._atoms)
        for lo, hi, _, _ in self._segs:
            pts.add(lo)
            pts.add(hi)
        self.breakpoints: tuple[float, ...] = tuple(sorted(pts))

    def value(self, w: float) -> float:
        """S at a single point, straight from the mixture definition."""
        s = 0.0
        for loc, wt in self._atoms:
            if loc >= w:
                s += wt
        for lo, hi, wt, inv in self._segs:
            if w <= lo:
                s += wt
            elif w <= hi:
                s += wt * (hi - w) * inv
        return s

    __call__ = value

    def values(self, w: np.ndarray) -> np.ndarray:
        """Vectorized S over an array of residuals."""
        w = np.asarray(w, dtype=float)
        s = np.zeros_like(w)
        for loc, wt in self._atoms:
            s += wt * (loc >= w)
        for lo, hi, wt, inv in self._segs:
            s += wt * np.clip((hi - w) * inv, 0.0, 1.0)
        return s

    def jump_at(self, w: float) -> float:
        """Atom mass sitting exactly at w (size of the demand jump there)."""
        return sum(wt for loc, wt in self._atoms if loc == w)

    def pieces(self) -> list[tuple[float, float, float, float]]:
        """Affine decomposition: (lo, hi, a, b) with S(w) = a - b*w on (lo, hi].

        Breakpoints include every atom location and segment endpoint, so each
        segment either fully covers a piece or misses it.
        """
        out = []
        bps = self.breakpoints
        for left, right in zip(bps[:-1], bps[1:]):
            slope = sum(wt * inv for lo, hi, wt, inv in self._segs if lo <= left and right <= hi)
            # anchor at the right endpoint, where the piece value is attained
            a = self.value(right) + slope * right
            out.append((left, right, a, slope))
        return out


def make_survival(noise: NoiseSpec, c: float) -> SurvivalCurve:
    """Exact survival curve for a noise mixture with support radius c."""
    return SurvivalCurve(noise, c)


class Oracle:
    """Clairvoyant revenue maximizer over posted prices in [0, price_cap].

    Candidates are every breakpoint of S plus the interior stationary point
    of the revenue quadratic on each downward-sloping piece. All candidates
    are evaluated through price space (v = p * S(p - u) with p formed first),
    the same expression the harness charges per round, so a policy that posts
    the oracle price accrues exactly zero pseudo-regret in floating point.
    """

    def __init__(self, survival: SurvivalCurve, price_cap: float):
        if price_cap <= 0:
            raise InvalidSpecError(f"price cap must be positive, got {price_cap}")
        self.survival = survival
        self.price_cap = float(price_cap)
        self._pieces = [p for p in survival.pieces() if p[3] > 0.0]
        self._static = list(survival.breakpoints)

    def best(self, u: float) -> tuple[float, float]:
        """Highest expected revenue price for expected valuation u.

        Returns (p_star, v_star); exact ties resolve toward the lowest price.
        Each candidate is tried together with its one-ulp-down neighbor:
        forming p = u + a for an atom at a can round so that p - u lands just
        above the atom and drops its mass, while the price one ulp lower
        keeps it (S is left-continuous).
        """
        cap = self.price_cap
        surv = self.survival
        best_p = cap
        best_v = -1.0
        cands = [u + w for w in self._static]
        for lo, hi, a, b in self._pieces:
            w = (a - b * u) / (2.0 * b)
            if lo < w < hi:
                cands.append(u + w)
        for raw in cands:
            for p in (raw, math.nextafter(raw, -math.inf)):
                if p < 0.0:
                    p = 0.0
                elif p > cap:
                    p = cap
                v = p * surv.value(p - u)
                if v > best_v or (v == best_v and p < best_p):
                    best_v = v
                    best_p = p
        return best_p, best_v


def oracle_best(survival: SurvivalCurve, u: float, price_cap: float) -> tuple[float, float]:
    """One-shot (p_star, v_star); see Oracle for the candidate construction."""
    return Oracle(survival, price_cap).best(u)


@dataclass(frozen=True)
class ContextSpec:
    """How buyer features are drawn. Coordinate 0 is a fixed intercept.

    kind "uniform": remaining d-1 coordinates i.i.d. Unif(lo, hi).
    kind "rademacher": remaining coordinates independent +-1 signs.
    """

    kind: str
    d: int
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "rademacher"):
            raise InvalidSpecError(f"unknown context kind: {self.kind!r}")
        if self.d < 1:
            raise InvalidSpecError(f"context dimension must be >= 1, got {self.d}")
        if self.kind == "uniform" and not self.lo < self.hi:
            raise InvalidSpecError(f"feature range needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def b_x(self) -> float:
        """Worst-case Euclidean norm of a context."""
        if self.kind == "rademacher":
            return math.sqrt(self.d)
        peak = max(abs(self.lo), abs(self.hi))
        return math.sqrt(1.0 + (self.d - 1) * peak * peak)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        x = np.empty(self.d)
        x[0] = 1.0
        if self.kind == "uniform":
            x[1:] = rng.uniform(self.lo, self.hi, self.d - 1)
        else:
            x[1:] = rng.integers(0, 2, self.d - 1) * 2.0 - 1.0
        return x

    def sample_block(self, rng: np.random.Generator, n: int) -> np.ndarray:
        x = np.empty((n, self.d))
        x[:, 0] = 1.0
        if self.kind == "uniform":
            x[:, 1:] = rng.uniform(self.lo, self.hi, (n, self.d - 1))
        else:
            x[:, 1:] = rng.integers(0, 2, (n, self.d - 1)) * 2.0 - 1.0
        return x

    def value_range(self, theta: np.ndarray) -> tuple[float, float]:
        """Analytic range of <x, theta> over the context support."""
        base = float(theta[0])
        lo_sum = 0.0
        hi_sum = 0.0
        for tj in np.asarray(theta)[1:]:
            if self.kind == "uniform":
                a, b = tj * self.lo, tj * self.hi
            else:
                a, b = -abs(tj), abs(tj)
            lo_sum += min(a, b)
            hi_sum += max(a, b)
        return base + lo_sum, base + hi_sum


class PricingInstance:
    """Ground-truth market: linear expected valuation plus mixture noise.

    Construction checks the buffer condition analytically: every reachable
    u = <x, theta*> keeps [u - c, u + c] inside [kappa, price_cap] with
    kappa > 0, so posted prices in [0, price_cap] can always bracket the
    noise support and valuations stay in (0, price_cap].
    """

    def __init__(
        self,
        theta_star,
        context: ContextSpec,
        noise: NoiseSpec,
        price_cap: float,
        c: float,
        kappa: float | None = None,
    ):
        theta = np.asarray(theta_star, dtype=float)
        if theta.ndim != 1 or theta.shape[0] != context.d:
            raise InvalidSpecError(
                f"theta_star has shape {theta.shape}, context dimension is {context.d}"
            )
        if abs(noise.mean()) > MEAN_TOL:
            raise InvalidSpecError(f"noise mean {noise.mean()!r} is not zero")
        self.theta_star = theta
        self.context = context
        self.noise = noise
        self.price_cap = float(price_cap)
        self.c = float(c)
        self.survival = make_survival(noise, c)
        u_min, u_max = context.value_range(theta)
        if kappa is None:
            kappa = u_min - c
        self.kappa = float(kappa)
        self.u_range = (u_min, u_max)
        if self.kappa <= 0:
            raise InvalidSpecError(f"buffer kappa must be positive, got {self.kappa}")
        if u_min - c < self.kappa - 1e-12:
            raise InvalidSpecError(
                f"lowest valuation {u_min} minus c={c} falls below kappa={self.kappa}"
            )
        if u_max + c > self.price_cap + 1e-12:
            raise InvalidSpecError(
                f"highest valuation {u_max} plus c={c} exceeds price cap {self.price_cap}"
            )
        self.oracle = Oracle(self.survival, self.price_cap)

    @property
    def d(self) -> int:
        return self.context.d

    def u_of(self, x: np.ndarray) -> float:
        return float(np.dot(x, self.theta_star))


def sample_step(instance: PricingInstance, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Draw one round: context first, then noise. Returns (x, valuation)."""
    x = instance.context.sample(rng)
    xi = instance.noise.sample(rng)
    return x, float(np.dot(x, instance.theta_star)) + xi


def sample_block(
    instance: PricingInstance, rng: np.random.Generator, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized rounds: the full context block is drawn before the noise block."""
    x = instance.context.sample_block(rng, n)
    xi = instance.noise.sample_block(rng, n)
    return x, x @ instance.theta_star + xi


def feedback(price: float, valuation: float) -> int:
    """Sale bit for a posted price; indifference buys."""
    return 1 if price <= valuation else 0


def benchmark_instance(noise: str | NoiseSpec = "uniform", d: int = 5) -> PricingInstance:
    """Default desk-scale market: intercept 2, feature weights summing to 0.5,
    Unif(0,1) features, c = 1, price cap 4, so u ranges over (2, 2.5)."""
    if isinstance(noise, str):
        if noise == "uniform":
            noise = uniform_noise()
        elif noise == "cliff":
            noise = cliff_noise()
        else:
            raise InvalidSpecError(f"unknown noise preset: {noise!r}")
    if d < 2:
        raise InvalidSpecError(f"benchmark instance needs d >= 2, got {d}")
    theta = np.full(d, 0.5 / (d - 1))
    theta[0] = 2.0
    context = ContextSpec("uniform", d)
    return PricingInstance(theta, context, noise, price_cap=4.0, c=1.0, kappa=1.0)


def embed_noncontextual(
    d: int, u0: float, noise: NoiseSpec, price_cap: float | None = None
) -> PricingInstance:
    """Lift a fixed-value pricing problem into dimension d.

    theta* = (u0, 0, ..., 0) with independent sign dummies, so the population
    context second moment is the identity and every round poses exactly the
    one-dimensional problem with expected valuation u0. Used to span the
    hard-instance family whose difficulty is invariant to d.
    """
    if d < 2:
        raise InvalidSpecError(f"embedding needs d >= 2, got {d}")
    if abs(noise.mean()) > MEAN_TOL:
        raise InvalidSpecError(f"noise mean {noise.mean()!r} is not zero")
    c = noise.support_radius()
    if c <= 0:
        raise InvalidSpecError("noise support radius must be positive")
    if u0 - c <= 0:
        raise InvalidSpecError(f"u0={u0} leaves no buffer below the noise support (c={c})")
    if price_cap is None:
        price_cap = u0 + c
    theta = np.zeros(d)
    theta[0] = u0
    context = ContextSpec("rademacher", d)
    return PricingInstance(theta, context, noise, price_cap=price_cap, c=c, kappa=u0 - c)
