"""Independent reference implementations used to freeze expected test values.

The dense-grid maximizer is an exhaustive route to the clairvoyant price: it
scans a uniform million-point price grid augmented with every jump location
(a uniform grid alone can sit up to half a grid step left of an atom and
undershoot the peak by more than the comparison tolerance). It shares only
the exact survival evaluator with the analytic oracle, not the candidate
analysis being validated.

Run as a script to print the derived oracle values for the default markets.
"""

import numpy as np

from pricing_lab.env import SurvivalCurve


def dense_grid_best(
    surv: SurvivalCurve, u: float, price_cap: float, n: int = 1_000_000
) -> tuple[float, float]:
    """Exhaustive revenue maximization over a dense price grid.

    Returns (price, revenue) with ties toward the lowest price.
    """
    prices = np.linspace(0.0, price_cap, n)
    raw = u + np.asarray(surv.breakpoints)
    # forming u + a can round to the wrong side of a jump; the price one ulp
    # lower keeps the atom mass (S is left-continuous), so scan both
    special = np.clip(np.concatenate([raw, np.nextafter(raw, -np.inf)]), 0.0, price_cap)
    prices = np.sort(np.concatenate([prices, special]))
    revenue = prices * surv.values(prices - u)
    i = int(np.argmax(revenue))  # first max = lowest price among exact ties
    return float(prices[i]), float(revenue[i])


def monte_carlo_revenue(
    surv: SurvivalCurve, u: float, price: float, rng: np.random.Generator, n: int = 200_000
) -> float:
    """Empirical mean revenue of a fixed price under the true market draws."""
    xi = surv.noise.sample_block(rng, n)
    return float(np.mean(price * (price <= u + xi)))


if __name__ == "__main__":
    from pricing_lab.env import cliff_noise, make_survival, uniform_noise

    for name, noise in (("uniform", uniform_noise()), ("cliff", cliff_noise())):
        surv = make_survival(noise, 1.0)
        p, v = dense_grid_best(surv, 2.25, 4.0)
        print(f"{name}: u=2.25 -> p*={p!r} v*={v!r}")
