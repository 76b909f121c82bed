"""Stage-1 regression tests: accumulation, truncated solve, grid step."""

import math

import numpy as np
import pytest

from pricing_lab.env import benchmark_instance, sample_block
from pricing_lab.errors import InvalidSpecError
from pricing_lab.estimator import (
    DesignAccumulator,
    accumulate,
    accumulate_batch,
    delta_for,
    rank_deficient,
    solve_theta,
)


def test_single_observation_moments():
    acc = DesignAccumulator(2, price_cap=4.0)
    accumulate(acc, np.array([1.0, 0.0]), 1)
    assert acc.moment.tolist() == [4.0, 0.0]
    assert acc.gram.tolist() == [[1.0, 0.0], [0.0, 0.0]]
    assert acc.count == 1


def test_batch_matches_sequential():
    rng = np.random.default_rng(3)
    xs = rng.uniform(0, 1, (50, 3))
    os = rng.integers(0, 2, 50)
    a = DesignAccumulator(3, 4.0)
    b = DesignAccumulator(3, 4.0)
    for x, o in zip(xs, os):
        accumulate(a, x, int(o))
    accumulate_batch(b, xs, os)
    np.testing.assert_allclose(a.gram, b.gram, rtol=1e-12)
    np.testing.assert_allclose(a.moment, b.moment, rtol=1e-12)
    assert a.count == b.count == 50


def test_accumulate_is_order_free():
    rng = np.random.default_rng(5)
    xs = rng.uniform(0, 1, (30, 4))
    os = rng.integers(0, 2, 30)
    fwd = DesignAccumulator(4, 4.0)
    rev = DesignAccumulator(4, 4.0)
    for x, o in zip(xs, os):
        accumulate(fwd, x, int(o))
    for x, o in zip(xs[::-1], os[::-1]):
        accumulate(rev, x, int(o))
    np.testing.assert_allclose(fwd.gram, rev.gram, atol=1e-12)
    np.testing.assert_allclose(fwd.moment, rev.moment, atol=1e-12)


def test_truncated_solve_zeroes_unseen_direction():
    acc = DesignAccumulator(2, 4.0)
    accumulate(acc, np.array([1.0, 0.0]), 1)
    accumulate(acc, np.array([1.0, 0.0]), 0)
    theta = solve_theta(acc)
    assert theta == pytest.approx([2.0, 0.0], abs=1e-12)
    assert rank_deficient(acc)
    assert rank_deficient(DesignAccumulator(2, 4.0))  # empty design


def test_solve_matches_direct_inverse_when_full_rank():
    rng = np.random.default_rng(11)
    m = rng.normal(size=(6, 4))
    gram = m.T @ m + 0.5 * np.eye(4)
    moment = rng.normal(size=4)
    acc = DesignAccumulator(4, 4.0)
    acc.gram = gram
    acc.moment = moment
    np.testing.assert_allclose(solve_theta(acc), np.linalg.solve(gram, moment), rtol=1e-8)
    assert not rank_deficient(acc)


def test_unbiased_signal_fixed_context():
    # E[price_cap * o | x] = <x, theta*> for uniform prices on [0, cap]
    rng = np.random.default_rng(17)
    inst = benchmark_instance("cliff")
    x = np.array([1.0, 0.5, 0.5, 0.5, 0.5])
    u = inst.u_of(x)
    n = 100_000
    prices = rng.uniform(0, 4.0, n)
    xi = inst.noise.sample_block(rng, n)
    z = 4.0 * (prices <= u + xi)
    tol = 4 * 4.0 * math.sqrt(math.log(n) / n)
    assert abs(z.mean() - u) <= tol


def test_estimate_converges_on_benchmark():
    rng = np.random.default_rng(23)
    inst = benchmark_instance("uniform")
    errs = {}
    for t1 in (1000, 16000):
        acc = DesignAccumulator(5, 4.0)
        xs, ys = sample_block(inst, rng, t1)
        prices = rng.uniform(0, 4.0, t1)
        accumulate_batch(acc, xs, (prices <= ys).astype(float))
        errs[t1] = float(np.linalg.norm(solve_theta(acc) - inst.theta_star))
    # 16x the data should cut the error roughly 4x; allow a loose factor
    assert errs[16000] < errs[1000] / 1.6


def test_grid_step_value():
    # 0.35 * sqrt(5 * ln(1000) / 100) = 0.20569...
    val = delta_for(1000, 100, 5)
    assert val == pytest.approx(0.35 * math.sqrt(5 * math.log(1000) / 100), rel=1e-12)
    assert val == pytest.approx(0.20569, abs=1e-5)
    assert delta_for(2, 1, 1) > 0
    with pytest.raises(InvalidSpecError):
        delta_for(1, 1, 5)
    with pytest.raises(InvalidSpecError):
        delta_for(1000, 0, 5)
    with pytest.raises(InvalidSpecError):
        delta_for(1000, 100, 5, delta_mult=0.0)
