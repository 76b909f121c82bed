"""Policy state-machine tests: stages, protocol, determinism, budgets."""

import numpy as np
import pytest
import scipy.stats

from pricing_lab.cmrup import CmrupConfig, CmrupPolicy, stage_length
from pricing_lab.env import benchmark_instance, feedback, sample_step
from pricing_lab.errors import InvalidSpecError, ProtocolError
from pricing_lab.grid import conf_radius, ucb_score
from pricing_lab.rng import derive_rng


def drive(policy, instance, rng, rounds):
    """Run the act/observe loop for a number of rounds."""
    for _ in range(rounds):
        x, y = sample_step(instance, rng)
        price = policy.act(x)
        policy.observe(feedback(price, y))


def test_stage_length_exact_integers():
    assert stage_length(8) == 4
    assert stage_length(27) == 9
    assert stage_length(1000) == 100
    assert stage_length(32000) == 1008
    assert stage_length(1_000_000) == 10_000
    for t in (8, 9, 100, 501, 7777, 64000):
        m = stage_length(t)
        assert m**3 >= t * t > (m - 1) ** 3


def test_config_validation():
    with pytest.raises(InvalidSpecError):
        CmrupConfig(horizon=7)
    with pytest.raises(InvalidSpecError):
        CmrupConfig(horizon=100, delta_mult=0.0)
    with pytest.raises(InvalidSpecError):
        CmrupConfig(horizon=100, c_ucb=-1.0)
    cfg = CmrupConfig(horizon=1000)
    assert (cfg.delta_mult, cfg.c_ucb) == (0.35, 0.5)


def test_act_observe_protocol():
    inst = benchmark_instance("uniform")
    policy = CmrupPolicy(CmrupConfig(horizon=100), 5, derive_rng(1, 100, 0, "policy"))
    x, y = sample_step(inst, derive_rng(1, 100, 0, "env"))
    price = policy.act(x)
    with pytest.raises(ProtocolError):
        policy.act(x)
    policy.observe(feedback(price, y))
    with pytest.raises(ProtocolError):
        policy.observe(0)


def test_stage_boundaries_and_frozen_theta():
    inst = benchmark_instance("uniform")
    T = 1000
    policy = CmrupPolicy(CmrupConfig(horizon=T), 5, derive_rng(2, T, 0, "policy"))
    env = derive_rng(2, T, 0, "env")
    assert policy.stage == "estimate"
    assert policy.theta_hat is None
    drive(policy, inst, env, policy.t1)
    assert policy.t1 == policy.tw == 100
    assert policy.stage == "warmup"
    assert policy.theta_hat is not None
    frozen = policy.theta_hat.theta.copy()
    drive(policy, inst, env, policy.tw)
    assert policy.stage == "adapt"
    drive(policy, inst, env, 200)
    np.testing.assert_array_equal(policy.theta_hat.theta, frozen)
    # every post-stage-1 round lands in exactly one index count
    assert policy.stats.n.sum() == policy.tw + 200


def test_stage_one_prices_uniform():
    # stage 1 of a long run gives 10^4 i.i.d. uniform prices on [0, 4]
    T = 1_000_000
    inst = benchmark_instance("uniform")
    policy = CmrupPolicy(CmrupConfig(horizon=T), 5, derive_rng(3, T, 0, "policy"))
    env = derive_rng(3, T, 0, "env")
    prices = []
    for _ in range(10_000):
        x, y = sample_step(inst, env)
        p = policy.act(x)
        prices.append(p)
        policy.observe(feedback(p, y))
    stat = scipy.stats.kstest(np.array(prices) / 4.0, "uniform").statistic
    assert stat < 0.02


def test_warmup_indices_cover_grid():
    inst = benchmark_instance("cliff")
    T = 4000
    policy = CmrupPolicy(CmrupConfig(horizon=T), 5, derive_rng(4, T, 0, "policy"))
    env = derive_rng(4, T, 0, "env")
    drive(policy, inst, env, policy.t1 + policy.tw)
    assert policy.stats.n.sum() == policy.tw
    assert np.all(policy.stats.n > 0)  # tw >> M at this horizon


def test_replay_is_deterministic():
    inst = benchmark_instance("cliff")
    T = 600

    def run():
        policy = CmrupPolicy(CmrupConfig(horizon=T), 5, derive_rng(9, T, 1, "policy"))
        env = derive_rng(9, T, 1, "env")
        prices = []
        for _ in range(T):
            x, y = sample_step(inst, env)
            p = policy.act(x)
            prices.append(p)
            policy.observe(feedback(p, y))
        return prices

    assert run() == run()


def test_no_clipping_on_benchmark():
    for noise in ("uniform", "cliff"):
        inst = benchmark_instance(noise)
        T = 2000
        policy = CmrupPolicy(CmrupConfig(horizon=T), 5, derive_rng(5, T, 0, "policy"))
        drive(policy, inst, derive_rng(5, T, 0, "env"), T)
        assert policy.clipped_probes == 0


def test_scores_match_module_functions():
    inst = benchmark_instance("uniform")
    T = 2000
    policy = CmrupPolicy(CmrupConfig(horizon=T), 5, derive_rng(6, T, 0, "policy"))
    env = derive_rng(6, T, 0, "env")
    drive(policy, inst, env, policy.t1 + policy.tw + 50)
    u_hat = 2.3
    expected = np.array(
        [
            ucb_score(
                u_hat,
                j,
                policy.grid,
                policy.stats.m_hat()[j],
                conf_radius(int(policy.stats.n[j]), T, policy.config.c_ucb),
            )
            for j in range(policy.grid.m)
        ]
    )
    np.testing.assert_allclose(policy.scores_for(u_hat), expected, rtol=1e-12)


def test_direct_budget_within_bound():
    inst = benchmark_instance("cliff")
    T = 8000
    policy = CmrupPolicy(CmrupConfig(horizon=T), 5, derive_rng(7, T, 0, "policy"))
    drive(policy, inst, derive_rng(7, T, 0, "env"), T)
    delta = policy.theta_hat.delta
    bound = np.ceil(policy.config.c_ucb**2 * np.log(T) / delta**2) + 1
    assert np.all(policy.direct_counts <= bound)


def test_short_horizon_aborts_when_grid_too_coarse():
    # delta_mult large enough that delta > c at the stage-1 handoff
    inst = benchmark_instance("uniform")
    T = 8
    policy = CmrupPolicy(CmrupConfig(horizon=T, delta_mult=5.0), 5, derive_rng(8, T, 0, "policy"))
    env = derive_rng(8, T, 0, "env")
    with pytest.raises(InvalidSpecError):
        drive(policy, inst, env, policy.t1)
