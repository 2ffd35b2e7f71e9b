import math
from fractions import Fraction

import numpy as np
import pytest

from rwpcorr import simulation as sim
from rwpcorr.errors import DegenerateVarianceError, InvalidConfigError
from rwpcorr.interference import ChannelConfig
from rwpcorr.mobility import LatticeConfig, kernel_high_tau, kernel_tau1, kernel_tau2, steady_state
from rwpcorr.outage import LinkConfig
from rwpcorr.simulation import SimConfig

SMALL = LatticeConfig(10, 2)
# Family-wise bound for many cells checked at once: Bonferroni over ~100 cells at 3 sigma each.
FAMILY_Z = 4.0


def cfg_for(lattice=SMALL, K=5, xi=1.0, warmup=500, samples=2000, reps=10, seed=0, **kw):
    return SimConfig(lattice, ChannelConfig(K=K, xi=xi), warmup_slots=warmup, sample_slots=samples,
                     replications=reps, seed=seed, **kw)


def test_invalid_run_lengths_rejected():
    for kw in (dict(warmup_slots=-1), dict(sample_slots=0), dict(replications=0)):
        with pytest.raises(InvalidConfigError):
            SimConfig(SMALL, **kw)


def test_link_must_share_channel():
    link = LinkConfig(1, 1, channel=ChannelConfig(a=2.0))
    with pytest.raises(InvalidConfigError):
        SimConfig(SMALL, ChannelConfig(a=4.0), link=link)


def test_speed_set_must_fit_lattice():
    with pytest.raises(InvalidConfigError):
        SimConfig(LatticeConfig(10, 0), speed_set=(0.5, 1))
    with pytest.raises(InvalidConfigError):
        SimConfig(LatticeConfig(10, 0), speed_set=())
    ok = SimConfig(LatticeConfig(10, 0, N_d=8), speed_set=(0.5, 1, 1.5))
    assert ok.speeds == (Fraction(1, 2), Fraction(1), Fraction(3, 2))
    assert ok.timing() == (24, (6, 3, 2))


def test_single_speed_tick_is_one_hop():
    assert SimConfig(LatticeConfig(10, 3, v=2, N_d=4)).timing() == (8, (1,))


def test_estimate_z():
    e = sim.SimEstimate(1.0, 0.5, 10)
    assert e.z(2.0) == 2.0
    assert sim.SimEstimate(1.0, 0.0, 10).z(1.0) == 0.0
    assert math.isinf(sim.SimEstimate(1.0, 0.0, 10).z(2.0))


def test_runs_are_deterministic_per_seed():
    a = sim.run(cfg_for()).positions(3)
    b = sim.run(cfg_for()).positions(3)
    c = sim.run(cfg_for(seed=1)).positions(3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, sim.run(cfg_for()).positions(4))


def test_trajectory_moves_one_step_per_hop():
    rng = np.random.default_rng(5)
    ticks = np.arange(0, 5000)
    path = sim.user_trajectory(rng, 20, ticks, (3,), 4)
    assert path.min() >= 1 and path.max() <= 20
    assert np.all(np.abs(np.diff(path)) <= 1)
    # within one hop duration the position changes at most once
    assert np.all(np.abs(path[3:] - path[:-3]) <= 1)


def test_occupancy_matches_steady_state():
    f = steady_state(SMALL).f
    est = sim.empirical_occupancy(cfg_for(K=10))
    assert max(abs(e.z(v)) for e, v in zip(est, f)) < FAMILY_Z


def test_huge_think_time_is_uniform():
    lattice = LatticeConfig(8, 10**6)
    np.testing.assert_allclose(steady_state(lattice).f, 1 / 8, atol=1e-5)
    est = sim.empirical_occupancy(cfg_for(lattice, K=20, warmup=0, samples=200, reps=20))
    assert max(abs(e.z(1 / 8)) for e in est) < FAMILY_Z


def _max_kernel_z(est, analytic, lower_only=False):
    zs = []
    N, width = est.probs.shape
    for k in range(-est.span, est.span + 1):
        col = analytic.column(k) if abs(k) <= analytic.tau else np.zeros(N)
        for n in range(N):
            if est.undersampled[n, k + est.span] or est.counts[n].sum() == 0:
                continue
            diff = est.probs[n, k + est.span] - col[n]
            se = est.stderr[n, k + est.span]
            if lower_only:
                diff = min(diff, 0.0)
            if diff == 0:
                continue
            zs.append(abs(diff) / se if se > 0 else math.inf)
    return max(zs, default=0.0)


def test_one_slot_kernel_matches_closed_form():
    est = sim.estimate_kernel(cfg_for(K=10, reps=20), 1)
    assert est.span == 1 and est.lag == 1
    assert _max_kernel_z(est, kernel_tau1(SMALL)) < FAMILY_Z
    np.testing.assert_allclose(est.as_kernel().row_sums(), 1.0)


def test_two_slot_kernel_matches_closed_form():
    est = sim.estimate_kernel(cfg_for(K=10, reps=20), 2)
    assert _max_kernel_z(est, kernel_tau2(SMALL)) < FAMILY_Z


def test_two_slot_parity_without_think_time():
    lattice = LatticeConfig(10, 0)
    est = sim.estimate_kernel(cfg_for(lattice), 2)
    assert np.all(est.counts[:, [1, 3]] == 0)


def test_long_lag_estimates_dominate_approximation():
    lattice = LatticeConfig(30, 0)
    est = sim.estimate_kernel(cfg_for(lattice, K=10, reps=20), 6)
    assert _max_kernel_z(est, kernel_high_tau(lattice, 6), lower_only=True) < FAMILY_Z


def test_silent_users_give_zero_interference():
    res = sim.estimate_interference(cfg_for(xi=0.0, reps=3), [1.0, 5.0], taus=(1,))
    assert all(m.estimate == 0 for m in res.mean)
    assert res.rho == {}
    with pytest.raises(DegenerateVarianceError):
        sim._autocorr(np.zeros((10, 1)), 1)


def test_outage_needs_link():
    with pytest.raises(InvalidConfigError):
        sim.estimate_outage(cfg_for())


def test_tiny_threshold_never_outage():
    ch = ChannelConfig(K=5)
    link = LinkConfig(3, 3, q=1e-12, P_N=0.0, channel=ch)
    cfg = SimConfig(SMALL, ch, link=link, warmup_slots=100, sample_slots=500, replications=3)
    res = sim.estimate_outage(cfg, taus=())
    assert res.outage[0].estimate == 0


def test_noise_only_outage():
    ch = ChannelConfig(K=5, xi=0.0)
    link = LinkConfig(3, 4, q=1.0, P_N=0.3, channel=ch)
    cfg = SimConfig(SMALL, ch, link=link, warmup_slots=100, sample_slots=5000, replications=10)
    res = sim.estimate_outage(cfg, taus=(1,))
    p = 1 - math.exp(-link.noise_term)
    assert abs(res.outage[0].z(p)) < 3
    # fading is fresh every slot, so the conditional equals the marginal
    assert abs(res.conditional[1][0].z(p)) < 3
