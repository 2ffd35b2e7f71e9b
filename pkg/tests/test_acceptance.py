"""Acceptance criteria 1 to 9, each at its stated tolerance and runtime budget.

Simulated checks use seed 0, fixed in advance. The terminal summary prints one
PASS/FAIL line per criterion.
"""
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwpcorr import chain, figures, interference as itf, mobility, outage as out
from rwpcorr.figures import FigureSettings
from rwpcorr.interference import ChannelConfig
from rwpcorr.mobility import DisplacementKernel, LatticeConfig
from rwpcorr.outage import LinkConfig

SEED = 0
MC_SIGMAS = 3.0
FIG = FigureSettings(with_mc=True, seed=SEED, warmup=10_000, samples=20_000, replications=30)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


def col(table, name):
    return np.array([row[table.columns.index(name)] for row in table.rows], dtype=float)


def mc_lookup(table, quantity, tau):
    """``x_p -> (estimate, stderr)`` for one quantity of an estimates table."""
    return {float(r[1]): (float(r[3]), float(r[4])) for r in table.rows
            if r[0] == quantity and str(r[2]) == str(tau)}


def max_z(analytic_x, analytic, mc, keep=lambda x: True):
    zs = []
    for x, value in zip(analytic_x, analytic):
        if keep(x):
            est, se = mc[float(x)]
            zs.append(abs(value - est) / se)
    return max(zs)


# 1. closed forms ---------------------------------------------------------------------------------

def test_criterion_1_closed_forms():
    with Budget(1.0):
        for N in range(2, 51):
            assert mobility.mean_travel_length(LatticeConfig(N, 0)) == Fraction(N + 1, 3)
            f1 = mobility.steady_state(LatticeConfig(N, 0)).f[0]
            assert f1 == pytest.approx(3 / (N * (N + 1)), abs=1e-12)
        for M in range(0, 11):
            stay = mobility.kernel_tau1(LatticeConfig(50, M)).column(0)[0]
            assert stay == pytest.approx(M / (M + 2), abs=1e-12)
        xp = np.arange(1, 51, dtype=float)
        for xi in np.round(np.arange(1, 11) / 10, 12):
            rho = itf.rho_infinity(ChannelConfig(xi=xi), xp, 50, poisson=True)
            np.testing.assert_allclose(rho, xi / 2, rtol=0, atol=1e-12)


# 2. oracle equivalence ---------------------------------------------------------------------------

def test_criterion_2_oracle_equivalence():
    with Budget(120.0):
        worst = {"f": 0.0, "tau1": 0.0, "tau2": 0.0}
        for N in range(2, 21):
            for M in range(0, 6):
                cfg = LatticeConfig(N, M)
                ch = chain.build_chain(cfg)
                law = chain.stationary(ch)
                exact = chain.displacement_series(ch, law, [1, 2])
                worst["f"] = max(worst["f"], np.abs(mobility.steady_state(cfg).f - law.marginal(ch)).max())
                worst["tau1"] = max(worst["tau1"], np.abs(
                    mobility.kernel_tau1(cfg).to_matrix() - exact[1].to_matrix()).max())
                worst["tau2"] = max(worst["tau2"], np.abs(
                    mobility.kernel_tau2(cfg).to_matrix() - exact[2].to_matrix()).max())
        assert max(worst.values()) <= 1e-9, worst

        cfg = LatticeConfig(50, 0)
        ss = mobility.steady_state(cfg)
        taus = list(range(1, 11))
        oracle = chain.oracle_kernels(cfg, taus)
        xp = np.arange(1, 51, dtype=float)
        for tau in taus:
            exact = oracle[tau]
            approx = mobility.kernel_high_tau(cfg, tau)
            assert np.all(approx.to_matrix() <= exact.to_matrix() + 1e-12)
            for a in (2.0, 4.0):
                ch = ChannelConfig(K=50, xi=1.0, epsilon=0.5, a=a)
                err = np.abs(itf.correlation(ss, approx, ch, xp) - itf.correlation(ss, exact, ch, xp))
                assert err.max() <= 0.05, (tau, a, err.max())


# 3. correlation shape and simulation at the baseline ---------------------------------------------

@pytest.fixture(scope="module")
def fig3_tables():
    t0 = time.perf_counter()
    tables = figures.figure(3, FIG)
    return tables, time.perf_counter() - t0


def test_criterion_3_shape():
    with Budget(600.0):
        cfg = LatticeConfig(50, 5)
        ss = mobility.steady_state(cfg)
        ch = ChannelConfig(K=50, xi=1.0, epsilon=0.5, a=4.0)
        xp = np.arange(1, 51, dtype=float)
        k1, k2 = mobility.kernel_tau1(cfg), mobility.kernel_tau2(cfg)
        rho1, rho2 = itf.correlation(ss, k1, ch, xp), itf.correlation(ss, k2, ch, xp)
        assert rho1[0] > rho1[24]
        assert np.all(rho2 < rho1)
        for k, rho in ((k1, rho1), (k2, rho2)):
            assert np.all(itf.ppp_variants(ss, k, ch, xp).rho > rho)


@pytest.mark.slow
def test_criterion_3_monte_carlo(fig3_tables):
    (table, mc), elapsed = fig3_tables
    assert elapsed < 600.0
    xp = col(table, "x_p")
    for tau in (1, 2):
        z = max_z(xp, col(table, f"rho_tau{tau}"), mc_lookup(mc, "rho", tau))
        assert z <= MC_SIGMAS, f"tau={tau}: worst deviation {z:.2f} standard errors"


# 4. decorrelation times --------------------------------------------------------------------------

def decorrelation_time(N, a, x_p, limit=0.05, max_tau=60):
    cfg = LatticeConfig(N, 0)
    ss = mobility.steady_state(cfg)
    ch = ChannelConfig(K=50, xi=1.0, epsilon=0.5, a=a)
    for tau in range(1, max_tau + 1):
        if abs(itf.correlation(ss, mobility.kernel_for_speed(cfg, tau), ch, float(x_p))) < limit:
            return tau
    return None


@pytest.mark.parametrize("N, a, x_p, target, tol", [
    (50, 2.0, 25, 4, 1), (50, 2.0, 1, 10, 1),
    (50, 4.0, 25, 3, 1), (50, 4.0, 1, 4, 1),
    (100, 2.0, 50, 6, 1), (100, 2.0, 1, 16, 2),
], ids=["N50-a2-centre", "N50-a2-border", "N50-a4-centre", "N50-a4-border", "N100-centre", "N100-border"])
def test_criterion_4_decorrelation_time(N, a, x_p, target, tol):
    with Budget(300.0):
        tau = decorrelation_time(N, a, x_p)
    assert tau is not None and abs(tau - target) <= tol, f"first lag with |rho| < 0.05 is {tau}, target {target}"


# 5. extremes of think time -----------------------------------------------------------------------

@pytest.mark.parametrize("a", [2.0, 4.0])
def test_criterion_5_extremes(a):
    with Budget(60.0):
        N = 50
        ch = ChannelConfig(K=50, xi=1.0, epsilon=0.5, a=a)
        xp = np.array([1.0, 25.0])
        uniform = mobility.uniform_state(N)
        static = [itf.correlation(uniform, DisplacementKernel.identity(N, tau), ch, xp) for tau in (1, 2, 5, 25)]
        for rho in static:
            np.testing.assert_allclose(rho, static[0], atol=1e-12)
        np.testing.assert_allclose(static[0], itf.rho_infinity(ch, xp, N), atol=1e-12)
        static_gap = static[0][0] - static[0][1]
        assert static_gap > 0

        cfg = LatticeConfig(N, 0)
        mobile = itf.correlation(mobility.steady_state(cfg), mobility.kernel_tau1(cfg), ch, xp)
        assert mobile[0] - mobile[1] > static_gap


# 6. densification and speed ----------------------------------------------------------------------

def test_criterion_6_speed_identities():
    for N in (5, 20, 50):
        for M in (0, 1, 5):
            fast = mobility.kernel_for_speed(LatticeConfig(N, M, v=2), 1)
            slow = mobility.kernel_tau2(LatticeConfig(N, 2 * M))
            np.testing.assert_allclose(fast.to_matrix(), slow.to_matrix(), rtol=0, atol=1e-12)
            dense = LatticeConfig(N, M, N_d=2)
            refined = LatticeConfig(2 * N, 2 * M)
            np.testing.assert_allclose(mobility.steady_state(dense).f, mobility.steady_state(refined).f,
                                       rtol=0, atol=1e-12)
            np.testing.assert_allclose(mobility.kernel_for_speed(dense, 1).to_matrix(),
                                       mobility.kernel_tau2(refined).to_matrix(), rtol=0, atol=1e-12)
            # half speed on the doubled lattice: one hop per slot, think time still M hops
            half = LatticeConfig(N, M, v=Fraction(1, 2), N_d=2)
            np.testing.assert_allclose(mobility.kernel_for_speed(half, 1).to_matrix(),
                                       mobility.kernel_tau1(LatticeConfig(2 * N, M)).to_matrix(),
                                       rtol=0, atol=1e-12)


@pytest.fixture(scope="module")
def fig6_tables():
    t0 = time.perf_counter()
    tables = figures.figure(6, FIG)
    return tables, time.perf_counter() - t0


@pytest.fixture(scope="module")
def fig7_tables():
    t0 = time.perf_counter()
    tables = figures.figure(7, FIG)
    return tables, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_6_dense_simulation_matches_continuum(fig7_tables):
    (table, mc), elapsed = fig7_tables
    assert elapsed < 1200.0
    xp = col(table, "x_p")
    N = FIG.N
    z = max_z(xp, col(table, "rho_Nd1000"), mc_lookup(mc, f"rho_Nd{figures.MC_DENSIFY}", 1),
              keep=lambda x: x not in (1.0, float(N)))
    assert z <= MC_SIGMAS, f"worst interior deviation {z:.2f} standard errors"


@pytest.mark.slow
def test_criterion_6_random_speed_correlates_more(fig6_tables):
    (_, mc), elapsed = fig6_tables
    assert elapsed < 1200.0
    fixed = mc_lookup(mc, f"rho_Nd{figures.MC_DENSIFY}", 1)
    rand = mc_lookup(mc, f"rho_Nd{figures.MC_DENSIFY}_random_speed", 1)
    interior = [x for x in fixed if x not in (1.0, float(FIG.N))]
    assert interior
    low = [x for x in interior if rand[x][0] < fixed[x][0]]
    assert not low, f"random-speed estimate below fixed-speed estimate at x_p={low}"


# 7. outage ---------------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def fig8_tables():
    t0 = time.perf_counter()
    tables = figures.figure(8, FIG)
    return tables, time.perf_counter() - t0


def test_criterion_7_outage_shape():
    cfg = LatticeConfig(50, 5)
    ss, k = mobility.steady_state(cfg), mobility.kernel_tau1(cfg)
    link = LinkConfig(x_p=1, x_t=1, q=1.0, P_N=1e-3, channel=ChannelConfig(K=50, xi=1.0, epsilon=0.5, a=2.0))
    border, centre = out.outage_result(ss, k, link), out.outage_result(ss, k, link.at(25))
    assert border.unconditional < centre.unconditional
    assert border.conditional - border.unconditional > centre.conditional - centre.unconditional


@pytest.mark.slow
def test_criterion_7_monte_carlo(fig8_tables):
    (table, mc), elapsed = fig8_tables
    assert elapsed < 600.0
    xp = col(table, "x_p")
    z_out = max_z(xp, col(table, "P_out"), mc_lookup(mc, "P_out", ""))
    z_cond = max_z(xp, col(table, "P_out_cond_tau1"), mc_lookup(mc, "P_out_cond", 1))
    assert max(z_out, z_cond) <= MC_SIGMAS, f"worst deviation {z_out:.2f} (P_out), {z_cond:.2f} (conditional)"


# 8. static uniform inequality --------------------------------------------------------------------

def test_criterion_8_appendix_inequality():
    with Budget(10.0):
        for a in (2.0, 4.0):
            for xi in (0.25, 0.5, 1.0):
                for q in (0.5, 1.0, 2.0):
                    ch = ChannelConfig(K=50, xi=xi, epsilon=0.5, a=a)
                    for x_p in range(1, 26):
                        link = LinkConfig(x_p=x_p, x_t=x_p, q=q, P_N=1e-3, channel=ch)
                        check = out.appendix_bound_check(link, 50)
                        assert check.holds and check.margin >= -1e-12, (a, xi, q, x_p, check.margin)
            for x_p in range(1, 26):
                silent = LinkConfig(x_p=x_p, x_t=x_p, channel=ChannelConfig(xi=0.0, a=a))
                assert abs(out.appendix_bound_check(silent, 50).margin) <= 1e-12


# 9. property fuzz --------------------------------------------------------------------------------

FUZZ_EXAMPLES = 500
_seen = set()


@settings(max_examples=FUZZ_EXAMPLES, derandomize=True, database=None)
@given(N=st.integers(2, 40), M=st.integers(0, 8), K=st.integers(1, 300), xi=st.floats(0.01, 1.0),
       a=st.floats(1.0, 6.0), eps=st.floats(0.1, 2.0), c=st.floats(0.0, 1.0), q=st.floats(0.1, 5.0),
       P_N=st.floats(0.0, 0.1), tau_long=st.integers(3, 12))
def test_criterion_9_property_fuzz(N, M, K, xi, a, eps, c, q, P_N, tau_long):
    _seen.add((N, M, K, xi, a, eps, c, q, P_N, tau_long))
    cfg = LatticeConfig(N, M)
    ss = mobility.steady_state(cfg)
    kernels = [mobility.kernel_tau1(cfg), mobility.kernel_tau2(cfg)]
    if M == 0:
        kernels.append(mobility.kernel_high_tau(cfg, tau_long))
    ch = ChannelConfig(K=K, xi=xi, epsilon=eps, a=a)
    x = 1 + c * (N - 1)
    mirror = N + 1 - x

    assert np.allclose(ss.f, ss.f[::-1], atol=1e-15) and ss.f.sum() == pytest.approx(1.0, abs=1e-12)
    for k in kernels:
        P = k.to_matrix()
        rows = P.sum(axis=1)
        if k.exact:
            np.testing.assert_allclose(rows, 1.0, atol=1e-12)
        else:
            assert np.all(rows <= 1 + 1e-12)
        np.testing.assert_allclose(P, P[::-1, ::-1], atol=1e-12)
        if M == 0:
            offsets = np.subtract.outer(np.arange(N), np.arange(N))
            assert np.all(P[(offsets - k.tau) % 2 == 1] == 0)

    assert itf.variance(ss, ch, x) >= 0
    single = ChannelConfig(K=1, xi=xi, epsilon=eps, a=a)
    link = LinkConfig(x_p=x, x_t=x, q=q, P_N=P_N, channel=ch)
    p = out.outage(ss, link)
    for k in kernels:
        rho = itf.correlation(ss, k, ch, x)
        assert abs(rho) <= 1 + 1e-12
        assert rho == pytest.approx(itf.correlation(ss, k, single, x), abs=1e-10)
        assert rho == pytest.approx(itf.correlation(ss, k, ch, mirror), abs=1e-10)
        if k.exact:
            joint = out.joint_outage(ss, k, link)
            assert max(0.0, 2 * p - 1) - 1e-12 <= joint <= p + 1e-12


def test_criterion_9_fuzz_coverage():
    assert len(_seen) >= FUZZ_EXAMPLES, f"only {len(_seen)} distinct configurations"
