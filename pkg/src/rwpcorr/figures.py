"""Plot-ready data for the evaluation figures, numbered 2 to 9.

Each builder returns a list of :class:`~rwpcorr.csvio.Table`. Analytic curves
come first; with ``with_mc`` a table of simulation markers follows in the
estimate schema ``quantity,x_p,tau,estimate,stderr,n_samples``.

Column schemas:

* 2: ``x_p,xi,mean,std,std_ppp``
* 3: ``x_p,rho_tau1,rho_tau2,rho_ppp_tau1,rho_ppp_tau2``
* 4: ``a,x_p,tau,rho,rho_ppp`` (plus ``rho_oracle`` with ``oracle``)
* 5: ``a,x_p,rho_M0,rho_static,rho_static_poisson``
* 6: ``x_p,rho_Nd1,rho_Nd2``
* 7: ``x_p,rho_Nd1,rho_Nd2,rho_Nd8,rho_Nd1000``
* 8: ``x_p,P_out,P_out_cond_tau1``
* 9: ``x_p,P_out_M0,P_out_cond_M0,P_out_static,P_out_cond_static``
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import chain, interference, mobility, outage, simulation
from .csvio import Table, estimate_rows, estimates_table
from .errors import InvalidConfigError
from .interference import ChannelConfig
from .mobility import LatticeConfig
from .outage import LinkConfig
from .simulation import SimConfig

FIGURE_IDS = tuple(range(2, 10))
XI_SET = (1.0, 0.5, 0.25)
RANDOM_SPEEDS = (0.5, 1, 1.5)
MC_DENSIFY = 8
FIG4_TAUS = tuple(range(1, 26))


@dataclass(frozen=True)
class FigureSettings:
    """Parameters shared by every figure; each figure overrides what it pins."""

    N: int = 50
    K: int = 50
    epsilon: float = 0.5
    with_mc: bool = False
    oracle: bool = False
    seed: int = 0
    warmup: int = 10_000
    samples: int = 20_000
    replications: int = 30

    def channel(self, a: float = 4.0, xi: float = 1.0) -> ChannelConfig:
        return ChannelConfig(K=self.K, xi=xi, epsilon=self.epsilon, a=a)

    def sim(self, lattice, channel, link=None, seed_offset=0, speed_set=None) -> SimConfig:
        return SimConfig(lattice, channel, link=link, warmup_slots=self.warmup,
                         sample_slots=self.samples, replications=self.replications,
                         seed=self.seed + seed_offset, speed_set=speed_set)

    @property
    def half(self) -> np.ndarray:
        """Receivers ``1..ceil(N/2)``; every curve is mirror-symmetric."""
        return np.arange(1, math.ceil(self.N / 2) + 1, dtype=float)


def figure(fig_id: int, settings: FigureSettings = FigureSettings()) -> list:
    try:
        builder = _BUILDERS[int(fig_id)]
    except (KeyError, ValueError):
        raise InvalidConfigError(f"unknown figure id {fig_id!r}; choose from {FIGURE_IDS}") from None
    return builder(settings)


def _mc_table(fig_id, rows):
    return estimates_table(rows, name=f"fig{fig_id}_mc")


def fig2(s: FigureSettings) -> list:
    lat = LatticeConfig(s.N, 5)
    ss = mobility.steady_state(lat)
    k1 = mobility.kernel_tau1(lat)
    xp = s.half
    rows, mc = [], []
    for i, xi in enumerate(XI_SET):
        ch = s.channel(4.0, xi)
        mean = interference.mean_interference(ss, ch, xp)
        std = np.sqrt(interference.variance(ss, ch, xp))
        std_ppp = np.sqrt(interference.ppp_variants(ss, k1, ch, xp).variance)
        rows += [[x, xi, m, sd, sp] for x, m, sd, sp in zip(xp, mean, std, std_ppp)]
        if s.with_mc:
            est = simulation.estimate_interference(s.sim(lat, ch, seed_offset=i), xp)
            mc += estimate_rows(f"mean_xi{xi:g}", xp, est.mean) + estimate_rows(f"std_xi{xi:g}", xp, est.std)
    out = [Table("fig2", ("x_p", "xi", "mean", "std", "std_ppp"), rows)]
    return out + ([_mc_table(2, mc)] if s.with_mc else [])


def fig3(s: FigureSettings) -> list:
    lat = LatticeConfig(s.N, 5)
    ss = mobility.steady_state(lat)
    ch = s.channel(4.0, 1.0)
    xp = s.half
    k1, k2 = mobility.kernel_tau1(lat), mobility.kernel_tau2(lat)
    cols = [interference.correlation(ss, k1, ch, xp), interference.correlation(ss, k2, ch, xp),
            interference.ppp_variants(ss, k1, ch, xp).rho, interference.ppp_variants(ss, k2, ch, xp).rho]
    out = [Table("fig3", ("x_p", "rho_tau1", "rho_tau2", "rho_ppp_tau1", "rho_ppp_tau2"),
                 [list(r) for r in zip(xp, *cols)])]
    if s.with_mc:
        est = simulation.estimate_interference(s.sim(lat, ch), xp, taus=(1, 2))
        out.append(_mc_table(3, estimate_rows("rho", xp, est.rho[1], 1) + estimate_rows("rho", xp, est.rho[2], 2)))
    return out


def fig4(s: FigureSettings) -> list:
    lat = LatticeConfig(s.N, 0)
    ss = mobility.steady_state(lat)
    xp = np.array([1.0, s.N / 2])
    oracle = chain.oracle_kernels(lat, FIG4_TAUS) if s.oracle else None
    rows, mc = [], []
    for a in (2.0, 4.0):
        ch = s.channel(a, 1.0)
        for tau in FIG4_TAUS:
            k = mobility.kernel_high_tau(lat, tau)
            rho = interference.correlation(ss, k, ch, xp)
            ppp = interference.ppp_variants(ss, k, ch, xp).rho
            extra = [interference.correlation(ss, oracle[tau], ch, xp)] if oracle else []
            rows += [[a, x, tau, *vals] for x, *vals in zip(xp, rho, ppp, *extra)]
        if s.with_mc:
            est = simulation.estimate_interference(s.sim(lat, ch, seed_offset=int(a)), xp, taus=FIG4_TAUS)
            for tau in FIG4_TAUS:
                mc += estimate_rows(f"rho_a{a:g}", xp, est.rho[tau], tau)
    cols = ("a", "x_p", "tau", "rho", "rho_ppp") + (("rho_oracle",) if oracle else ())
    return [Table("fig4", cols, rows)] + ([_mc_table(4, mc)] if s.with_mc else [])


def fig5(s: FigureSettings) -> list:
    lat = LatticeConfig(s.N, 0)
    ss = mobility.steady_state(lat)
    k1 = mobility.kernel_tau1(lat)
    xp = s.half
    rows, mc = [], []
    for a in (2.0, 4.0):
        ch = s.channel(a, 1.0)
        cols = [interference.correlation(ss, k1, ch, xp), interference.rho_infinity(ch, xp, s.N),
                interference.rho_infinity(ch, xp, s.N, poisson=True)]
        rows += [[a, *r] for r in zip(xp, *cols)]
        if s.with_mc:
            est = simulation.estimate_interference(s.sim(lat, ch, seed_offset=int(a)), xp)
            mc += estimate_rows(f"rho_M0_a{a:g}", xp, est.rho[1], 1)
    out = [Table("fig5", ("a", "x_p", "rho_M0", "rho_static", "rho_static_poisson"), rows)]
    return out + ([_mc_table(5, mc)] if s.with_mc else [])


def _densified_rho(N, M, N_d, ch, xp, tau=1):
    lat = LatticeConfig(N, M, N_d=N_d)
    return interference.correlation(mobility.steady_state(lat), mobility.kernel_for_speed(lat, tau), ch, xp)


def fig6(s: FigureSettings) -> list:
    ch = s.channel(4.0, 1.0)
    xp = s.half
    cols = [_densified_rho(s.N, 5, nd, ch, xp) for nd in (1, 2)]
    out = [Table("fig6", ("x_p", "rho_Nd1", "rho_Nd2"), [list(r) for r in zip(xp, *cols)])]
    if s.with_mc:
        lat = LatticeConfig(s.N, 5, N_d=MC_DENSIFY)
        fixed = simulation.estimate_interference(s.sim(lat, ch), xp)
        rand = simulation.estimate_interference(s.sim(lat, ch, seed_offset=1, speed_set=RANDOM_SPEEDS), xp)
        out.append(_mc_table(6, estimate_rows(f"rho_Nd{MC_DENSIFY}", xp, fixed.rho[1], 1)
                             + estimate_rows(f"rho_Nd{MC_DENSIFY}_random_speed", xp, rand.rho[1], 1)))
    return out


FIG7_DENSIFY = (1, 2, 8, 1000)


def fig7(s: FigureSettings) -> list:
    ch = s.channel(4.0, 1.0)
    xp = s.half
    cols = [_densified_rho(s.N, 0, nd, ch, xp) for nd in FIG7_DENSIFY]
    out = [Table("fig7", ("x_p",) + tuple(f"rho_Nd{nd}" for nd in FIG7_DENSIFY),
                 [list(r) for r in zip(xp, *cols)])]
    if s.with_mc:
        lat = LatticeConfig(s.N, 0, N_d=MC_DENSIFY)
        est = simulation.estimate_interference(s.sim(lat, ch), xp)
        out.append(_mc_table(7, estimate_rows(f"rho_Nd{MC_DENSIFY}", xp, est.rho[1], 1)))
    return out


def outage_link(s: FigureSettings, x_p: float = 1.0) -> LinkConfig:
    """Receiver co-located with its transmitter, ``q = 1``, ``P_N = 1e-3``, ``a = 2``."""
    return LinkConfig(x_p=x_p, x_t=x_p, q=1.0, P_N=1e-3, channel=s.channel(2.0, 1.0))


def _outage_curves(ss, kernel, link, xp):
    res = [outage.outage_result(ss, kernel, link.at(float(x))) for x in xp]
    return [r.unconditional for r in res], [r.conditional for r in res]


def fig8(s: FigureSettings) -> list:
    lat = LatticeConfig(s.N, 5)
    link = outage_link(s)
    xp = s.half
    p, c = _outage_curves(mobility.steady_state(lat), mobility.kernel_tau1(lat), link, xp)
    out = [Table("fig8", ("x_p", "P_out", "P_out_cond_tau1"), [list(r) for r in zip(xp, p, c)])]
    if s.with_mc:
        est = simulation.estimate_outage(s.sim(lat, link.channel, link=link), taus=(1,), x_p=xp)
        out.append(_mc_table(8, estimate_rows("P_out", xp, est.outage)
                             + estimate_rows("P_out_cond", xp, est.conditional[1], 1)))
    return out


def fig9(s: FigureSettings) -> list:
    lat = LatticeConfig(s.N, 0)
    link = outage_link(s)
    xp = s.half
    p0, c0 = _outage_curves(mobility.steady_state(lat), mobility.kernel_tau1(lat), link, xp)
    pi, ci = _outage_curves(mobility.uniform_state(s.N), mobility.DisplacementKernel.identity(s.N), link, xp)
    out = [Table("fig9", ("x_p", "P_out_M0", "P_out_cond_M0", "P_out_static", "P_out_cond_static"),
                 [list(r) for r in zip(xp, p0, c0, pi, ci)])]
    if s.with_mc:
        est = simulation.estimate_outage(s.sim(lat, link.channel, link=link), taus=(1,), x_p=xp)
        out.append(_mc_table(9, estimate_rows("P_out_M0", xp, est.outage)
                             + estimate_rows("P_out_cond_M0", xp, est.conditional[1], 1)))
    return out


_BUILDERS = {2: fig2, 3: fig3, 4: fig4, 5: fig5, 6: fig6, 7: fig7, 8: fig8, 9: fig9}
