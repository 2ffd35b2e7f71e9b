"""Seeded Monte Carlo simulation of mobile ALOHA interferers on the lattice.

Time is kept in integer ticks so that every speed in use advances a whole
number of (densified) lattice points per hop. A user's trajectory is a chain
of legs: depart from ``s`` at tick ``t0``, step one point every ``h`` ticks
until ``d`` is reached after ``|d - s|`` hops, think for ``m`` ticks, depart
again. With a single speed the tick is the hop, the pause is drawn from
``{0..M/dt}`` hops, and the process is exactly the chain in
:mod:`rwpcorr.chain`.

Random streams are keyed by ``(seed, replication, purpose, user)`` so that
mobility, ALOHA and fading draws are independent and reproducible in
isolation. Standard errors are computed across replications, never across
slots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateVarianceError, InvalidConfigError, UndefinedOutageError
from .interference import ChannelConfig, pathloss
from .mobility import DisplacementKernel, LatticeConfig, lattice_coordinates
from .outage import LinkConfig

MOBILITY, ALOHA, FADING, LINK = 0, 1, 2, 3


@dataclass(frozen=True)
class SimConfig:
    lattice: LatticeConfig
    channel: ChannelConfig = ChannelConfig()
    link: Optional[LinkConfig] = None
    warmup_slots: int = 10_000
    sample_slots: int = 20_000
    replications: int = 30
    seed: int = 0
    speed_set: Optional[tuple] = None

    def __post_init__(self):
        if self.warmup_slots < 0 or self.sample_slots < 1 or self.replications < 1:
            raise InvalidConfigError("need warmup >= 0, sample_slots >= 1, replications >= 1")
        if self.link is not None and self.link.channel != self.channel:
            raise InvalidConfigError("link and simulation must share one channel configuration")
        if self.speed_set is not None:
            speeds = tuple(Fraction(v) for v in self.speed_set)
            if not speeds or any(v <= 0 for v in speeds):
                raise InvalidConfigError(f"speeds must be positive, got {self.speed_set}")
            if any((v * self.lattice.N_d).denominator != 1 for v in speeds):
                raise InvalidConfigError(
                    f"every speed must cover a whole number of lattice steps per slot "
                    f"(speeds {[str(v) for v in speeds]}, N_d={self.lattice.N_d})")
            object.__setattr__(self, "speed_set", speeds)
        self.timing()

    @property
    def speeds(self) -> tuple:
        return self.speed_set if self.speed_set else (self.lattice.v,)

    def timing(self):
        """``(ticks per slot, hop duration in ticks for each speed)``."""
        rates = [v * self.lattice.N_d for v in self.speeds]
        # ticks per slot must make 1/rate an integer number of ticks
        ticks = 1
        for r in rates:
            ticks = ticks * r.numerator // math.gcd(ticks, r.numerator)
        hops = tuple(int(ticks / r) for r in rates)
        return ticks, hops


@dataclass(frozen=True)
class SimEstimate:
    estimate: float
    stderr: float
    n_samples: int

    def z(self, value: float) -> float:
        """Deviation of ``value`` from the estimate in standard errors."""
        if self.stderr == 0:
            return 0.0 if value == self.estimate else math.inf
        return (value - self.estimate) / self.stderr


def _aggregate(per_rep: np.ndarray, n_samples: int) -> SimEstimate:
    per_rep = np.asarray(per_rep, dtype=float)
    R = len(per_rep)
    se = float(per_rep.std(ddof=1) / math.sqrt(R)) if R > 1 else math.nan
    return SimEstimate(float(per_rep.mean()), se, int(n_samples))


def _rng(cfg: SimConfig, rep: int, purpose: int, user: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(rep, purpose, user)))


def user_trajectory(rng: np.random.Generator, n_points: int, sample_ticks: np.ndarray,
                    hop_ticks: Sequence[int], max_pause_ticks: int) -> np.ndarray:
    """Lattice index (1-based) of one user at each of the sorted ``sample_ticks``."""
    horizon = int(sample_ticks[-1])
    hop_ticks = np.asarray(hop_ticks)
    start = int(rng.integers(1, n_points + 1))
    mean_leg = (n_points + 1) / 3 * hop_ticks.mean() + max_pause_ticks / 2
    batch = max(64, int(1.2 * horizon / mean_leg) + 64)
    src, dst, hop, depart = [], [], [], []
    t = 0
    cur = start
    while t <= horizon:
        # destination uniform over the other points: shift by 1..N-1 modulo N
        step = 1 + rng.integers(0, n_points - 1, batch)
        d = (cur - 1 + np.cumsum(step)) % n_points + 1
        s = np.concatenate([[cur], d[:-1]])
        h = hop_ticks[rng.integers(0, len(hop_ticks), batch)] if len(hop_ticks) > 1 \
            else np.full(batch, hop_ticks[0])
        m = rng.integers(0, max_pause_ticks + 1, batch)
        dur = np.abs(d - s) * h + m
        t0 = t + np.concatenate([[0], np.cumsum(dur)[:-1]])
        src.append(s), dst.append(d), hop.append(h), depart.append(t0)
        t = int(t0[-1] + dur[-1])
        cur = int(d[-1])
    s, d, h, t0 = (np.concatenate(a) for a in (src, dst, hop, depart))
    leg = np.searchsorted(t0, sample_ticks, side="right") - 1
    length = np.abs(d[leg] - s[leg])
    moved = np.minimum((sample_ticks - t0[leg]) // h[leg], length)
    return s[leg] + np.sign(d[leg] - s[leg]) * moved


class SimulationRun:
    """Lazy, deterministic access to per-replication user trajectories."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.ticks_per_slot, self.hop_ticks = cfg.timing()
        self.max_pause_ticks = cfg.lattice.M * self.ticks_per_slot
        self.coordinates = lattice_coordinates(cfg.lattice)

    def positions(self, rep: int) -> np.ndarray:
        """Lattice indices, shape ``(sample_slots, K)``, 1-based."""
        cfg = self.cfg
        slots = cfg.warmup_slots + np.arange(cfg.sample_slots)
        ticks = slots * self.ticks_per_slot
        out = np.empty((cfg.sample_slots, cfg.channel.K), dtype=np.int64)
        for u in range(cfg.channel.K):
            out[:, u] = user_trajectory(_rng(cfg, rep, MOBILITY, u), cfg.lattice.n_points,
                                        ticks, self.hop_ticks, self.max_pause_ticks)
        return out

    def activity(self, rep: int) -> np.ndarray:
        """ALOHA indicator times fading power, shape ``(sample_slots, K)``."""
        cfg = self.cfg
        S, K = cfg.sample_slots, cfg.channel.K
        out = np.empty((S, K))
        for u in range(K):
            on = _rng(cfg, rep, ALOHA, u).random(S) < cfg.channel.xi
            out[:, u] = on * _rng(cfg, rep, FADING, u).exponential(1.0, S)
        return out

    def interference(self, rep: int, x_p) -> np.ndarray:
        """Interference samples, shape ``(sample_slots, len(x_p))``."""
        ch = self.cfg.channel
        xp = np.atleast_1d(np.asarray(x_p, dtype=float))
        pos = self.coordinates[self.positions(rep) - 1]
        act = self.activity(rep)
        out = np.empty((self.cfg.sample_slots, len(xp)))
        for j, x in enumerate(xp):
            out[:, j] = ch.P_t * (act * pathloss(pos - x, ch.epsilon, ch.a)).sum(axis=1)
        return out


def run(cfg: SimConfig) -> SimulationRun:
    return SimulationRun(cfg)


@dataclass(frozen=True)
class KernelEstimate:
    probs: np.ndarray
    stderr: np.ndarray
    counts: np.ndarray
    undersampled: np.ndarray
    span: int  # largest offset tabulated, in lattice steps
    lag: int  # slots

    def as_kernel(self) -> DisplacementKernel:
        return DisplacementKernel(self.span, self.probs.shape[0], True, probs=self.probs)


def estimate_kernel(cfg: SimConfig, tau: int, min_count: int = 100) -> KernelEstimate:
    """Empirical displacement law at a lag of ``tau`` slots, on lattice indices.

    Cells observed fewer than ``min_count`` times, including never, are flagged in
    ``undersampled``; their standard errors are not trustworthy.
    """
    sim = run(cfg)
    N = cfg.lattice.n_points
    hop_lag = Fraction(tau) * cfg.lattice.hops_per_slot
    span = int(math.ceil(hop_lag)) if cfg.speed_set is None else N
    span = min(span, N - 1)
    width = 2 * span + 1
    per_rep = []
    total = np.zeros((N, width))
    for r in range(cfg.replications):
        pos = sim.positions(r)
        a, b = pos[:-tau].ravel() - 1, pos[tau:].ravel() - 1
        counts = np.zeros((N, width))
        np.add.at(counts, (a, b - a + span), 1.0)
        total += counts
        rows = counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            per_rep.append(np.where(rows > 0, counts / np.where(rows > 0, rows, 1), np.nan))
    per_rep = np.array(per_rep)
    rows = total.sum(axis=1, keepdims=True)
    probs = total / np.where(rows > 0, rows, 1)
    with np.errstate(invalid="ignore"):
        se = np.nanstd(per_rep, axis=0, ddof=1) / np.sqrt(np.sum(~np.isnan(per_rep), axis=0))
    se = np.nan_to_num(se)
    undersampled = (total < min_count) | (rows < min_count)
    return KernelEstimate(probs, se, total, undersampled, span, tau)


@dataclass(frozen=True)
class InterferenceEstimates:
    x_p: np.ndarray
    mean: list
    std: list
    rho: dict  # tau -> list[SimEstimate]
    cross_g: dict  # tau -> list[SimEstimate] of E{g(x) g(x_tau)}


def _autocorr(x: np.ndarray, tau: int) -> np.ndarray:
    xc = x - x.mean(axis=0)
    var = (xc**2).mean(axis=0)
    if np.any(var == 0):
        raise DegenerateVarianceError("simulated interference has zero variance")
    return (xc[:-tau] * xc[tau:]).mean(axis=0) / var


def estimate_interference(cfg: SimConfig, x_p, taus: Sequence[int] = (1,)) -> InterferenceEstimates:
    """Mean, standard deviation and lagged correlation of simulated interference."""
    sim = run(cfg)
    ch = cfg.channel
    xp = np.atleast_1d(np.asarray(x_p, dtype=float))
    means, stds = [], []
    rhos = {t: [] for t in taus}
    crosses = {t: [] for t in taus}
    for r in range(cfg.replications):
        pos = sim.coordinates[sim.positions(r) - 1]
        act = sim.activity(r)
        I = np.empty((cfg.sample_slots, len(xp)))
        cg = {t: np.empty(len(xp)) for t in taus}
        for j, x in enumerate(xp):
            g = pathloss(pos - x, ch.epsilon, ch.a)
            I[:, j] = ch.P_t * (act * g).sum(axis=1)
            for t in taus:
                cg[t][j] = (g[:-t] * g[t:]).mean()
        means.append(I.mean(axis=0))
        stds.append(I.std(axis=0))
        if ch.xi > 0:
            for t in taus:
                rhos[t].append(_autocorr(I, t))
        for t in taus:
            crosses[t].append(cg[t])
    n = cfg.replications * cfg.sample_slots
    means, stds = np.array(means), np.array(stds)
    out_mean = [_aggregate(means[:, j], n) for j in range(len(xp))]
    out_std = [_aggregate(stds[:, j], n) for j in range(len(xp))]
    out_rho = {}
    for t in taus:
        if rhos[t]:
            arr = np.array(rhos[t])
            out_rho[t] = [_aggregate(arr[:, j], n) for j in range(len(xp))]
    out_cross = {t: [_aggregate(np.array(crosses[t])[:, j], n * ch.K) for j in range(len(xp))]
                 for t in taus}
    return InterferenceEstimates(xp, out_mean, out_std, out_rho, out_cross)


@dataclass(frozen=True)
class OutageEstimates:
    x_p: np.ndarray
    outage: list
    conditional: dict  # tau -> list[SimEstimate]
    laplace: list = field(default_factory=list)


def estimate_outage(cfg: SimConfig, taus: Sequence[int] = (1,), x_p=None) -> OutageEstimates:
    """Unconditional and conditional outage of ``cfg.link`` from simulation.

    ``x_p`` optionally sweeps the receiver; the transmitter keeps its offset
    ``x_t - x_p``. The desired link draws fresh Rayleigh fading every slot.
    """
    if cfg.link is None:
        raise InvalidConfigError("outage simulation needs a link configuration")
    sim = run(cfg)
    ch = cfg.channel
    links = [cfg.link] if x_p is None else [cfg.link.at(float(x)) for x in np.atleast_1d(x_p)]
    out, cond, lap = [], {t: [] for t in taus}, []
    for r in range(cfg.replications):
        pos = sim.coordinates[sim.positions(r) - 1]
        act = sim.activity(r)
        h_tx = _rng(cfg, r, LINK).exponential(1.0, cfg.sample_slots)
        rep_out, rep_lap, rep_cond = [], [], {t: [] for t in taus}
        for link in links:
            I = ch.P_t * (act * pathloss(pos - link.x_p, ch.epsilon, ch.a)).sum(axis=1)
            sinr = link.link_gain * h_tx / (link.P_N + I)
            E = sinr <= link.q
            rep_out.append(E.mean())
            rep_lap.append(np.exp(-link.s * I).mean())
            for t in taus:
                base = E[:-t].sum()
                if base == 0:
                    raise UndefinedOutageError(
                        f"no outage observed at x_p={link.x_p} in replication {r}")
                rep_cond[t].append((E[:-t] & E[t:]).sum() / base)
        out.append(rep_out)
        lap.append(rep_lap)
        for t in taus:
            cond[t].append(rep_cond[t])
    n = cfg.replications * cfg.sample_slots
    out, lap = np.array(out), np.array(lap)
    xs = np.array([l.x_p for l in links])
    return OutageEstimates(
        xs,
        [_aggregate(out[:, j], n) for j in range(len(links))],
        {t: [_aggregate(np.array(cond[t])[:, j], n) for j in range(len(links))] for t in taus},
        [_aggregate(lap[:, j], n) for j in range(len(links))],
    )


def empirical_occupancy(cfg: SimConfig) -> list:
    """Per-point occupancy frequencies with replication-level standard errors."""
    sim = run(cfg)
    N = cfg.lattice.n_points
    freq = []
    for r in range(cfg.replications):
        pos = sim.positions(r)
        freq.append(np.bincount(pos.ravel() - 1, minlength=N) / pos.size)
    freq = np.array(freq)
    n = cfg.replications * cfg.sample_slots * cfg.channel.K
    return [_aggregate(freq[:, j], n) for j in range(N)]
