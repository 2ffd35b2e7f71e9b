"""Self-check suite: closed forms, oracle agreement, invariants and MC agreement.

Kernels are looked up through the :mod:`rwpcorr.mobility` module at call time,
so a substituted (for instance deliberately corrupted) kernel is what gets
validated.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from . import chain, interference, mobility, outage, simulation
from .interference import ChannelConfig
from .mobility import LatticeConfig
from .outage import LinkConfig
from .simulation import SimConfig

ORACLE_TOL = 1e-9
EXACT_TOL = 1e-12
MC_SIGMAS = 3.0


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass(frozen=True)
class ValidationSettings:
    N: int = 50
    M: int = 5
    K: int = 50
    a: float = 4.0
    xi: float = 1.0
    epsilon: float = 0.5
    seed: int = 0
    warmup: int = 10_000
    samples: int = 20_000
    replications: int = 30
    quick: bool = False

    def effective(self) -> "ValidationSettings":
        """Quick mode shrinks the lattice and the simulation budget."""
        if not self.quick:
            return self
        return ValidationSettings(N=min(self.N, 10), M=min(self.M, 2), K=min(self.K, 10), a=self.a,
                                  xi=self.xi, epsilon=self.epsilon, seed=self.seed,
                                  warmup=min(self.warmup, 2_000), samples=min(self.samples, 5_000),
                                  replications=min(self.replications, 10), quick=True)

    @property
    def lattice(self) -> LatticeConfig:
        return LatticeConfig(self.N, self.M)

    @property
    def channel(self) -> ChannelConfig:
        return ChannelConfig(K=self.K, xi=self.xi, epsilon=self.epsilon, a=self.a)

    def oracle_grid(self):
        n_max, m_max = (8, 3) if self.quick else (20, 5)
        return [LatticeConfig(N, M) for N in range(2, n_max + 1) for M in range(m_max + 1)]

    def sim(self, link=None) -> SimConfig:
        return SimConfig(self.lattice, link.channel if link else self.channel, link=link,
                         warmup_slots=self.warmup, sample_slots=self.samples,
                         replications=self.replications, seed=self.seed)


def _timed(name: str, fn: Callable[[], tuple]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashing check is a failing check
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def _worst(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values))) if values.size else 0.0


def check_closed_forms(s: ValidationSettings):
    errs = []
    for N in range(2, 51):
        errs.append(float(mobility.mean_travel_length(LatticeConfig(N)) - Fraction(N + 1, 3)))
        errs.append(mobility.steady_state(LatticeConfig(N)).f[0] - 3 / (N * (N + 1)))
    for M in range(11):
        errs.append(mobility.kernel_tau1(LatticeConfig(s.N, M)).prob(1, 0) - M / (M + 2))
    for xi in np.linspace(0.1, 1.0, 10):
        ch = ChannelConfig(K=s.K, xi=float(xi), epsilon=s.epsilon, a=s.a)
        errs.append(_worst(interference.rho_infinity(ch, np.arange(1, s.N + 1), s.N, poisson=True) - xi / 2))
    worst = _worst(errs)
    return worst <= EXACT_TOL, f"max error {worst:.2e}"


def check_oracle(s: ValidationSettings):
    worst = {"f": 0.0, "tau1": 0.0, "tau2": 0.0}
    for cfg in s.oracle_grid():
        ch = chain.build_chain(cfg)
        law = chain.stationary(ch)
        exact = chain.displacement_series(ch, law, [1, 2])
        worst["f"] = max(worst["f"], _worst(mobility.steady_state(cfg).f - law.marginal(ch)))
        worst["tau1"] = max(worst["tau1"], _worst(mobility.kernel_tau1(cfg).to_matrix() - exact[1].to_matrix()))
        worst["tau2"] = max(worst["tau2"], _worst(mobility.kernel_tau2(cfg).to_matrix() - exact[2].to_matrix()))
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    return max(worst.values()) <= ORACLE_TOL, f"max deviation {detail}"


def check_high_tau(s: ValidationSettings):
    # the approximation targets the evaluation lattice; tiny lattices are not its regime
    N = max(s.N, 50)
    cfg = LatticeConfig(N, 0)
    taus = range(1, 11)
    exact = chain.oracle_kernels(cfg, taus)
    ss = mobility.steady_state(cfg)
    excess, rho_err = 0.0, 0.0
    xp = np.arange(1, N + 1)
    for tau in taus:
        approx = mobility.kernel_high_tau(cfg, tau)
        excess = max(excess, float((approx.to_matrix() - exact[tau].to_matrix()).max()))
        rho_err = max(rho_err, _worst(interference.correlation(ss, approx, s.channel, xp)
                                      - interference.correlation(ss, exact[tau], s.channel, xp)))
    return excess <= ORACLE_TOL and rho_err <= 0.05, \
        f"largest overshoot {excess:.2e}, largest rho error {rho_err:.4f}"


def _kernels_under_test(s: ValidationSettings):
    cfg = s.lattice
    out = [mobility.kernel_tau1(cfg), mobility.kernel_tau2(cfg)]
    m0 = LatticeConfig(s.N, 0)
    out += [mobility.kernel_high_tau(m0, tau) for tau in (3, 6)]
    return out


def check_kernel_invariants(s: ValidationSettings):
    problems = []
    for k in _kernels_under_test(s):
        P = k.to_matrix()
        if P.min() < -EXACT_TOL or P.max() > 1 + EXACT_TOL:
            problems.append(f"{k!r}: entries outside [0, 1]")
        if k.exact and _worst(P.sum(axis=1) - 1) > EXACT_TOL:
            problems.append(f"{k!r}: row sums off by {_worst(P.sum(axis=1) - 1):.2e}")
        if not k.exact and P.sum(axis=1).max() > 1 + EXACT_TOL:
            problems.append(f"{k!r}: row sums exceed one")
        if _worst(P - P[::-1, ::-1]) > EXACT_TOL:
            problems.append(f"{k!r}: not mirror symmetric")
    k2 = mobility.kernel_tau2(LatticeConfig(s.N, 0)).to_matrix()
    odd = np.add.outer(np.arange(s.N), np.arange(s.N)) % 2 == 1
    if np.abs(k2[odd]).max() > 0:
        problems.append("tau=2, M=0: mass on odd displacements")
    return not problems, "; ".join(problems) or "row sums, range, mirror symmetry and parity hold"


def check_correlation_invariants(s: ValidationSettings):
    cfg = s.lattice
    ss = mobility.steady_state(cfg)
    xp = np.linspace(0.5, s.N + 0.5, 4 * s.N + 1)
    problems = []
    for k in (mobility.kernel_tau1(cfg), mobility.kernel_tau2(cfg)):
        rho = interference.correlation(ss, k, s.channel, xp)
        if np.abs(rho).max() > 1 + EXACT_TOL:
            problems.append(f"|rho| exceeds one at lag {k.tau}")
        other = ChannelConfig(K=3 * s.K + 1, xi=s.xi, epsilon=s.epsilon, a=s.a)
        if _worst(rho - interference.correlation(ss, k, other, xp)) > EXACT_TOL:
            problems.append("rho depends on K")
        if _worst(rho - interference.correlation(ss, k, s.channel, s.N + 1 - xp)) > 1e-10:
            problems.append("rho is not mirror symmetric")
    if np.min(interference.variance(ss, s.channel, xp)) < 0:
        problems.append("negative variance")
    return not problems, "; ".join(problems) or "|rho| <= 1, K-invariance, symmetry, variance >= 0"


def check_outage_invariants(s: ValidationSettings):
    cfg = s.lattice
    ss = mobility.steady_state(cfg)
    k1 = mobility.kernel_tau1(cfg)
    ch = s.channel
    problems = []
    for q, x_p in itertools.product((0.5, 1.0, 2.0), (1.0, s.N / 4, s.N / 2)):
        link = LinkConfig(x_p, x_p + 0.5, q=q, P_N=1e-3, channel=ch)
        p = outage.outage(ss, link)
        joint = outage.joint_outage(ss, k1, link)
        if not (max(0.0, 2 * p - 1) - EXACT_TOL <= joint <= p + EXACT_TOL):
            problems.append(f"Frechet bounds fail at q={q}, x_p={x_p}")
        if abs(joint - outage.joint_outage_tau1(ss, k1, link)) > EXACT_TOL:
            problems.append(f"expanded one-slot form differs at q={q}, x_p={x_p}")
        b = outage.appendix_bound_check(link, s.N)
        if not b.holds:
            problems.append(f"static bound fails at q={q}, x_p={x_p} (margin {b.margin:.2e})")
    return not problems, "; ".join(problems) or "Frechet bounds, one-slot identity and static bound hold"


def _z_report(pairs) -> tuple:
    worst = max(abs(e.z(v)) for e, v in pairs)
    return worst <= MC_SIGMAS, f"largest deviation {worst:.2f} standard errors"


def _mc_receivers(s):
    return np.array([1.0, max(1.0, s.N // 4), s.N // 2 or 1])


def check_mc_occupancy(s: ValidationSettings):
    est = simulation.empirical_occupancy(s.sim())
    return _z_report(zip(est, mobility.steady_state(s.lattice).f))


def check_mc_interference(s: ValidationSettings):
    cfg = s.lattice
    ss = mobility.steady_state(cfg)
    xp = _mc_receivers(s)
    est = simulation.estimate_interference(s.sim(), xp, taus=(1, 2))
    pairs = list(zip(est.mean, interference.mean_interference(ss, s.channel, xp)))
    pairs += zip(est.rho[1], interference.correlation(ss, mobility.kernel_tau1(cfg), s.channel, xp))
    pairs += zip(est.rho[2], interference.correlation(ss, mobility.kernel_tau2(cfg), s.channel, xp))
    return _z_report(pairs)


def check_mc_outage(s: ValidationSettings):
    cfg = s.lattice
    ss = mobility.steady_state(cfg)
    k1 = mobility.kernel_tau1(cfg)
    xp = _mc_receivers(s)
    link = LinkConfig(xp[0], xp[0], q=1.0, P_N=1e-3,
                      channel=ChannelConfig(K=s.K, xi=s.xi, epsilon=s.epsilon, a=2.0))
    est = simulation.estimate_outage(s.sim(link=link), taus=(1,), x_p=xp)
    pairs = list(zip(est.outage, [outage.outage(ss, link.at(x)) for x in xp]))
    pairs += zip(est.conditional[1], [outage.conditional_outage(ss, k1, link.at(x)) for x in xp])
    return _z_report(pairs)


CHECKS = (
    ("closed forms", check_closed_forms),
    ("chain oracle", check_oracle),
    ("long-lag approximation", check_high_tau),
    ("kernel invariants", check_kernel_invariants),
    ("correlation invariants", check_correlation_invariants),
    ("outage invariants", check_outage_invariants),
    ("simulated occupancy", check_mc_occupancy),
    ("simulated interference", check_mc_interference),
    ("simulated outage", check_mc_outage),
)


def validate(settings: ValidationSettings = ValidationSettings()) -> list:
    s = settings.effective()
    return [_timed(name, lambda fn=fn: fn(s)) for name, fn in CHECKS]


def report(results) -> str:
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name:<24} {r.seconds:7.2f}s  {r.detail}" for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines)
