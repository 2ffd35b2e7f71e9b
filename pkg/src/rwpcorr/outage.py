"""Outage of a fixed link in the field of mobile ALOHA interferers.

The desired transmitter at ``x_t`` is always on, is not one of the ``K``
interferers, and its link sees unit-mean Rayleigh fading. An outage occurs when
the SINR at ``x_p`` is at or below ``q``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import InvalidConfigError, ProbabilityRangeError, UndefinedOutageError
from .interference import ChannelConfig, lagged_sum, pathloss
from .mobility import PROB_TOL, DisplacementKernel, SteadyState, uniform_state

LOG_DOMAIN_K = 1000


@dataclass(frozen=True)
class LinkConfig:
    x_p: float
    x_t: float
    q: float = 1.0
    P_N: float = 1e-3
    channel: ChannelConfig = ChannelConfig()

    def __post_init__(self):
        if self.q <= 0:
            raise InvalidConfigError(f"SINR threshold q must be positive, got {self.q}")
        if self.P_N < 0:
            raise InvalidConfigError(f"noise power must be non-negative, got {self.P_N}")

    @property
    def link_gain(self) -> float:
        ch = self.channel
        return ch.P_t * float(pathloss(self.x_t - self.x_p, ch.epsilon, ch.a))

    @property
    def s(self) -> float:
        return self.q / self.link_gain

    @property
    def noise_term(self) -> float:
        """``q P_N / (P_t g(x_t - x_p))``."""
        return self.q * self.P_N / self.link_gain

    def at(self, x_p: float) -> "LinkConfig":
        """Same link moved so that the receiver sits at ``x_p`` (offset kept)."""
        return replace(self, x_p=x_p, x_t=x_p + (self.x_t - self.x_p))


def G_func(x, link: LinkConfig):
    """``1 / (1 + s P_t g(x - x_p))``: survival factor of one active interferer at ``x``."""
    ch = link.channel
    return 1.0 / (1.0 + link.s * ch.P_t * pathloss(np.asarray(x, dtype=float) - link.x_p, ch.epsilon, ch.a))


def _power(base: float, K: int) -> float:
    if K > LOG_DOMAIN_K:
        return float(np.exp(K * np.log(base))) if base > 0 else 0.0
    return float(base**K)


def laplace(ss: SteadyState, link: LinkConfig) -> float:
    """``E{exp(-s I)} = (1 - xi + xi sum_n G(n) f(n))^K``."""
    ch = link.channel
    mean_G = float(G_func(ss.positions, link) @ ss.f)
    return _power(1.0 - ch.xi + ch.xi * mean_G, ch.K)


def outage(ss: SteadyState, link: LinkConfig) -> float:
    return float(1.0 - np.exp(-link.noise_term) * laplace(ss, link))


def sigma_G(ss: SteadyState, kernel: DisplacementKernel, link: LinkConfig) -> float:
    """``E{G(x) G(x_tau)}`` under the displacement law."""
    return float(lagged_sum(G_func(ss.positions, link), ss, kernel)[0])


def _checked(value: float, what: str) -> float:
    if value < -PROB_TOL or value > 1.0 + PROB_TOL:
        raise ProbabilityRangeError(f"{what} = {value!r} leaves [0, 1]")
    return min(max(value, 0.0), 1.0)


def joint_laplace(ss: SteadyState, kernel: DisplacementKernel, link: LinkConfig) -> float:
    ch = link.channel
    xi = ch.xi
    mean_G = float(G_func(ss.positions, link) @ ss.f)
    base = (1 - xi) ** 2 + 2 * xi * (1 - xi) * mean_G + xi**2 * sigma_G(ss, kernel, link)
    return _power(base, ch.K)


def joint_outage(ss: SteadyState, kernel: DisplacementKernel, link: LinkConfig) -> float:
    """Probability of outage both now and ``kernel.tau`` slots later."""
    p = outage(ss, link)
    value = 1.0 - 2.0 * (1.0 - p) + np.exp(-2.0 * link.noise_term) * joint_laplace(ss, kernel, link)
    return _checked(float(value), "joint outage")


def joint_outage_tau1(ss: SteadyState, kernel: DisplacementKernel, link: LinkConfig) -> float:
    """One-slot joint outage written out with the stay/left/right probabilities."""
    if kernel.tau != 1:
        raise InvalidConfigError(f"expected a one-hop kernel, got lag {kernel.tau}")
    ch = link.channel
    xi = ch.xi
    G = G_func(ss.positions, link)
    Gpad = np.concatenate([[0.0], G, [0.0]])
    stay, right, left = kernel.column(0), kernel.column(1), kernel.column(-1)
    inner = G * stay + Gpad[2:] * right + Gpad[:-2] * left
    mean_G = float(G @ ss.f)
    base = (1 - xi) ** 2 + 2 * xi * (1 - xi) * mean_G + xi**2 * float((G * ss.f) @ inner)
    p = outage(ss, link)
    value = 2 * p - 1 + np.exp(-2 * link.noise_term) * _power(base, ch.K)
    return _checked(float(value), "joint outage")


def conditional_outage(ss: SteadyState, kernel: DisplacementKernel, link: LinkConfig) -> float:
    """``P(E_tau | E_0)``."""
    p = outage(ss, link)
    if p <= 0.0:
        raise UndefinedOutageError("unconditional outage is zero; conditional outage is undefined")
    joint = joint_outage(ss, kernel, link)
    if joint > p:
        if joint - p > PROB_TOL:
            raise ProbabilityRangeError(f"joint outage {joint!r} exceeds marginal {p!r}")
        joint = p
    return joint / p


class OutageResult(NamedTuple):
    unconditional: float
    joint: float
    conditional: float


def outage_result(ss: SteadyState, kernel: DisplacementKernel, link: LinkConfig) -> OutageResult:
    p = outage(ss, link)
    joint = joint_outage(ss, kernel, link)
    cond = conditional_outage(ss, kernel, link) if p > 0 else float("nan")
    return OutageResult(p, joint, cond)


class BoundCheck(NamedTuple):
    holds: bool
    margin: float


def appendix_bound_check(link: LinkConfig, N: int, tau: int = 1) -> BoundCheck:
    """Static uniform network: check ``P(E_tau, E) >= P(E)^2``.

    The static joint law does not depend on ``tau``. The margin is
    ``P(E_tau, E) - P(E)^2``; it is zero exactly when ``xi = 0``.
    """
    ss = uniform_state(N)
    static = DisplacementKernel.identity(N, max(1, int(tau)))
    p = outage(ss, link)
    margin = joint_outage(ss, static, link) - p**2
    return BoundCheck(margin >= -PROB_TOL, float(margin))
