"""Interference moments and temporal correlation at a fixed receiver.

Receivers may sit anywhere (``x_p`` need not be a lattice point); every
function below accepts a scalar ``x_p`` or an array of receiver positions and
returns a matching shape. Interferers sit on lattice points only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateVarianceError, InvalidConfigError
from .mobility import DisplacementKernel, SteadyState


@dataclass(frozen=True)
class ChannelConfig:
    """User count, ALOHA probability, transmit power and pathloss ``1 / (eps + |x|^a)``.

    Fading is unit-mean Rayleigh (exponential power, ``E{h^2} = 2``).
    """

    K: int = 50
    xi: float = 1.0
    P_t: float = 1.0
    epsilon: float = 0.5
    a: float = 4.0

    def __post_init__(self):
        if self.K < 0 or int(self.K) != self.K:
            raise InvalidConfigError(f"user count K must be a non-negative integer, got {self.K}")
        if not 0.0 <= self.xi <= 1.0:
            raise InvalidConfigError(f"ALOHA probability must lie in [0, 1], got {self.xi}")
        if self.epsilon <= 0:
            raise InvalidConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.a <= 0:
            raise InvalidConfigError(f"pathloss exponent must be positive, got {self.a}")
        if self.P_t <= 0:
            raise InvalidConfigError(f"transmit power must be positive, got {self.P_t}")


def pathloss(x, epsilon: float = 0.5, a: float = 4.0):
    return 1.0 / (epsilon + np.abs(x) ** a)


def _gains(ss: SteadyState, ch: ChannelConfig, x_p):
    """Pathloss from every lattice point to every receiver, shape ``(R, N)``."""
    xp = np.atleast_1d(np.asarray(x_p, dtype=float))
    return pathloss(ss.positions[None, :] - xp[:, None], ch.epsilon, ch.a)


def _shape_like(values, x_p):
    return float(values[0]) if np.ndim(x_p) == 0 else values


def _moment_sums(ss, ch, x_p):
    g = _gains(ss, ch, x_p)
    return g, g @ ss.f, (g**2) @ ss.f


def lagged_sum(values: np.ndarray, ss: SteadyState, kernel: DisplacementKernel) -> np.ndarray:
    """``sum_n sum_k w(n) w(n+k) P(n+k, tau) f(n)`` for each row ``w`` of ``values``.

    Shared by the pathloss cross-correlation and its outage counterpart.
    """
    N = ss.n_points
    if kernel.n_points != N:
        raise InvalidConfigError(
            f"kernel lattice ({kernel.n_points} points) does not match steady state ({N} points)")
    values = np.atleast_2d(values)
    weighted = values * ss.f
    total = np.zeros(values.shape[0])
    for k in kernel.offsets():
        col = kernel.column(k)
        lo, hi = max(0, -k), min(N, N - k)
        if hi <= lo:
            continue
        c = col[lo:hi]
        if not c.any():
            continue
        total += (weighted[:, lo:hi] * values[:, lo + k:hi + k]) @ c
    return total


def mean_interference(ss: SteadyState, ch: ChannelConfig, x_p):
    _, s1, _ = _moment_sums(ss, ch, x_p)
    return _shape_like(ch.K * ch.xi * ch.P_t * s1, x_p)


def second_moment(ss: SteadyState, ch: ChannelConfig, x_p):
    _, s1, s2 = _moment_sums(ss, ch, x_p)
    mean = ch.K * ch.xi * ch.P_t * s1
    out = 2 * ch.K * ch.xi * ch.P_t**2 * s2
    if ch.K:
        out = out + (ch.K - 1) / ch.K * mean**2
    return _shape_like(out, x_p)


def variance(ss: SteadyState, ch: ChannelConfig, x_p):
    """``2 K xi S2 - K xi^2 S1^2`` (times ``P_t^2``), never negative."""
    _, s1, s2 = _moment_sums(ss, ch, x_p)
    out = ch.K * ch.xi * ch.P_t**2 * (2 * s2 - ch.xi * s1**2)
    return _shape_like(out, x_p)


def sigma_g(ss: SteadyState, kernel: DisplacementKernel, x_p, ch: ChannelConfig = None):
    """Lagged cross-correlation of the pathloss, ``E{g(x) g(x_tau)}``."""
    ch = ch or ChannelConfig()
    g = _gains(ss, ch, x_p)
    return _shape_like(lagged_sum(g, ss, kernel), x_p)


def cross_moment(ss: SteadyState, kernel: DisplacementKernel, ch: ChannelConfig, x_p):
    g, s1, _ = _moment_sums(ss, ch, x_p)
    sg = lagged_sum(g, ss, kernel)
    mean = ch.K * ch.xi * ch.P_t * s1
    out = ch.K * ch.xi**2 * ch.P_t**2 * sg
    if ch.K:
        out = out + (ch.K - 1) / ch.K * mean**2
    return _shape_like(out, x_p)


def correlation(ss: SteadyState, kernel: DisplacementKernel, ch: ChannelConfig, x_p):
    """Pearson correlation of interference at lag ``kernel.tau``.

    Evaluated as ``xi (sigma_g - S1^2) / (2 S2 - xi S1^2)``, which does not
    depend on ``K`` or ``P_t`` and avoids cancelling two ``O(K^2)`` terms.
    """
    if ch.xi == 0 or ch.K == 0:
        raise DegenerateVarianceError("interference is identically zero (xi = 0 or K = 0)")
    g, s1, s2 = _moment_sums(ss, ch, x_p)
    sg = lagged_sum(g, ss, kernel)
    rho = ch.xi * (sg - s1**2) / (2 * s2 - ch.xi * s1**2)
    return _shape_like(rho, x_p)


def correlation_from_moments(mean, second, cross):
    """Textbook Pearson form; kept to certify the reduced expression."""
    var = np.asarray(second) - np.asarray(mean) ** 2
    if np.any(var <= 0):
        raise DegenerateVarianceError("non-positive interference variance")
    return (np.asarray(cross) - np.asarray(mean) ** 2) / var


def rho_infinity(ch: ChannelConfig, x_p, N: int, poisson: bool = False):
    """Correlation coefficient of a static network with uniform occupancy.

    With ``poisson=True`` the ``-(1/K) E{I}^2`` corrections are dropped, which
    leaves ``xi / 2`` at every receiver.
    """
    if ch.xi == 0 or ch.K == 0:
        raise DegenerateVarianceError("interference is identically zero (xi = 0 or K = 0)")
    xp = np.atleast_1d(np.asarray(x_p, dtype=float))
    g = pathloss(np.arange(1, N + 1)[None, :] - xp[:, None], ch.epsilon, ch.a)
    K, xi = ch.K, ch.xi
    sum_g2 = (g**2).sum(axis=1)
    mean = K * xi * g.sum(axis=1) / N
    corr = 0.0 if poisson else mean**2 / K
    rho = (K * xi**2 / N * sum_g2 - corr) / (2 * K * xi / N * sum_g2 - corr)
    return _shape_like(rho, x_p)


class PPPVariants(NamedTuple):
    variance: object
    cross_moment: object
    rho: object


def ppp_variants(ss: SteadyState, kernel: DisplacementKernel, ch: ChannelConfig, x_p) -> PPPVariants:
    """Moments under the equi-dense Poisson approximation.

    The ``(1/K) E{I}^2`` term is dropped from both variance and cross-moment,
    so the correlation becomes ``xi sigma_g / (2 S2)``.
    """
    if ch.xi == 0 or ch.K == 0:
        raise DegenerateVarianceError("interference is identically zero (xi = 0 or K = 0)")
    g, s1, s2 = _moment_sums(ss, ch, x_p)
    sg = lagged_sum(g, ss, kernel)
    var = 2 * ch.K * ch.xi * ch.P_t**2 * s2
    cov = ch.K * ch.xi**2 * ch.P_t**2 * sg
    return PPPVariants(_shape_like(var, x_p), _shape_like(cov, x_p),
                       _shape_like(ch.xi * sg / (2 * s2), x_p))


@dataclass(frozen=True)
class InterferenceStats:
    mean: np.ndarray
    variance: np.ndarray
    cross_moment: np.ndarray
    rho: np.ndarray
    tau: int

    @property
    def std(self):
        return np.sqrt(self.variance)


def interference_stats(ss: SteadyState, kernel: DisplacementKernel, ch: ChannelConfig, x_p) -> InterferenceStats:
    return InterferenceStats(
        mean=mean_interference(ss, ch, x_p),
        variance=variance(ss, ch, x_p),
        cross_moment=cross_moment(ss, kernel, ch, x_p),
        rho=correlation(ss, kernel, ch, x_p),
        tau=kernel.tau,
    )
