"""Closed-form steady state and displacement law of discrete random waypoint mobility.

Users live on the lattice ``1..N``. Each travel picks a destination uniformly
among the other ``N - 1`` points, moves one point per hop (the arrival hop
counts at the destination) and then pauses for ``m ~ U{0..M}`` hops.

Displacement kernels are stored as ``probs[n - 1, k + tau] = P(n + k, tau)``,
the probability that a stationary user observed at ``n`` sits at ``n + k``
``tau`` hops later.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import InvalidConfigError, ProbabilityRangeError, UnsupportedConfigurationError

log = logging.getLogger(__name__)

#: round-off allowance for probabilities computed by cancellation
PROB_TOL = 1e-12


@dataclass(frozen=True)
class LatticeConfig:
    """Mobility universe: lattice size, think time, speed and densification.

    ``N`` counts the original lattice points, ``M`` is the maximum think time
    in slots, ``v`` the speed in original lattice points per slot and ``N_d``
    the densification factor. ``v`` is stored as a :class:`~fractions.Fraction`.
    """

    N: int
    M: int = 0
    v: Fraction = Fraction(1)
    N_d: int = 1

    def __post_init__(self):
        try:
            v = Fraction(self.v)
        except (TypeError, ValueError) as exc:
            raise InvalidConfigError(f"speed must be rational, got {self.v!r}") from exc
        object.__setattr__(self, "v", v)
        if int(self.N) != self.N or self.N < 2:
            raise InvalidConfigError(f"lattice size N must be an integer >= 2, got {self.N}")
        if int(self.M) != self.M or self.M < 0:
            raise InvalidConfigError(f"think time M must be an integer >= 0, got {self.M}")
        if int(self.N_d) != self.N_d or self.N_d < 1:
            raise InvalidConfigError(f"densification N_d must be an integer >= 1, got {self.N_d}")
        if v <= 0:
            raise InvalidConfigError(f"speed v must be positive, got {v}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N_d", int(self.N_d))

    @property
    def n_points(self) -> int:
        """Number of points on the (possibly densified) lattice."""
        return self.N_d * self.N

    @property
    def ds(self) -> Fraction:
        return Fraction(1, self.N_d)

    @property
    def dt(self) -> Fraction:
        """Slots needed for one hop between adjacent densified points."""
        return self.ds / self.v

    @property
    def hops_per_slot(self) -> Fraction:
        return self.v * self.N_d

    @property
    def think_hops(self) -> Fraction:
        """Maximum think time expressed in hop durations (``M / dt``)."""
        return self.M / self.dt

    def unit_speed(self) -> "LatticeConfig":
        """Equivalent unit-speed, undensified configuration measured in hops."""
        m_hops = self.think_hops
        if m_hops.denominator != 1:
            raise UnsupportedConfigurationError(
                f"think time M/dt = {m_hops} is not a whole number of hops")
        return LatticeConfig(N=self.n_points, M=int(m_hops))


def lattice_coordinates(cfg: LatticeConfig) -> np.ndarray:
    """Physical coordinates of the lattice points.

    Original point ``n`` sits at ``x = n``. With densification each original
    point is replaced by ``N_d`` points at spacing ``1/N_d`` centred on it, so
    the layout stays mirror-symmetric about ``(N + 1) / 2``.
    """
    j = np.arange(1, cfg.n_points + 1, dtype=float)
    return 0.5 + (j - 0.5) / cfg.N_d


def mean_travel_length(cfg: LatticeConfig) -> Fraction:
    """Mean duration of a travel in slots, exact.

    ``(N + 1) / 3`` for unit speed; in general ``(N_d N + 1) / (3 v N_d)``.
    """
    return Fraction(cfg.n_points + 1, 3) / cfg.hops_per_slot


def static_fraction(cfg: LatticeConfig) -> float:
    """Probability that a stationary user is thinking in a given slot."""
    if cfg.M == 0:
        return 0.0
    half_m = Fraction(cfg.M, 2)
    return float(half_m / (half_m + mean_travel_length(cfg)))


def mobile_cdf(n, N: int):
    """CDF of the location of a travelling user, ``(3Nn - 2n^2 - 1) n / (N (N^2 - 1))``."""
    n = np.asarray(n, dtype=float)
    return (3.0 * N * n - 2.0 * n**2 - 1.0) * n / (N * (N**2 - 1.0))


@dataclass(frozen=True)
class SteadyState:
    """Occupancy law ``f`` (index ``n - 1``), static fraction ``p`` and point coordinates."""

    f: np.ndarray
    p: float
    positions: np.ndarray = field(repr=False)

    @property
    def n_points(self) -> int:
        return len(self.f)

    def cdf(self) -> np.ndarray:
        N = self.n_points
        n = np.arange(1, N + 1)
        return self.p * n / N + (1.0 - self.p) * mobile_cdf(n, N)


def steady_state(cfg: LatticeConfig) -> SteadyState:
    p = static_fraction(cfg)
    N = cfg.n_points
    n = np.arange(1, N + 1, dtype=float)
    mobile = (3.0 * N * (2 * n - 1) - 6.0 * n * (n - 1) - 3.0) / (N * (N**2 - 1.0))
    f = p / N + (1.0 - p) * mobile
    return SteadyState(f=f, p=p, positions=lattice_coordinates(cfg))


def uniform_state(n_points: int, positions: Optional[np.ndarray] = None) -> SteadyState:
    """The static, infinite-think-time limit: uniform occupancy."""
    if positions is None:
        positions = np.arange(1, n_points + 1, dtype=float)
    return SteadyState(f=np.full(n_points, 1.0 / n_points), p=1.0, positions=positions)


class DisplacementKernel:
    """Displacement probabilities ``P(n + k, tau)`` for ``k`` in ``[-tau, tau]``.

    Either a dense ``probs`` array of shape ``(n_points, 2 tau + 1)`` or a
    ``column_fn(k)`` returning one column is supplied; the latter keeps
    long-lag kernels on large lattices out of memory.
    """

    def __init__(self, tau: int, n_points: int, exact: bool,
                 probs: Optional[np.ndarray] = None,
                 column_fn: Optional[Callable[[int], np.ndarray]] = None):
        if (probs is None) == (column_fn is None):
            raise ValueError("give exactly one of probs or column_fn")
        if probs is not None and probs.shape != (n_points, 2 * tau + 1):
            raise ValueError(f"probs has shape {probs.shape}, expected {(n_points, 2 * tau + 1)}")
        self.tau = int(tau)
        self.n_points = int(n_points)
        self.exact = bool(exact)
        self._probs = probs
        self._column_fn = column_fn

    def __repr__(self):
        kind = "exact" if self.exact else "approximate"
        return f"DisplacementKernel(tau={self.tau}, n_points={self.n_points}, {kind})"

    def offsets(self) -> range:
        return range(-self.tau, self.tau + 1)

    def column(self, k: int) -> np.ndarray:
        """``P(n + k, tau)`` for ``n = 1..N`` as an array."""
        if not -self.tau <= k <= self.tau:
            return np.zeros(self.n_points)
        if self._probs is not None:
            return self._probs[:, k + self.tau]
        return self._column_fn(k)

    @property
    def probs(self) -> np.ndarray:
        if self._probs is None:
            self._probs = np.column_stack([self._column_fn(k) for k in self.offsets()])
        return self._probs

    def prob(self, n: int, k: int) -> float:
        """``P(n + k, tau)`` with 1-based ``n``."""
        return float(self.column(k)[n - 1])

    def row_sums(self) -> np.ndarray:
        total = np.zeros(self.n_points)
        for k in self.offsets():
            total += self.column(k)
        return total

    def to_matrix(self) -> np.ndarray:
        """Dense ``(N, N)`` transition matrix between lattice points."""
        N = self.n_points
        out = np.zeros((N, N))
        rows = np.arange(N)
        for k in self.offsets():
            col = self.column(k)
            ok = (rows + k >= 0) & (rows + k < N)
            out[rows[ok], rows[ok] + k] = col[ok]
        return out

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, tau: int, exact: bool = True) -> "DisplacementKernel":
        N = matrix.shape[0]
        probs = np.zeros((N, 2 * tau + 1))
        rows = np.arange(N)
        for k in range(-tau, tau + 1):
            ok = (rows + k >= 0) & (rows + k < N)
            probs[rows[ok], k + tau] = matrix[rows[ok], rows[ok] + k]
        return cls(tau, N, exact, probs=probs)

    @classmethod
    def identity(cls, n_points: int, tau: int = 1) -> "DisplacementKernel":
        """Static users: every user stays where it is."""
        probs = np.zeros((n_points, 2 * tau + 1))
        probs[:, tau] = 1.0
        return cls(tau, n_points, True, probs=probs)


def check_probabilities(values: np.ndarray, what: str) -> np.ndarray:
    """Clamp round-off excursions out of [0, 1]; raise on anything larger."""
    values = np.asarray(values, dtype=float)
    lo, hi = values.min(initial=0.0), values.max(initial=0.0)
    if lo < -PROB_TOL or hi > 1.0 + PROB_TOL:
        raise ProbabilityRangeError(f"{what}: value range [{lo:.6g}, {hi:.6g}] leaves [0, 1]")
    if lo < 0.0 or hi > 1.0:
        log.debug("%s: clamped round-off excursion [%g, %g]", what, lo, hi)
        values = np.clip(values, 0.0, 1.0)
    return values


def _require_unit(cfg: LatticeConfig, name: str):
    if cfg.v != 1 or cfg.N_d != 1:
        raise UnsupportedConfigurationError(
            f"{name} works on the unit-speed lattice; use kernel_for_speed for v={cfg.v}, N_d={cfg.N_d}")


def _crossings(n: np.ndarray, N: int) -> np.ndarray:
    """Weight of travels passing ``n``: rightward ``n(N-n)`` plus leftward ``(n-1)(N-n+1)``."""
    return n * (N - n) + (n - 1) * (N - n + 1)


def _stay_probability(cfg: LatticeConfig, ss: SteadyState) -> np.ndarray:
    if cfg.M == 0:
        return np.zeros(cfg.N)
    return ss.p / (cfg.N * ss.f)


def kernel_tau1(cfg: LatticeConfig) -> DisplacementKernel:
    """Exact one-hop displacement law."""
    _require_unit(cfg, "kernel_tau1")
    N = cfg.N
    ss = steady_state(cfg)
    n = np.arange(1, N + 1, dtype=float)
    stay = _stay_probability(cfg, ss)
    cross = _crossings(n, N)
    right = (1.0 - stay) * n * (N - n) / cross
    left = (1.0 - stay) * (n - 1) * (N - n + 1) / cross
    probs = np.column_stack([left, stay, right])
    return DisplacementKernel(1, N, True, probs=check_probabilities(probs, "kernel_tau1"))


def keep_thinking(cfg: LatticeConfig) -> np.ndarray:
    """``P(n, 2 | n, 1)``: a user thinking at ``t = 1`` still thinks at ``t = 2``.

    Undefined where nobody thinks (``M = 0``); NaN is returned there.
    """
    _require_unit(cfg, "keep_thinking")
    N, M = cfg.N, cfg.M
    ss = steady_state(cfg)
    n = np.arange(1, N + 1, dtype=float)
    stay = _stay_probability(cfg, ss)
    q = (N - 1) / _crossings(n, N)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 - q * M / (M + 1.0) * (1.0 - stay) / stay


def kernel_tau2(cfg: LatticeConfig, published_boundary: bool = False) -> DisplacementKernel:
    """Exact two-hop displacement law.

    At the two end points the travelling part of ``P(n, 2)`` only admits the
    single in-lattice reflection (go inward one point, zero think, come back),
    weight ``1 / ((N-1)^2 (M+1))``. ``published_boundary=True`` uses the
    printed end-point factor ``(N^2 + 1) / ((N-1)^2 (M+1))`` instead; the
    end-point rows then sum to more than one (by 0.0496 at N=50, M=5) and
    with ``M = 0`` the range check rejects them.
    """
    _require_unit(cfg, "kernel_tau2")
    N, M = cfg.N, cfg.M
    ss = steady_state(cfg)
    n = np.arange(1, N + 1, dtype=float)
    stay = _stay_probability(cfg, ss)
    move = 1.0 - stay
    cross = _crossings(n, N)
    zero_think = 1.0 / (M + 1.0)
    some_think = M / (M + 1.0)
    # stay * P(n,2|n,1), written without dividing by stay so that M = 0 works
    q = (N - 1) / cross
    think_twice = stay - q * some_think * move
    leave_after_think = stay - think_twice

    plus2 = move * (n * (N - n - 1) + n * zero_think * (N - n - 1) / (N - 1)) / cross
    plus2[n >= N - 1] = 0.0
    minus2 = move * ((n - 2) * (N - n + 1) + (N - n + 1) * zero_think * (n - 2) / (N - 1)) / cross
    minus2[n <= 2] = 0.0
    plus1 = move * n * some_think / cross + leave_after_think * (N - n) / (N - 1)
    plus1[n == N] = 0.0
    minus1 = move * (N - n + 1) * some_think / cross + leave_after_think * (n - 1) / (N - 1)
    minus1[n == 1] = 0.0
    same = move * zero_think * (n**2 + (N - n + 1) ** 2) / (N - 1) / cross + think_twice
    ends = np.array([0, N - 1])
    if published_boundary:
        same[ends] = move[ends] * (N**2 + 1.0) / ((N - 1.0) ** 2 * (M + 1.0)) + think_twice[ends]
    else:
        same[ends] = move[ends] / ((N - 1.0) ** 2 * (M + 1.0)) + think_twice[ends]

    probs = np.column_stack([minus2, minus1, same, plus1, plus2])
    return DisplacementKernel(2, N, True, probs=check_probabilities(probs, "kernel_tau2"))


def _high_tau_right(n: np.ndarray, k: int, tau: int, N: int) -> np.ndarray:
    """Approximate ``P(n + k, tau)`` for ``k >= 0`` and zero think time."""
    out = np.zeros(len(n))
    if (tau - k) % 2:
        return out
    ok = n + k <= N
    nn = n[ok]
    cross = _crossings(nn, N)
    if k == tau:
        reach = N - nn - tau + 1
        val = (nn * reach + (tau - 1) * nn * reach / (N - 1)) / cross
    else:
        turn = (tau - k) // 2
        via_right = (nn + k + turn <= N) * nn * (nn + k)
        via_left = (nn - turn >= 1) * (N - nn + 1) * (N - nn - k + 1)
        val = (via_right + via_left) / ((N - 1) * cross)
    out[ok] = val
    return out


def kernel_high_tau(cfg: LatticeConfig, tau: int) -> DisplacementKernel:
    """Approximate displacement law for zero think time and any lag.

    Only the most probable routes are counted: straight runs with at most one
    intermediate waypoint and runs with a single reversal. Entries therefore
    under-estimate the exact law and rows sum to at most one. Columns are built
    on demand, so lags in the thousands on lattices of ``10^5`` points are fine.
    """
    _require_unit(cfg, "kernel_high_tau")
    if cfg.M != 0:
        raise UnsupportedConfigurationError(
            f"long-lag displacement approximation needs zero think time, got M={cfg.M}")
    tau = int(tau)
    if tau < 1:
        raise InvalidConfigError(f"lag must be >= 1, got {tau}")
    N = cfg.N
    n = np.arange(1, N + 1, dtype=float)
    mirrored = N - n + 1

    def column(k: int) -> np.ndarray:
        if k >= 0:
            return _high_tau_right(n, k, tau, N)
        # P(n - j, tau) = P(l + j, tau) with l = N - n + 1
        return _high_tau_right(mirrored, -k, tau, N)

    return DisplacementKernel(tau, N, False, column_fn=column)


def kernel_for_speed(cfg: LatticeConfig, tau: int) -> DisplacementKernel:
    """Displacement law at a lag of ``tau`` slots for any speed and densification.

    A lag of ``tau`` slots is ``tau * v * N_d`` hops on the densified lattice,
    and the think time becomes ``M / dt`` hops, so the unit-speed kernels apply
    after that substitution. The returned kernel's ``tau`` is the hop lag.
    """
    hops = Fraction(tau) * cfg.hops_per_slot
    if hops.denominator != 1 or hops < 1:
        raise UnsupportedConfigurationError(
            f"lag of {tau} slots is {hops} hops; it must be a positive whole number")
    hops = int(hops)
    unit = cfg.unit_speed()
    if hops == 1:
        return kernel_tau1(unit)
    if hops == 2:
        return kernel_tau2(unit)
    if unit.M == 0:
        return kernel_high_tau(unit, hops)
    raise UnsupportedConfigurationError(
        f"no closed form for {hops} hops with positive think time (v={cfg.v}, N_d={cfg.N_d}, M={cfg.M})")


def kernel(cfg: LatticeConfig, tau: int) -> DisplacementKernel:
    """Best available closed-form kernel at a lag of ``tau`` slots."""
    return kernel_for_speed(cfg, tau)
