"""Exact Markov-chain model of the discrete random waypoint process.

A state is ``(position, destination, pause_remaining)``. Travelling states
have ``position != destination``; arrival and pause states have them equal,
with ``r`` the number of further slots the user will stay. The stationary law
of this chain certifies every closed-form mobility result in
:mod:`rwpcorr.mobility`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

from .errors import ConvergenceError, StateSpaceError, UnsupportedConfigurationError
from .mobility import DisplacementKernel, LatticeConfig

log = logging.getLogger(__name__)

MAX_STATES = 10**6
DENSE_LIMIT = 4_000
DIRECT_LIMIT = 50_000


@dataclass(frozen=True)
class Chain:
    """Sparse transition matrix plus the decoding of each state index."""

    cfg: LatticeConfig
    P: sp.csr_matrix
    position: np.ndarray
    destination: np.ndarray
    remaining: np.ndarray

    @property
    def n_states(self) -> int:
        return self.P.shape[0]

    def position_indicator(self) -> sp.csr_matrix:
        """``(n_states, N)`` 0/1 matrix mapping states to lattice points."""
        S, N = self.n_states, self.cfg.N
        return sp.csr_matrix((np.ones(S), (np.arange(S), self.position - 1)), shape=(S, N))


@dataclass(frozen=True)
class StationaryLaw:
    pi: np.ndarray
    solve_residual: float

    def marginal(self, chain: Chain) -> np.ndarray:
        return np.bincount(chain.position - 1, weights=self.pi, minlength=chain.cfg.N)

    def thinking_mass(self, chain: Chain) -> float:
        """Mass of states in which the user stays put next slot."""
        return float(self.pi[chain.remaining >= 1].sum())


def state_count(cfg: LatticeConfig) -> int:
    return cfg.N * (cfg.N - 1) + cfg.N * (cfg.M + 1)


def build_chain(cfg: LatticeConfig) -> Chain:
    if cfg.v != 1 or cfg.N_d != 1:
        cfg = cfg.unit_speed()
    N, M = cfg.N, cfg.M
    S = state_count(cfg)
    if S > MAX_STATES:
        raise StateSpaceError(f"{S} states exceed the budget of {MAX_STATES}")

    # travelling (n, d), n != d, come first in row-major order; then (d, d, r)
    trav_n, trav_d = np.nonzero(~np.eye(N, dtype=bool))
    trav_n, trav_d = trav_n + 1, trav_d + 1
    n_trav = len(trav_n)
    trav_index = np.full((N + 1, N + 1), -1)
    trav_index[trav_n, trav_d] = np.arange(n_trav)
    pause_d = np.repeat(np.arange(1, N + 1), M + 1)
    pause_r = np.tile(np.arange(M + 1), N)
    pause_index = n_trav + (pause_d - 1) * (M + 1) + pause_r

    position = np.concatenate([trav_n, pause_d])
    destination = np.concatenate([trav_d, pause_d])
    remaining = np.concatenate([np.zeros(n_trav, dtype=int), pause_r])

    rows, cols, vals = [], [], []
    arrive = 1.0 / (M + 1)

    def step(src, n_next, dest, weight):
        # move to n_next heading for dest; arrival branches over the pause length
        arrived = n_next == dest
        go = ~arrived
        rows.append(src[go])
        cols.append(trav_index[n_next[go], dest[go]])
        vals.append(weight[go])
        for m in range(M + 1):
            rows.append(src[arrived])
            cols.append(n_trav + (dest[arrived] - 1) * (M + 1) + m)
            vals.append(weight[arrived] * arrive)

    src = np.arange(n_trav)
    step(src, trav_n + np.sign(trav_d - trav_n), trav_d, np.ones(n_trav))

    waiting = pause_r >= 1
    rows.append(pause_index[waiting])
    cols.append(pause_index[waiting] - 1)
    vals.append(np.ones(waiting.sum()))

    # expired pause at d: new destination uniform over the other N - 1 points
    d0 = np.arange(1, N + 1)
    src0 = n_trav + (d0 - 1) * (M + 1)
    new_d = np.concatenate([np.delete(np.arange(1, N + 1), d - 1) for d in d0])
    from_d = np.repeat(d0, N - 1)
    step(np.repeat(src0, N - 1), from_d + np.sign(new_d - from_d), new_d,
         np.full(len(new_d), 1.0 / (N - 1)))

    P = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(S, S))
    P.sum_duplicates()
    return Chain(cfg, P, position, destination, remaining)


def stationary(chain: Chain, tol: float = 1e-10, max_iter: int = 200_000) -> StationaryLaw:
    """Stationary law of the chain.

    Direct solve of ``pi (P - I) = 0`` with one equation replaced by the
    normalisation: dense LU up to ``DENSE_LIMIT`` states, sparse LU up to
    ``DIRECT_LIMIT``, Cesaro-averaged power iteration beyond. Periodic chains
    (zero think time alternates position parity) are handled by all three.
    """
    P = chain.P
    S = chain.n_states
    if S <= DIRECT_LIMIT:
        if S <= DENSE_LIMIT:
            A = P.T.toarray() - np.eye(S)
            A[0, :] = 1.0
        else:
            A = (P.T - sp.identity(S, format="csr")).tolil()
            A[0, :] = np.ones(S)
            A = A.tocsc()
        b = np.zeros(S)
        b[0] = 1.0
        if S <= DENSE_LIMIT:
            pi = scipy.linalg.lu_solve(scipy.linalg.lu_factor(A), b)
        else:
            pi = scipy.sparse.linalg.spsolve(A, b)
    else:
        pi = _cesaro(P, tol, max_iter)
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    pi = pi / pi.sum()
    residual = float(np.abs(P.T @ pi - pi).max())
    if residual > tol:
        raise ConvergenceError(f"stationary residual {residual:.3g} exceeds {tol:.1g}")
    return StationaryLaw(pi, residual)


def _cesaro(P, tol, max_iter):
    S = P.shape[0]
    x = np.full(S, 1.0 / S)
    PT = P.T.tocsr()
    # averaging consecutive iterates removes a period-2 oscillation
    for it in range(max_iter):
        nxt = 0.5 * (x + PT @ x)
        if it % 100 == 0 and np.abs(PT @ nxt - nxt).max() <= tol / 10:
            return nxt
        x = nxt
    raise ConvergenceError(f"power iteration did not converge within {max_iter} steps")


def displacement_exact(chain: Chain, law: StationaryLaw, tau: int) -> DisplacementKernel:
    """Exact ``tau``-step displacement law of the stationary chain."""
    return displacement_series(chain, law, [tau])[tau]


def displacement_series(chain: Chain, law: StationaryLaw, taus) -> dict:
    """Exact displacement kernels for several lags sharing one propagation pass."""
    taus = sorted(set(int(t) for t in taus))
    if not taus or taus[0] < 1:
        raise UnsupportedConfigurationError("lags must be positive integers")
    ind = chain.position_indicator()
    reach = ind.toarray()  # reach[s, m] = P(position m after t steps | state s)
    weighted = ind.multiply(law.pi[:, None]).T.tocsr()  # (N, S)
    f = law.marginal(chain)
    out = {}
    t = 0
    for tau in taus:
        while t < tau:
            reach = chain.P @ reach
            t += 1
        joint = weighted @ reach
        with np.errstate(invalid="ignore", divide="ignore"):
            trans = np.where(f[:, None] > 0, joint / f[:, None], 0.0)
        out[tau] = DisplacementKernel.from_matrix(trans, tau, exact=True)
    return out


def oracle_kernels(cfg: LatticeConfig, taus) -> dict:
    """Convenience: build, solve and propagate in one call."""
    chain = build_chain(cfg)
    return displacement_series(chain, stationary(chain), taus)
