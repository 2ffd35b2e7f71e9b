"""Temporal interference correlation and outage for mobile ALOHA users on a line.

Users follow a discrete random waypoint model on the lattice ``1..N``. The
package provides the steady-state occupancy, displacement kernels, an exact
Markov-chain oracle, interference moments and correlation, outage
probabilities, and a seeded Monte Carlo simulator that cross-checks them.
"""
from .errors import (ConvergenceError, DegenerateVarianceError, InvalidConfigError,
                     ProbabilityRangeError, StateSpaceError, UndefinedOutageError,
                     UnsupportedConfigurationError)
from .mobility import (DisplacementKernel, LatticeConfig, SteadyState, kernel, kernel_for_speed,
                       kernel_high_tau, kernel_tau1, kernel_tau2, lattice_coordinates,
                       mean_travel_length, static_fraction, steady_state, uniform_state)
from .chain import build_chain, displacement_exact, oracle_kernels, stationary
from .interference import (ChannelConfig, correlation, cross_moment, interference_stats,
                           mean_interference, ppp_variants, rho_infinity, second_moment, sigma_g,
                           variance)
from .outage import (LinkConfig, appendix_bound_check, conditional_outage, joint_outage,
                     joint_outage_tau1, laplace, outage_result, sigma_G)
from .simulation import (SimConfig, SimEstimate, empirical_occupancy, estimate_interference,
                         estimate_kernel, estimate_outage, run)

__version__ = "0.1.0"
