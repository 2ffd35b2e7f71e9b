"""Check the closed forms against a short Monte Carlo run.

Small run (under a second): ten replications of 5000 slots. Each line shows
the analytic value, the simulated estimate and the deviation in standard errors.
"""
import numpy as np

from rwpcorr import interference as itf
from rwpcorr import mobility, outage, simulation
from rwpcorr.interference import ChannelConfig
from rwpcorr.mobility import LatticeConfig
from rwpcorr.outage import LinkConfig
from rwpcorr.simulation import SimConfig

lat = LatticeConfig(N=30, M=3)
ch = ChannelConfig(K=20, xi=0.5, epsilon=0.5, a=2.0)
link = LinkConfig(x_p=1.0, x_t=1.0, q=1.0, P_N=1e-3, channel=ch)
cfg = SimConfig(lat, ch, link=link, warmup_slots=2000, sample_slots=5000, replications=10, seed=0)
xp = np.array([1.0, 15.0])

ss, k1 = mobility.steady_state(lat), mobility.kernel_tau1(lat)
rho = itf.correlation(ss, k1, ch, xp)
est = simulation.estimate_interference(cfg, xp, taus=(1,))
for x, r, e in zip(xp, rho, est.rho[1]):
    print(f"rho(x_p={x:g}, 1):  analytic {r:.4f}  simulated {e.estimate:.4f}  z {e.z(r):+.2f}")

res = simulation.estimate_outage(cfg, taus=(1,), x_p=xp)
for x, e_out, e_cond in zip(xp, res.outage, res.conditional[1]):
    exact = outage.outage_result(ss, k1, link.at(x))
    print(f"outage at x_p={x:g}:  analytic {exact.unconditional:.4f}  simulated {e_out.estimate:.4f}  "
          f"z {e_out.z(exact.unconditional):+.2f}")
    print(f"  given outage one slot before:  analytic {exact.conditional:.4f}  "
          f"simulated {e_cond.estimate:.4f}  z {e_cond.z(exact.conditional):+.2f}")
