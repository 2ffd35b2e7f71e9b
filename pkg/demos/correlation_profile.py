"""How strongly is interference correlated from one slot to the next, and where?

Fifty users move on a 50-point line with think time up to 5 slots. The
correlation of interference at a receiver is highest near the border, drops
with the lag, and the Poisson approximation overstates it everywhere.
"""
import numpy as np

from rwpcorr import interference as itf
from rwpcorr import mobility
from rwpcorr.interference import ChannelConfig
from rwpcorr.mobility import LatticeConfig

cfg = LatticeConfig(N=50, M=5)
ss = mobility.steady_state(cfg)
ch = ChannelConfig(K=50, xi=1.0, epsilon=0.5, a=4.0)
xp = np.array([1.0, 5.0, 10.0, 25.0])

print(f"static fraction p = {float(mobility.static_fraction(cfg)):.4f}")
print(" x_p   rho(1)   rho(2)   rho_ppp(1)")
k1, k2 = mobility.kernel_tau1(cfg), mobility.kernel_tau2(cfg)
r1, r2 = itf.correlation(ss, k1, ch, xp), itf.correlation(ss, k2, ch, xp)
ppp = itf.ppp_variants(ss, k1, ch, xp).rho
for row in zip(xp, r1, r2, ppp):
    print("{:4.0f}  {:7.4f}  {:7.4f}  {:9.4f}".format(*row))
