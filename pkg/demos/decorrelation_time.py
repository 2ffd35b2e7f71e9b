"""How many slots until interference forgets where the users were?

With zero think time the long-lag kernel gives the correlation at any lag.
The first lag with |rho| < 0.05 is printed for the centre and the border.
"""
from rwpcorr import interference as itf
from rwpcorr import mobility
from rwpcorr.interference import ChannelConfig
from rwpcorr.mobility import LatticeConfig


def first_lag_below(N, a, x_p, limit=0.05):
    cfg = LatticeConfig(N, 0)
    ss = mobility.steady_state(cfg)
    ch = ChannelConfig(K=50, xi=1.0, epsilon=0.5, a=a)
    for tau in range(1, 80):
        if abs(itf.correlation(ss, mobility.kernel_for_speed(cfg, tau), ch, float(x_p))) < limit:
            return tau


for N in (50, 100):
    for a in (2.0, 4.0):
        print(f"N={N:3d} a={a:g}: centre {first_lag_below(N, a, N // 2):2d} slots, "
              f"border {first_lag_below(N, a, 1):2d} slots")
