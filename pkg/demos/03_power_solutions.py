#!/usr/bin/env python3
"""Closed-form transmit powers against a brute grid, one link at a time.

Also shows the decode-and-forward kink: past the crossover power the
source->relay hop caps the rate, and extra relay power buys nothing.
"""
import numpy as np

from relayauction.channel import LinkBudget, MBPS
from relayauction.power import bs_pair_utility, power_for_rate, power_max_bs_utility
from relayauction.relaying import ALL_SCHEMES, DF, df_crossover_power, rate

lb = LinkBudget(sinr_si=40.0, sinr_sj=0.5, gamma_ij=400.0, gamma_sj=0.1, bandwidth_w=10e6)
a, alpha, c, p_max = 0.25, 2.0, 0.5, 0.25
grid = np.linspace(0, p_max, 20001)

for scheme in ALL_SCHEMES:
    res = power_max_bs_utility(scheme, lb, a, alpha, c, p_max)
    u = bs_pair_utility(scheme, lb, grid, a, alpha, c * grid)
    need = power_for_rate(scheme, lb, 10e6, p_max)
    print(f"{str(scheme):>18}: p*={res.power:.5f} W (grid {grid[np.argmax(u)]:.5f})  "
          f"10 Mbps needs {need.power:.4g} W")

p_o = df_crossover_power(lb)
print(f"\nDF crossover at {p_o:.4f} W")
for p in (0.5 * p_o, p_o, 2 * p_o):
    print(f"  p={p:.4f}  rate={rate(DF, lb, p)[0] / MBPS:.3f} Mbps")
