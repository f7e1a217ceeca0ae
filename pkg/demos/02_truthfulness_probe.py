#!/usr/bin/env python3
"""Poke at incentive compatibility by hand.

Take one small cell, pick the winning relay, and sweep its declared
valuation. Under the proposed constant-power auction its utility (measured
with the TRUE valuation) peaks at the truthful report. A first-price rule
that pays the bid rewards overbidding.
"""
import numpy as np

from relayauction.channel import CellConfig, sample_scenario
from relayauction.mechanisms import BidProfile, MechanismKind, MechanismSpec, run_mechanism
from relayauction.verification import first_price_const_power

cfg = CellConfig(num_relays_r=5, num_destinations_d=3, seed=0)
s = sample_scenario(cfg, 0)
spec = MechanismSpec(MechanismKind.PROPOSED_CONST_POWER)
truth = BidProfile.truthful(s)

base = run_mechanism(s, spec)
i = base.assignment[0]
alpha = s.alphas[i]
print(f"relay {i} wins destination 0 with alpha={alpha:.3g}")

mults = np.array([0.3, 0.6, 0.9, 1.0, 1.1, 1.5, 2.0, 4.0, 8.0])
print(f"{'bid/alpha':>9} {'proposed':>10} {'first-price':>12}")
for m in mults:
    bids = truth.with_bid(i, m * alpha)
    u1 = run_mechanism(s, spec, bids).relay_utilities(s.alphas)[i]
    u2 = first_price_const_power(s, bids, spec).relay_utilities(s.alphas)[i]
    print(f"{m:9.2f} {u1:10.4f} {u2:12.4f}")

# proposed column: flat while the relay keeps winning, then 0, never above the
# truthful row. first-price column: the truthful row earns nothing, so inflating
# the bid pays off until the relay prices itself out
