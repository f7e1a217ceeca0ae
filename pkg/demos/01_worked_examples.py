#!/usr/bin/env python3
"""The two single-destination examples, proposed auction next to VCG.

Three relays compete for one destination. VCG only looks at declared
energy cost, so it hires the cheapest relay even when that relay delivers a
poor rate or hurts the uplink a lot. The proposed auctions weigh cost per
Mbps and drop relays above the interference threshold.
"""
from relayauction.channel import MBPS
from relayauction.fixtures import example_1, example_2
from relayauction.mechanisms import run_mechanism


def show(name, fx):
    print(f"== {name}")
    s = fx.scenario
    print("declared alpha:", s.alphas)
    for label, spec in (("proposed", fx.proposed), ("vcg", fx.vcg)):
        out = run_mechanism(s, spec)
        r = out.assignment[0]
        print(f"{label:>9}: relay {r + 1}  P={out.power[0]:.3g} W  "
              f"rate={out.achieved_rate[0] / MBPS:.3g} Mbps  pay={out.payment[r]:.4g}  "
              f"C={out.interference_cost[0]:.3g}  U_bs={out.bs_utility:.4g}")
    print()


show("constant power, P = 0.25 W", example_1())
show("constant rate, 3 Mbps", example_2())

# the proposed winner in example 1 is paid more than VCG's winner,
# yet the BS comes out far ahead because the rate is five times higher
