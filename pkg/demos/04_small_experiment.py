#!/usr/bin/env python3
"""A short version of the Monte Carlo comparison (20 trials, two relay counts).

The full grid (100 trials, R = 20..100) takes a couple of minutes:
    relayauction simulate --config demos/full_grid.json --out results/
"""
from relayauction.channel import CellConfig
from relayauction.experiment import ExperimentConfig, run_experiment
from relayauction.relaying import NORMAL, DF

cfg = ExperimentConfig(cell=CellConfig(seed=1), schemes=(NORMAL, DF),
                       relay_counts=(20, 60), trials=20)
rows = run_experiment(cfg)

print(f"{'mechanism':<20}{'scheme':<16}{'R':>4}{'rate':>9}{'U_bs':>10}{'C':>8}{'redraw':>7}")
for r in rows:
    print(f"{r.mechanism:<20}{r.scheme:<16}{r.num_relays:>4}{r.avg_rate_mbps:9.2f}"
          f"{r.avg_bs_utility:10.2f}{r.avg_interference_cost:8.3f}{r.resampled_trials:7d}")

# constant-rate rows redraw cells where some destination has no relay able
# to hit the target within P_m and C_T; both auctions in a family share draws
