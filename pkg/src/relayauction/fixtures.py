"""The two worked single-destination examples as concrete scenarios.

Both use Normal relaying with uplink interference switched off, so each
relay's rate to the destination is set purely by its relay->destination
gain. Gains are back-solved from the stated rates or powers; linear
interference coefficients are back-solved from the stated costs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import MBPS, CellConfig, Scenario, build_scenario
from .mechanisms import MechanismKind, MechanismSpec
from .relaying import NORMAL

W = 10e6


@dataclass(frozen=True)
class Fixture:
    scenario: Scenario
    proposed: MechanismSpec
    vcg: MechanismSpec


def _scenario(gamma, alpha) -> Scenario:
    cfg = CellConfig(num_relays_r=len(alpha), num_destinations_d=1, uplink_power_pu=0.0,
                     bandwidth_w=W)
    gamma = np.asarray(gamma, dtype=float)
    return build_scenario(cfg, g_si=np.ones(len(alpha)), g_sj=np.ones(1),
                          g_ij=(gamma * cfg.noise_power)[:, None],
                          battery=1.0 / np.asarray(alpha, dtype=float))


def example_1() -> Fixture:
    """Constant power P = 0.25 W; rates 1, 5, 5 Mbps; costs 1, 0.5, 3."""
    P = 0.25
    rates = np.array([1.0, 5.0, 5.0]) * MBPS
    gamma = (4.0 ** (rates / W) - 1.0) / P
    costs = np.array([1.0, 0.5, 3.0])
    s = _scenario(gamma, [1.0, 1.1, 2.0])
    common = dict(scheme=NORMAL, fixed_power_p=P, c_t=2.5, a=2.0, c_i=costs / P,
                  cost_model="linear")
    return Fixture(s, MechanismSpec(MechanismKind.PROPOSED_CONST_POWER, **common),
                   MechanismSpec(MechanismKind.VCG_CONST_POWER, **common))


def example_2() -> Fixture:
    """Constant rate 3 Mbps needing 0.5, 0.7, 1.0 W; costs 3, 1, 1."""
    target = 3.0 * MBPS
    powers = np.array([0.5, 0.7, 1.0])
    gamma = (4.0 ** (target / W) - 1.0) / powers
    costs = np.array([3.0, 1.0, 1.0])
    s = _scenario(gamma, [1.0, 1.1, 2.5])
    common = dict(scheme=NORMAL, target_rates=target, c_t=2.5, a=2.0, p_m=2.0,
                  c_i=costs / powers, cost_model="linear")
    return Fixture(s, MechanismSpec(MechanismKind.PROPOSED_CONST_RATE, **common),
                   MechanismSpec(MechanismKind.VCG_CONST_RATE, **common))


FIXTURES = {1: example_1, 2: example_2}
