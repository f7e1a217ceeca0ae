"""Brute-force checks of incentive compatibility and individual rationality.

A relay's utility is always measured against its true valuation:
``payment - alpha_true * (power + P_c)`` if it wins, 0 otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .channel import CellConfig, Scenario, sample_scenario
from .matching import Uncoverable
from .mechanisms import (AuctionOutcome, BidProfile, InsufficientCompetition, MechanismKind,
                         MechanismSpec, bs_utility, proposed_const_power,
                         run_mechanism)
from .relaying import ALL_SCHEMES

FIXED_MULTIPLIERS = (0.25, 0.5, 0.8, 0.95, 1.05, 1.25, 2.0, 4.0)
SKIPPABLE = (InsufficientCompetition, Uncoverable)


@dataclass(frozen=True)
class DeviationReport:
    kind: str
    relay: int
    true_alpha: float
    deviation_alpha: float
    truthful_utility: float
    deviating_utility: float

    @property
    def violation_margin(self) -> float:
        return self.deviating_utility - self.truthful_utility


class DeviationList(list):
    """Reports found, plus bookkeeping of what was evaluated or skipped."""

    def __init__(self, *args):
        super().__init__(*args)
        self.evaluated = 0
        self.skipped: dict = {}

    def skip(self, reason: str) -> None:
        self.skipped[reason] = self.skipped.get(reason, 0) + 1


@dataclass
class IRResult:
    passed: bool
    witnesses: list = field(default_factory=list)   # (relay, utility, reason)


def default_grid(seed: int = 0, n_random: int = 20) -> tuple:
    """The fixed multipliers plus ``n_random`` seeded draws from U[0.1, 5]."""
    rng = np.random.default_rng(seed)
    return FIXED_MULTIPLIERS + tuple(float(x) for x in rng.uniform(0.1, 5.0, n_random))


def first_price_const_power(s: Scenario, bids: BidProfile, spec: MechanismSpec
                            ) -> AuctionOutcome:
    """Negative control: proposed constant-power allocation, winners paid their bid."""
    out = proposed_const_power(s, bids, spec)
    pay = np.zeros_like(out.payment)
    for j, r in enumerate(out.assignment):
        pay[r] = bids.declared_alpha[r] * (out.power[j] + out.processing_power[r])
    return replace(out, payment=pay,
                   bs_utility=bs_utility(spec.a, out.assignment, out.achieved_rate, pay,
                                         out.interference_cost))


def _runner(mechanism):
    if mechanism is None:
        return lambda s, bids, spec: run_mechanism(s, spec, bids)
    return mechanism


def check_truthfulness(mech: MechanismSpec, s: Scenario, grid=None, tol: float = 1e-9,
                       mechanism=None) -> DeviationList:
    """Try every scalar misreport ``m * alpha_i`` and report profitable ones.

    ``mechanism(s, bids, spec)`` overrides the auction implementation (used
    for negative controls). Misreports that make the auction fail are
    skipped and counted; a failing truthful run skips the whole instance.
    """
    if mech.kind is MechanismKind.FULL_INFO_BASELINE:
        raise ValueError("the full-information baseline takes no bids")
    grid = default_grid() if grid is None else tuple(grid)
    run = _runner(mechanism)
    truth = BidProfile.truthful(s)
    alpha = truth.declared_alpha
    reports = DeviationList()
    try:
        base = run(s, truth, mech).relay_utilities(alpha)
    except SKIPPABLE as exc:
        reports.skip(f"truthful:{type(exc).__name__}")
        return reports
    for i in range(s.num_relays):
        for mult in grid:
            if mult == 1.0:
                continue
            bid = float(mult * alpha[i])
            try:
                out = run(s, truth.with_bid(i, bid), mech)
            except SKIPPABLE as exc:
                reports.skip(type(exc).__name__)
                continue
            reports.evaluated += 1
            u = float(out.relay_utilities(alpha)[i])
            if u > base[i] + tol:
                reports.append(DeviationReport(mech.kind.value, i, float(alpha[i]), bid,
                                               float(base[i]), u))
    return reports


def check_individual_rationality(mech: MechanismSpec, s: Scenario, tol: float = 1e-9,
                                 mechanism=None) -> IRResult:
    """Truthful winners must not lose money; losers must get exactly 0."""
    run = _runner(mechanism)
    alpha = s.alphas
    out = run(s, BidProfile.truthful(s), mech)
    utilities = out.relay_utilities(alpha)
    winners = set(out.assignment)
    result = IRResult(True)
    for i, u in enumerate(utilities):
        if i in winners:
            if u < -tol:
                result.witnesses.append((i, float(u), "winner below zero"))
        elif u != 0.0 or out.payment[i] != 0.0 or out.relay_power()[i] != 0.0:
            result.witnesses.append((i, float(u), "loser paid or transmitting"))
    result.passed = not result.witnesses
    return result


@dataclass
class SweepSummary:
    kind: str
    scenarios: int = 0
    evaluated: int = 0
    reports: list = field(default_factory=list)
    ir_failures: list = field(default_factory=list)   # (trial_index, witnesses)
    skipped: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.reports and not self.ir_failures


def sweep(kind: MechanismKind, trials: int, seed: int = 0, *, num_relays: int = 5,
          num_destinations: int = 3, grid=None, tol: float = 1e-9, mechanism=None,
          max_draws: int | None = None) -> SweepSummary:
    """Truthfulness and IR checks over ``trials`` usable random scenarios.

    Schemes rotate with the draw index. Draws whose truthful run fails
    (no full cover, too few competitors) are skipped and counted; at most
    ``max_draws`` (default 10 * trials) scenarios are drawn.
    """
    cfg = CellConfig(num_relays_r=num_relays, num_destinations_d=num_destinations, seed=seed)
    grid = default_grid(seed) if grid is None else tuple(grid)
    limit = 10 * trials if max_draws is None else max_draws
    label = kind.value if mechanism is None else getattr(mechanism, "__name__", kind.value)
    out = SweepSummary(label)
    draw = 0
    while out.scenarios < trials and draw < limit:
        s = sample_scenario(cfg, draw)
        spec = MechanismSpec(kind, scheme=ALL_SCHEMES[draw % len(ALL_SCHEMES)])
        draw += 1
        found = check_truthfulness(spec, s, grid, tol, mechanism)
        for reason, n in found.skipped.items():
            out.skipped[reason] = out.skipped.get(reason, 0) + n
        if any(r.startswith("truthful:") for r in found.skipped):
            continue
        out.scenarios += 1
        out.evaluated += found.evaluated
        out.reports.extend(found)
        ir = check_individual_rationality(spec, s, tol, mechanism)
        if not ir.passed:
            out.ir_failures.append((s.trial_index, ir.witnesses))
    return out
