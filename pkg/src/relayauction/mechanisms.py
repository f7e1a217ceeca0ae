"""Reverse auctions for assigning relays to destinations.

Three proposed auctions (constant power, constant rate, BS-utility
maximisation), their two VCG counterparts and a full-information baseline
that pays winners exactly their incurred cost.

Relay and destination ids are 0-based array indices. Declared valuations are
cost units per W; revenue ``a`` is per Mbps.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (COST_MODELS, MBPS, Scenario, interference_cost, link_budget,
                      power_at_cost)
from .matching import (MAXIMIZE, MINIMIZE, Matching, Uncoverable, WeightedBipartite,
                       optimal_maximal_matching, optimal_weight)
from .power import numeric_argmax_utility, power_max_bs_utility, required_power
from .relaying import NORMAL, Scheme, eligible, rate

P_M_DEFAULT = 10 ** (24 / 10) * 1e-3      # 24 dBm
A_DEFAULT = 0.25


class InsufficientCompetition(ValueError):
    """No maximal matching exists once some winner is removed."""


class MechanismKind(str, enum.Enum):
    PROPOSED_CONST_POWER = "ProposedConstPower"
    PROPOSED_CONST_RATE = "ProposedConstRate"
    PROPOSED_BS_UTIL_MAX = "ProposedBsUtilMax"
    VCG_CONST_POWER = "VcgConstPower"
    VCG_CONST_RATE = "VcgConstRate"
    FULL_INFO_BASELINE = "FullInfoBaseline"


CONST_POWER_KINDS = (MechanismKind.PROPOSED_CONST_POWER, MechanismKind.VCG_CONST_POWER)
CONST_RATE_KINDS = (MechanismKind.PROPOSED_CONST_RATE, MechanismKind.VCG_CONST_RATE)
TRUTHFUL_KINDS = (
    MechanismKind.PROPOSED_CONST_POWER,
    MechanismKind.PROPOSED_CONST_RATE,
    MechanismKind.PROPOSED_BS_UTIL_MAX,
    MechanismKind.VCG_CONST_POWER,
    MechanismKind.VCG_CONST_RATE,
)


@dataclass(frozen=True)
class MechanismSpec:
    kind: MechanismKind
    scheme: Scheme = NORMAL
    fixed_power_p: float = 0.25
    target_rates: object = 5e6           # bit/s, scalar or one per destination
    c_t: float = 2.5
    p_m: float = P_M_DEFAULT
    a: float = A_DEFAULT
    c_i: object = 0.5 * A_DEFAULT        # scalar or one per relay
    cost_model: str = "rate_delta"

    def __post_init__(self):
        object.__setattr__(self, "kind", MechanismKind(self.kind))
        if not self.c_t > 0:
            raise ValueError("c_t must be positive")
        if not self.p_m > 0:
            raise ValueError("p_m must be positive")
        if self.cost_model not in COST_MODELS:
            raise ValueError(f"cost_model must be one of {COST_MODELS}")
        if not self.fixed_power_p > 0:
            raise ValueError("fixed_power_p must be positive")
        if np.any(np.asarray(self.target_rates, dtype=float) <= 0):
            raise ValueError("target rates must be positive")

    def targets(self, num_destinations: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.target_rates, dtype=float),
                               (num_destinations,)).copy()

    def coefficients(self, num_relays: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.c_i, dtype=float), (num_relays,)).copy()


@dataclass(frozen=True)
class BidProfile:
    declared_alpha: np.ndarray

    def __post_init__(self):
        arr = np.array(self.declared_alpha, dtype=float)
        if arr.ndim != 1 or np.any(~(arr > 0)):
            raise ValueError("declared valuations must be a vector of positive numbers")
        arr.setflags(write=False)
        object.__setattr__(self, "declared_alpha", arr)

    @classmethod
    def truthful(cls, s: Scenario) -> "BidProfile":
        return cls(s.alphas)

    def with_bid(self, relay: int, value: float) -> "BidProfile":
        arr = self.declared_alpha.copy()
        arr[relay] = value
        return BidProfile(arr)


@dataclass(frozen=True)
class AuctionOutcome:
    """Result of one auction; arrays are indexed by destination unless noted.

    ``payment`` and ``processing_power`` are indexed by relay.
    """

    kind: MechanismKind
    assignment: tuple                  # relay id per destination
    power: np.ndarray                  # W
    achieved_rate: np.ndarray          # bit/s
    interference_cost: np.ndarray      # cost units
    payment: np.ndarray                # per relay, 0 for losers
    bs_utility: float
    processing_power: np.ndarray = field(repr=False, default=None)

    @property
    def winners(self) -> tuple:
        return tuple(sorted(self.assignment))

    def relay_power(self) -> np.ndarray:
        """Transmit power per relay (0 for losers)."""
        out = np.zeros(len(self.payment))
        for j, r in enumerate(self.assignment):
            out[r] = self.power[j]
        return out

    def relay_utilities(self, true_alpha) -> np.ndarray:
        """payment - true cost for winners, exactly 0 for losers."""
        true_alpha = np.asarray(true_alpha, dtype=float)
        out = np.zeros(len(self.payment))
        for j, r in enumerate(self.assignment):
            out[r] = self.payment[r] - true_alpha[r] * (self.power[j] + self.processing_power[r])
        return out

    def recomputed_bs_utility(self, a: float) -> float:
        return bs_utility(a, self.assignment, self.achieved_rate, self.payment,
                          self.interference_cost)


def bs_utility(a, assignment, achieved_rate, payment, cost) -> float:
    return math.fsum(a * achieved_rate[j] / MBPS - payment[r] - cost[j]
                     for j, r in enumerate(assignment))


# -- shared plumbing ----------------------------------------------------------

class _Ctx:
    """Per-auction precomputation over the full (relay, destination) grid."""

    def __init__(self, s: Scenario, spec: MechanismSpec, bids: BidProfile | None):
        self.s = s
        self.spec = spec
        R, D = s.num_relays, s.num_destinations
        if R < D + 1:
            raise InsufficientCompetition(f"need at least D + 1 relays (R={R}, D={D})")
        self.R, self.D = R, D
        self.bids = s.alphas if bids is None else bids.declared_alpha
        if len(self.bids) != R:
            raise ValueError("one bid per relay required")
        self.lb = link_budget(s)
        self.p_c = s.processing_power()
        self.c_i = spec.coefficients(R)
        self.I = np.arange(R)[:, None]
        self.J = np.arange(D)[None, :]
        self.ok = np.broadcast_to(eligible(spec.scheme, self.lb), (R, D))
        if spec.cost_model == "rate_delta":
            # the same quantity interference_cost() computes, hoisted for the
            # many evaluations of the numeric power search
            cfg = s.config
            self._noise = cfg.noise_power
            self._signal = (cfg.uplink_power_pu * s.g_nbs)[None, :]
            self._g_ibs = s.g_ibs[:, None]
            self._scale = (self.c_i * cfg.interference_duty * cfg.bandwidth_w
                           / cfg.rate_loss_scale)[:, None]
            self._clean = np.log2(1 + self._signal / self._noise)

    def cost(self, p):
        if self.spec.cost_model == "rate_delta":
            hit = np.log2(1 + self._signal / (self._noise + p * self._g_ibs))
            return np.maximum(self._scale * (self._clean - hit), 0.0)
        return interference_cost(self.s, self.I, self.J, p, self.spec.cost_model,
                                 self.c_i[:, None])

    def outcome(self, kind, m, power, achieved, cost, payment) -> AuctionOutcome:
        assignment = tuple(m.relay_for(j) for j in range(self.D))
        cols = np.arange(self.D)
        rows = np.array(assignment, dtype=int)
        pw = power[rows, cols] if np.ndim(power) == 2 else np.full(self.D, float(power))
        rt = achieved[rows, cols]
        cs = cost[rows, cols]
        pay = np.zeros(self.R)
        for r in assignment:
            pay[r] = payment[r]
        util = bs_utility(self.spec.a, assignment, rt, pay, cs)
        return AuctionOutcome(MechanismKind(kind), assignment, pw, rt, cs, pay, util,
                              self.p_c.copy())


def _without(g: WeightedBipartite, relay=None, destination=None):
    """Optimal weight once a relay and/or destination (indices) are removed."""
    w = g.weight
    if relay is not None:
        w = np.delete(w, relay, axis=0)
    if destination is not None:
        w = np.delete(w, destination, axis=1)
    try:
        return optimal_weight(w, g.objective)
    except Uncoverable:
        return None


def _graph_deletion_payments(g: WeightedBipartite, m, gamma_mbps, own_cost,
                              assigned_edge: bool = False):
    """Payments of the proposed min-weight auctions.

    ``own_cost[i, k]`` is the declared cost of relay i serving k and
    ``gamma_mbps[i, k]`` the rate that edge weights divide by. For a winner
    i, the lightest matching containing (i, k) is the optimum of the graph
    without i and k plus the (i, k) edge; matchings heavier than the
    optimum without i are not admissible.

    By default the rate and cost terms come from i's edge in each candidate
    matching. With ``assigned_edge`` they are taken from i's edge in the
    winning matching instead.
    """
    payment = {}
    for i, j in m.pairs:
        rest = _without(g, relay=i)
        if rest is None:
            raise InsufficientCompetition(f"no maximal matching without relay {i}")
        tol = 1e-9 * max(1.0, abs(rest))
        best = -np.inf
        for k in range(g.num_destinations):
            w_ik = g.weight[i, k]
            if not np.isfinite(w_ik):
                continue
            sub = _without(g, relay=i, destination=k)
            if sub is None:
                continue
            w_m = sub + w_ik
            if w_m > rest + tol:
                continue
            e = j if assigned_edge else k
            best = max(best, rest * gamma_mbps[i, e] + own_cost[i, e] - gamma_mbps[i, e] * w_m)
        if not np.isfinite(best):  # pragma: no cover - the optimum itself qualifies
            raise AssertionError(f"winner {i} has no admissible matching")
        payment[i] = best
    return payment


def _clarke_payments(g: WeightedBipartite, m, own):
    """Clarke pivot payments for a min-cost matching with per-edge costs ``own``."""
    payment = {}
    for i in m.relays:
        rest = _without(g, relay=i)
        if rest is None:
            raise InsufficientCompetition(f"no maximal matching without relay {i}")
        j = next(d for r, d in m.pairs if r == i)
        payment[i] = rest - (m.weight - own[i, j])
    return payment


# -- mechanisms ---------------------------------------------------------------

def proposed_const_power(s: Scenario, bids: BidProfile, spec: MechanismSpec) -> AuctionOutcome:
    ctx = _Ctx(s, spec, bids)
    P = spec.fixed_power_p
    achieved, _ = rate(spec.scheme, ctx.lb, np.full((ctx.R, ctx.D), P))
    gamma = achieved / MBPS
    cost = ctx.cost(np.full((ctx.R, ctx.D), P))
    own = np.broadcast_to((ctx.bids * (P + ctx.p_c))[:, None], (ctx.R, ctx.D))
    usable = ctx.ok & (cost <= spec.c_t) & (gamma > 0)
    with np.errstate(divide="ignore"):
        weight = np.where(usable, own / gamma, np.inf)
    g = WeightedBipartite(weight, MINIMIZE)
    m = optimal_maximal_matching(g)
    pay = _graph_deletion_payments(g, m, gamma, own)
    return ctx.outcome(MechanismKind.PROPOSED_CONST_POWER, m, P, achieved, cost, pay)


def proposed_const_rate(s: Scenario, bids: BidProfile, spec: MechanismSpec) -> AuctionOutcome:
    """Minimum-weight matching on declared cost per Mbps at the target rates.

    A winner assigned to j is paid ``Gamma_j * (w^-i - w_m) + bid * (P_ij + P_c)``
    maximised over admissible matchings m, with j fixed to its actual
    destination. With equal targets this is the Clarke pivot payment.
    """
    ctx = _Ctx(s, spec, bids)
    target = spec.targets(ctx.D)
    power = required_power(spec.scheme, ctx.lb, target[None, :])
    finite = np.isfinite(power) & (power <= spec.p_m)
    power = np.where(finite, power, 0.0)
    cost = ctx.cost(power)
    achieved, _ = rate(spec.scheme, ctx.lb, power)
    usable = ctx.ok & finite & (cost <= spec.c_t)
    gamma = np.broadcast_to(target[None, :] / MBPS, (ctx.R, ctx.D))
    own = ctx.bids[:, None] * (power + ctx.p_c[:, None])
    weight = np.where(usable, own / gamma, np.inf)
    g = WeightedBipartite(weight, MINIMIZE)
    m = optimal_maximal_matching(g)
    pay = _graph_deletion_payments(g, m, gamma, own, assigned_edge=True)
    return ctx.outcome(MechanismKind.PROPOSED_CONST_RATE, m, power, achieved, cost, pay)


def _bs_util_allocation(ctx: _Ctx):
    """Per-edge optimal powers and utilities, plus the max-weight matching.

    The power is optimised over [0, min(P_m, p_T)], where p_T is the largest
    power whose interference cost stays within C_T. That cap does not depend
    on the bid, so declaring a different valuation cannot buy admission to
    an edge.
    """
    spec = ctx.spec
    p_t = power_at_cost(ctx.s, ctx.I, ctx.J, spec.c_t, spec.cost_model, ctx.c_i[:, None])
    cap = np.minimum(spec.p_m, p_t)
    alpha = ctx.bids[:, None]
    p_c = ctx.p_c[:, None]
    if spec.cost_model == "linear":
        res = power_max_bs_utility(spec.scheme, ctx.lb, spec.a, alpha, ctx.c_i[:, None],
                                   cap, p_c=p_c)
    else:
        res = numeric_argmax_utility(spec.scheme, ctx.lb, spec.a, alpha, ctx.cost, cap,
                                     p_c=p_c)
    power = np.asarray(res.power)
    achieved = np.asarray(res.achieved_rate)
    cost = ctx.cost(power)
    utility = spec.a * achieved / MBPS - alpha * (power + p_c) - cost
    # P* never exceeds the cap; the slack only absorbs rounding in its inverse
    usable = ctx.ok & (cost <= spec.c_t * (1 + 1e-9))
    g = WeightedBipartite(np.where(usable, utility, -np.inf), MAXIMIZE)
    return g, optimal_maximal_matching(g), power, achieved, cost


def proposed_bs_util_max(s: Scenario, bids: BidProfile, spec: MechanismSpec) -> AuctionOutcome:
    ctx = _Ctx(s, spec, bids)
    g, m, power, achieved, cost = _bs_util_allocation(ctx)
    pay = {}
    for i, j in m.pairs:
        rest = _without(g, relay=i)
        if rest is None:
            raise InsufficientCompetition(f"no maximal matching without relay {i}")
        pay[i] = m.weight - rest + ctx.bids[i] * (power[i, j] + ctx.p_c[i])
    return ctx.outcome(MechanismKind.PROPOSED_BS_UTIL_MAX, m, power, achieved, cost, pay)


def full_info_baseline(s: Scenario, spec: MechanismSpec) -> AuctionOutcome:
    """Same allocation as :func:`proposed_bs_util_max`, paying true incurred cost."""
    ctx = _Ctx(s, spec, None)
    g, m, power, achieved, cost = _bs_util_allocation(ctx)
    pay = {i: s.alphas[i] * (power[i, j] + ctx.p_c[i]) for i, j in m.pairs}
    return ctx.outcome(MechanismKind.FULL_INFO_BASELINE, m, power, achieved, cost, pay)


def vcg_const_power(s: Scenario, bids: BidProfile, spec: MechanismSpec) -> AuctionOutcome:
    """Pick the D cheapest declared costs; pay each winner the (D+1)-st.

    Every assignment of the winners has the same total declared cost, so
    winners go to destinations in rank order. The auction looks at declared
    cost only: a selection-relaying winner below the threshold for its
    destination is still assigned, and the reported rate is then the
    direct-retransmission value.
    """
    ctx = _Ctx(s, spec, bids)
    P = spec.fixed_power_p
    full = np.full((ctx.R, ctx.D), P)
    achieved, _ = rate(spec.scheme, ctx.lb, full)
    cost = ctx.cost(full)
    declared = ctx.bids * (P + ctx.p_c)
    order = sorted(range(ctx.R), key=lambda r: (declared[r], r))
    winners = order[:ctx.D]
    price = declared[order[ctx.D]]
    m = Matching(tuple((r, j) for j, r in enumerate(winners)), math.fsum(declared[winners]))
    pay = {r: price for r in winners}
    return ctx.outcome(MechanismKind.VCG_CONST_POWER, m, P, achieved, cost, pay)


def vcg_const_rate(s: Scenario, bids: BidProfile, spec: MechanismSpec) -> AuctionOutcome:
    """Minimise total declared cost at the target rates, ignoring interference."""
    ctx = _Ctx(s, spec, bids)
    target = spec.targets(ctx.D)
    power = required_power(spec.scheme, ctx.lb, target[None, :])
    usable = ctx.ok & np.isfinite(power) & (power <= spec.p_m)
    power = np.where(usable, power, 0.0)
    achieved, _ = rate(spec.scheme, ctx.lb, power)
    cost = ctx.cost(power)
    own = ctx.bids[:, None] * (power + ctx.p_c[:, None])
    g = WeightedBipartite(np.where(usable, own, np.inf), MINIMIZE)
    m = optimal_maximal_matching(g)
    pay = _clarke_payments(g, m, own)
    return ctx.outcome(MechanismKind.VCG_CONST_RATE, m, power, achieved, cost, pay)


_DISPATCH = {
    MechanismKind.PROPOSED_CONST_POWER: proposed_const_power,
    MechanismKind.PROPOSED_CONST_RATE: proposed_const_rate,
    MechanismKind.PROPOSED_BS_UTIL_MAX: proposed_bs_util_max,
    MechanismKind.VCG_CONST_POWER: vcg_const_power,
    MechanismKind.VCG_CONST_RATE: vcg_const_rate,
}


def run_mechanism(s: Scenario, spec: MechanismSpec, bids: BidProfile | None = None
                  ) -> AuctionOutcome:
    """Run ``spec.kind`` on ``s``; truthful bids when ``bids`` is omitted."""
    if spec.kind is MechanismKind.FULL_INFO_BASELINE:
        return full_info_baseline(s, spec)
    if bids is None:
        bids = BidProfile.truthful(s)
    return _DISPATCH[spec.kind](s, bids, spec)
