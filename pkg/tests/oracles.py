"""Independent reference implementations used only by the test suite.

Nothing here calls the package's matching or payment code; the oracles
enumerate assignments with itertools and evaluate rates with plain math.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from relayauction.channel import MBPS, interference_cost, link_budget
from relayauction.power import required_power
from relayauction.relaying import SchemeTag, rate


def half_rate(W, x):
    return 0.5 * W * math.log2(1.0 + x)


def scalar_rate(tag, W, sinr_si, sinr_sj, s_ij, zeta=1.0):
    """Per-link rate written out from the textbook formulas."""
    if tag is SchemeTag.NORMAL:
        return half_rate(W, s_ij)
    if tag is SchemeTag.AMPLIFY_FORWARD:
        return half_rate(W, sinr_sj + sinr_si * s_ij / (1.0 + sinr_si + s_ij))
    if tag is SchemeTag.DECODE_FORWARD:
        return min(half_rate(W, sinr_si), half_rate(W, sinr_sj + s_ij))
    if sinr_si < zeta:
        return half_rate(W, 2.0 * sinr_sj)
    return half_rate(W, sinr_sj + s_ij)


def full_assignments(R, D):
    """Every injective destination -> relay map, as tuples indexed by destination."""
    return itertools.permutations(range(R), D)


def assignment_weight(w, relays):
    return math.fsum(w[r, j] for j, r in enumerate(relays))


def min_full_weight(w, skip_relay=None):
    best = math.inf
    for relays in full_assignments(*w.shape):
        if skip_relay is not None and skip_relay in relays:
            continue
        best = min(best, assignment_weight(w, relays))
    return best


def proposed_weights(s, spec, bids, const_rate=False):
    """Edge weights, per-edge rates (Mbps) and declared costs, edge by edge."""
    R, D = s.num_relays, s.num_destinations
    p_c = s.processing_power()
    c = np.broadcast_to(np.asarray(spec.c_i, dtype=float), (R,))
    w = np.full((R, D), np.inf)
    gamma = np.zeros((R, D))
    own = np.zeros((R, D))
    target = np.broadcast_to(np.asarray(spec.target_rates, dtype=float), (D,))
    for i in range(R):
        for j in range(D):
            lb = link_budget(s, i, j)
            if const_rate:
                p = float(required_power(spec.scheme, lb, target[j]))
                if not (math.isfinite(p) and p <= spec.p_m):
                    continue
                g = target[j] / MBPS
            else:
                p = spec.fixed_power_p
                g, _ = rate(spec.scheme, lb, p)
                g /= MBPS
            r_ok = rate(spec.scheme, lb, p)[1]
            cost = interference_cost(s, i, j, p, spec.cost_model, c[i])
            own[i, j] = bids[i] * (p + p_c[i])
            gamma[i, j] = g
            if r_ok and cost <= spec.c_t and g > 0:
                w[i, j] = own[i, j] / g
    return w, gamma, own


def brute_force_payment(w, gamma, own, winner, assigned_dest, assigned_edge=False):
    """max over admissible full matchings containing ``winner`` of the payment formula.

    Admissible: total weight no larger than the best matching without the
    winner. The rate and declared-cost terms come from the winner's edge in
    the candidate matching, or from its actual edge if ``assigned_edge``.
    """
    R, D = w.shape
    rest = min_full_weight(w, skip_relay=winner)
    tol = 1e-9 * max(1.0, abs(rest))
    best = -math.inf
    for relays in itertools.permutations(range(R), D):
        if winner not in relays:
            continue
        total = assignment_weight(w, relays)
        if not math.isfinite(total) or total > rest + tol:
            continue
        e = assigned_dest if assigned_edge else relays.index(winner)
        best = max(best, rest * gamma[winner, e] + own[winner, e] - gamma[winner, e] * total)
    return best


def grid_argmax(f, lo, hi, n=10_001):
    xs = np.linspace(lo, hi, n)
    vals = f(xs)
    return float(xs[int(np.argmax(vals))])
