"""Relay transmit powers: minimum power for a target rate, and the power that
maximises a pair's contribution to the BS utility.

Revenue ``a`` is priced per Mbps; valuations and linear interference
coefficients are per W. All solvers broadcast over arrays of links.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import MBPS, LinkBudget
from .relaying import Scheme, SchemeTag, df_crossover_power, eligible, rate

LN2 = math.log(2.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class InfeasibleTarget(ValueError):
    """No finite transmit power reaches the requested rate."""


class UnsupportedCostModel(ValueError):
    """A closed-form solver was asked to handle a non-linear interference cost."""


@dataclass(frozen=True)
class PowerResult:
    power: np.ndarray | float
    feasible: np.ndarray | bool
    clamped: np.ndarray | bool
    achieved_rate: np.ndarray | float


def _pack(power, feasible, clamped, achieved):
    if np.ndim(power) == 0:
        return PowerResult(float(power), bool(feasible), bool(clamped), float(achieved))
    return PowerResult(np.asarray(power, dtype=float), np.asarray(feasible, dtype=bool),
                       np.asarray(clamped, dtype=bool), np.asarray(achieved, dtype=float))


def _per_watt(x, gamma):
    """x / gamma with 0/0 -> 0 and x/0 -> inf."""
    x = np.asarray(x, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x <= 0, 0.0, np.where(gamma > 0, x / gamma, np.inf))
    return out


def required_power(scheme: Scheme, lb: LinkBudget, target):
    """Minimal power meeting ``target`` bit/s; ``inf`` where unreachable or ineligible."""
    W = lb.bandwidth_w
    target = np.asarray(target, dtype=float)
    need = np.expm1(2.0 * target / W * LN2)          # 4^(target/W) - 1
    s_si = np.asarray(lb.sinr_si, dtype=float)
    s_sj = np.asarray(lb.sinr_sj, dtype=float)
    gap = need - s_sj
    tag = scheme.tag
    if tag is SchemeTag.NORMAL:
        x = need
    elif tag is SchemeTag.AMPLIFY_FORWARD:
        den = s_si - gap                              # 1 + S_si + S_sj - 4^(target/W)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(gap <= 0, 0.0,
                         np.where(den > 0, gap * (1.0 + s_si) / den, np.inf))
    elif tag is SchemeTag.DECODE_FORWARD:
        x = np.where(need > s_si, np.inf, np.maximum(gap, 0.0))
    else:
        x = np.where(s_si < scheme.zeta, np.inf, np.maximum(gap, 0.0))
    return _per_watt(x, lb.gamma_ij)


def power_for_rate(scheme: Scheme, lb: LinkBudget, target, p_max) -> PowerResult:
    """Minimum power with ``rate(scheme, lb, p) >= target``.

    ``feasible`` is False when the power exceeds ``p_max`` or the relay is
    ineligible. For a single link, an unreachable target raises
    :class:`InfeasibleTarget`; for arrays, unreachable entries carry ``inf``.
    """
    p = required_power(scheme, lb, target)
    ok = np.asarray(eligible(scheme, lb))
    if p.ndim == 0 and not np.isfinite(p) and ok:
        raise InfeasibleTarget(f"target {float(target):.6g} bit/s unreachable")
    feasible = np.isfinite(p) & (p <= p_max) & ok
    achieved, _ = rate(scheme, lb, np.where(np.isfinite(p), p, 0.0))
    achieved = np.where(np.isfinite(p), achieved, 0.0)
    return _pack(p, feasible, np.zeros_like(feasible), achieved)


def bs_pair_utility(scheme: Scheme, lb: LinkBudget, p, a, alpha, cost, p_c=0.0):
    """a * rate[Mbps] - alpha * (p + p_c) - cost, with ``cost`` already evaluated."""
    r, _ = rate(scheme, lb, p)
    return a * np.asarray(r) / MBPS - alpha * (np.asarray(p) + p_c) - cost


def _af_stationary(lb: LinkBudget, a, K):
    """Larger root (in p) of the AF first-order condition; negative if none."""
    W = lb.bandwidth_w / MBPS
    s_si = np.asarray(lb.sinr_si, dtype=float)
    s_sj = np.asarray(lb.sinr_sj, dtype=float)
    g = np.asarray(lb.gamma_ij, dtype=float)
    A = 1.0 + s_si + s_sj
    B = (1.0 + s_si) * (2.0 + 2.0 * s_sj + s_si)
    rhs = a * W * s_si * (1.0 + s_si) * g / (2.0 * LN2 * K)
    C0 = (1.0 + s_sj) * (1.0 + s_si) ** 2 - rhs
    disc = B * B - 4.0 * A * C0
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.where(disc >= 0,
                        # stable form of (-B + sqrt(disc)) / (2A)
                        -2.0 * C0 / (B + np.sqrt(np.maximum(disc, 0.0))),
                        -1.0)
        return np.where(g > 0, root / g, -1.0)


def power_max_bs_utility(scheme: Scheme, lb: LinkBudget, a, alpha, c, p_max,
                         cost_model: str = "linear", p_c=0.0) -> PowerResult:
    """Closed-form maximiser of ``a*rate - alpha*(p+p_c) - c*p`` on ``[0, p_max]``.

    Only valid for the linear interference cost; other models must go
    through :func:`numeric_argmax_utility`.
    """
    if cost_model != "linear" or callable(c):
        raise UnsupportedCostModel("closed forms need cost c * p")
    W = lb.bandwidth_w / MBPS
    K = np.asarray(alpha, dtype=float) + np.asarray(c, dtype=float)
    g = np.asarray(lb.gamma_ij, dtype=float)
    s_sj = np.asarray(lb.sinr_sj, dtype=float)
    p_max = np.asarray(p_max, dtype=float)
    tag = scheme.tag

    with np.errstate(divide="ignore", invalid="ignore"):
        if tag is SchemeTag.NORMAL:
            raw = a * W / (2.0 * LN2 * K) - 1.0 / g
        elif tag is SchemeTag.AMPLIFY_FORWARD:
            raw = _af_stationary(lb, a, K)
        else:
            raw = a * W / (2.0 * LN2 * K) - (1.0 + s_sj) / g
        raw = np.where(np.isnan(raw), -np.inf, raw)
        clamped = (raw < 0) | (raw > p_max)
        power = np.clip(raw, 0.0, p_max)

        if tag is SchemeTag.DECODE_FORWARD:
            p_o = np.asarray(df_crossover_power(lb), dtype=float)
            p_o = np.where(np.isnan(p_o), 0.0, p_o)
            saturated = p_o <= 0          # rate pinned at the source->relay cap
            two_case = (p_o > 0) & (p_o < p_max)
            p1 = np.clip(raw, 0.0, np.maximum(p_o, 0.0))
            u1 = bs_pair_utility(scheme, lb, p1, a, alpha, np.asarray(c) * p1, p_c)
            p2 = np.maximum(p_o, 0.0)
            u2 = bs_pair_utility(scheme, lb, p2, a, alpha, np.asarray(c) * p2, p_c)
            case2 = np.where(u1 > u2, p1, p2)
            power = np.where(saturated, 0.0, np.where(two_case, case2, power))
            clamped = np.where(saturated, False, np.where(two_case, raw < 0, clamped))

    ok = np.asarray(eligible(scheme, lb))
    power = np.where(ok, power, 0.0)
    achieved, _ = rate(scheme, lb, power)
    return _pack(power, ok & np.ones_like(power, dtype=bool), clamped & ok, achieved)


def golden_section_max(f, lo, hi, tol):
    """Vectorised golden-section search for a maximiser of ``f`` on ``[lo, hi]``."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    width = np.max(hi - lo) if np.size(hi) else 0.0
    n_iter = 0 if width <= tol else int(math.ceil(math.log(tol / width) / math.log(GOLDEN)))
    for _ in range(n_iter):
        right = f1 < f2                     # maximiser lies in [x1, hi]
        lo = np.where(right, x1, lo)
        hi = np.where(right, hi, x2)
        new_x1 = np.where(right, x2, hi - GOLDEN * (hi - lo))
        new_x2 = np.where(right, lo + GOLDEN * (hi - lo), x1)
        f_new = f(np.where(right, new_x2, new_x1))
        f1, f2 = np.where(right, f2, f_new), np.where(right, f_new, f1)
        x1, x2 = new_x1, new_x2
    return 0.5 * (lo + hi)


def numeric_argmax_utility(scheme: Scheme, lb: LinkBudget, a, alpha, cost_fn, p_max,
                           p_c=0.0, grid_points: int = 1024, rtol: float = 1e-9
                           ) -> PowerResult:
    """Grid search plus golden-section refinement of the pair utility.

    ``cost_fn(p)`` must broadcast like the link arrays, with an optional
    leading grid axis.
    """
    p_max = np.broadcast_to(np.asarray(p_max, dtype=float), np.shape(lb.gamma_ij))
    p_max = np.where(np.isfinite(p_max), p_max, 0.0)

    def utility(p):
        return bs_pair_utility(scheme, lb, p, a, alpha, cost_fn(p), p_c)

    frac = np.linspace(0.0, 1.0, grid_points).reshape((-1,) + (1,) * p_max.ndim)
    grid = frac * p_max
    values = utility(grid)
    k = np.argmax(values, axis=0)
    step = p_max / (grid_points - 1)
    lo = np.clip((k - 1) * step, 0.0, p_max)
    hi = np.clip((k + 1) * step, 0.0, p_max)
    tol = rtol * float(np.max(p_max)) if np.size(p_max) else 0.0
    x = golden_section_max(utility, lo, hi, max(tol, 1e-300))

    candidates = np.stack([np.zeros_like(p_max), np.take_along_axis(
        grid, k[None, ...], axis=0)[0], x, p_max])
    best = np.argmax(utility(candidates), axis=0)
    power = np.take_along_axis(candidates, best[None, ...], axis=0)[0]

    ok = np.asarray(eligible(scheme, lb))
    power = np.where(ok, power, 0.0)
    achieved, _ = rate(scheme, lb, power)
    clamped = np.zeros(np.shape(power), dtype=bool)
    return _pack(power, ok & np.ones(np.shape(power), dtype=bool), clamped, achieved)
