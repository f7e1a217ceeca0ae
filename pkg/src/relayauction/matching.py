"""Optimal maximal matchings on relay x destination bipartite graphs.

Excluded edges are any non-finite entries of the weight matrix. The fast
solver is a rectangular assignment; when no assignment serves every
destination it retries with one private dummy column per destination, so the
best matching of maximum cardinality is still reported. Among optimal matchings the one
with the lexicographically smallest pair list (by destination, then relay)
is returned; this choice is part of the contract because payments depend on
it.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

MINIMIZE = "minimize"
MAXIMIZE = "maximize"
BRUTE_FORCE_MAX_RELAYS = 8


class Uncoverable(ValueError):
    """The optimum leaves some destinations unserved.

    ``destinations`` holds their ids and ``matching`` the best matching of
    maximum cardinality, so callers can decide whether this is fatal.
    """

    def __init__(self, destinations, matching):
        self.destinations = frozenset(destinations)
        self.matching = matching
        super().__init__(f"destinations {sorted(self.destinations)} cannot be served")


class SizeLimit(ValueError):
    pass


@dataclass(frozen=True)
class WeightedBipartite:
    """``weight[r, d]`` is the edge value between relay ``r`` and destination ``d``."""

    weight: np.ndarray
    objective: str = MINIMIZE
    relay_ids: tuple = None
    destination_ids: tuple = None

    def __post_init__(self):
        w = np.array(self.weight, dtype=float)
        if w.ndim != 2:
            raise ValueError("weight must be a (relays, destinations) matrix")
        w.setflags(write=False)
        object.__setattr__(self, "weight", w)
        if self.objective not in (MINIMIZE, MAXIMIZE):
            raise ValueError(f"objective must be {MINIMIZE!r} or {MAXIMIZE!r}")
        R, D = w.shape
        rid = tuple(range(R)) if self.relay_ids is None else tuple(self.relay_ids)
        did = tuple(range(D)) if self.destination_ids is None else tuple(self.destination_ids)
        if len(rid) != R or len(did) != D:
            raise ValueError("id lists must match the weight matrix shape")
        if len(set(rid)) != R or len(set(did)) != D:
            raise ValueError("ids must be unique")
        if R < D:
            raise ValueError(f"need at least as many relays as destinations ({R} < {D})")
        object.__setattr__(self, "relay_ids", rid)
        object.__setattr__(self, "destination_ids", did)

    @property
    def num_relays(self) -> int:
        return self.weight.shape[0]

    @property
    def num_destinations(self) -> int:
        return self.weight.shape[1]

    @property
    def usable(self) -> np.ndarray:
        return np.isfinite(self.weight)

    def value(self, relay_id, destination_id) -> float:
        return float(self.weight[self.relay_ids.index(relay_id),
                                 self.destination_ids.index(destination_id)])


@dataclass(frozen=True)
class Matching:
    """Pairs ``(relay_id, destination_id)`` ordered by destination id."""

    pairs: tuple
    weight: float
    _by_destination: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_destination", {d: r for r, d in self.pairs})

    def relay_for(self, destination_id):
        return self._by_destination.get(destination_id)

    @property
    def relays(self) -> frozenset:
        return frozenset(r for r, _ in self.pairs)

    @property
    def destinations(self) -> frozenset:
        return frozenset(d for _, d in self.pairs)

    def as_set(self) -> frozenset:
        return frozenset(self.pairs)

    def __len__(self):
        return len(self.pairs)


def _tolerance(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    scale = float(np.max(np.abs(finite))) if finite.size else 0.0
    return 1e-9 * max(1.0, scale)


def _make_matching(g: WeightedBipartite, assignment) -> Matching:
    """``assignment`` maps destination index -> relay index (or None)."""
    pairs = []
    values = []
    for d in sorted(assignment, key=lambda k: g.destination_ids[k]):
        r = assignment[d]
        if r is None:
            continue
        pairs.append((g.relay_ids[r], g.destination_ids[d]))
        values.append(g.weight[r, d])
    return Matching(tuple(pairs), math.fsum(values))


def _finish(g: WeightedBipartite, assignment) -> Matching:
    m = _make_matching(g, assignment)
    missing = [g.destination_ids[d] for d, r in assignment.items() if r is None]
    if missing:
        raise Uncoverable(missing, m)
    return m


def _kuhn(adj, left, allowed):
    """True iff every vertex in ``left`` can be matched inside ``allowed``."""
    owner = {}

    def augment(u, seen):
        for v in adj[u]:
            if v in allowed and v not in seen:
                seen.add(v)
                if v not in owner or augment(owner[v], seen):
                    owner[v] = u
                    return True
        return False

    return all(augment(u, set()) for u in left)


def _duals(cost: np.ndarray, cols: np.ndarray, cap: float):
    """Optimal dual potentials certifying the assignment ``row i -> cols[i]``."""
    D, M = cost.shape
    free = np.ones(M, dtype=bool)
    free[cols] = False
    rows = np.arange(D)
    own = cost[rows, cols]
    u = np.minimum(cap, cost[:, free].min(axis=1, initial=np.inf))
    # edge k -> i: row i takes the column held by row k, which moves elsewhere
    step = cost[:, cols].T - own[:, None]
    for _ in range(D):
        new = np.minimum(u, np.min(u[:, None] + step, axis=0))
        if np.array_equal(new, u):
            break
        u = new
    v = np.zeros(M)
    v[cols] = own - u
    return u, v


def _lexicographic(cost, cols, tol, cap):
    """Lexicographically smallest optimal assignment (row order, column order).

    Every optimal assignment uses only edges that are tight under an optimal
    dual and covers every column with a negative potential, and any assignment
    with both properties is optimal. Rows greedily take their smallest tight
    column for which such a completion still exists.
    """
    D, M = cost.shape
    u, v = _duals(cost, cols, cap)
    with np.errstate(invalid="ignore"):
        tight = (cost - u[:, None] - v[None, :]) <= tol
    tight &= np.isfinite(cost)
    rr, cc = np.nonzero(tight)
    adj = [[] for _ in range(D)]
    col_adj = {}
    for i, j in zip(rr.tolist(), cc.tolist()):
        adj[i].append(j)
        col_adj.setdefault(j, []).append(i)
    must = set(np.flatnonzero(v < -tol).tolist())
    witness = [int(j) for j in cols]   # a known completion, while valid
    chosen = []
    used = set()
    for i in range(D):
        rest = range(i + 1, D)
        for j in adj[i]:
            if j in used:
                continue
            if witness is not None and j == witness[i]:
                break
            allowed = set(range(M)) - used - {j}
            open_must = [c for c in must if c in allowed]
            if _kuhn(adj, rest, allowed) and _kuhn(col_adj, open_must, set(rest)):
                witness = None
                break
        else:  # pragma: no cover - the optimal assignment always completes
            raise RuntimeError("tie-break lost feasibility")
        chosen.append(j)
        used.add(j)
    return chosen


def _relevant(c: np.ndarray, best: float) -> np.ndarray:
    """Mask of edges that can appear in a (near-)optimal full assignment.

    ``c`` is the (destination, relay) cost matrix and ``best`` the optimal
    total. An edge whose cost plus the cheapest possible choices of all
    other rows already exceeds ``best`` cannot be used; dropping such edges
    keeps very heavy, never-chosen edges from inflating tolerances.
    """
    row_min = c.min(axis=1)
    others = row_min.sum() - row_min
    slack = 1e-6 * (1.0 + abs(best) + float(np.abs(row_min).sum()))
    with np.errstate(invalid="ignore"):
        return np.isfinite(c) & (c + others[:, None] <= best + slack)


def _scale_tolerance(c: np.ndarray, mask: np.ndarray) -> float:
    return 1e-9 * max(1.0, float(np.max(np.abs(c[mask]), initial=0.0)))


def optimal_maximal_matching(g: WeightedBipartite) -> Matching:
    """Optimal matching covering as many destinations as possible.

    Raises :class:`Uncoverable` if the optimum leaves a destination unserved.
    """
    R, D = g.weight.shape
    if D == 0:
        return Matching((), 0.0)
    order_r = sorted(range(R), key=g.relay_ids.__getitem__)
    order_d = sorted(range(D), key=g.destination_ids.__getitem__)
    if order_r != list(range(R)) or order_d != list(range(D)):
        g = WeightedBipartite(g.weight[np.ix_(order_r, order_d)], g.objective,
                              tuple(g.relay_ids[k] for k in order_r),
                              tuple(g.destination_ids[k] for k in order_d))
    c = g.weight.T.copy()
    if g.objective == MAXIMIZE:
        c = -c
    c[~np.isfinite(c)] = np.inf
    try:
        rows, cols = linear_sum_assignment(c)
    except ValueError:
        return _partial(g, c)
    cols = cols[np.argsort(rows)]
    keep = _relevant(c, float(c[np.arange(D), cols].sum()))
    pruned = np.where(keep, c, np.inf)
    scale = float(np.max(np.abs(pruned[keep]), initial=0.0))
    cap = 2.0 * D * scale + scale + 1.0
    chosen = _lexicographic(pruned, cols, _scale_tolerance(c, keep), cap)
    return _finish(g, dict(enumerate(chosen)))


def _partial(g: WeightedBipartite, c: np.ndarray) -> Matching:
    """Maximum-cardinality optimum via one private dummy column per destination."""
    D, R = c.shape
    usable = np.isfinite(c)
    scale = float(np.max(np.abs(c[usable]), initial=0.0))
    big = 4.0 * D * scale + 1.0
    cost = np.full((D, R + D), np.inf)
    cost[:, :R] = c
    cost[np.arange(D), R + np.arange(D)] = big
    rows, cols = linear_sum_assignment(cost)
    cols = cols[np.argsort(rows)]
    chosen = _lexicographic(cost, cols, _scale_tolerance(c, usable), 2.0 * big * (D + 1))
    return _finish(g, {d: (j if j < R else None) for d, j in enumerate(chosen)})


def brute_force_matching(g: WeightedBipartite) -> Matching:
    """Exhaustive oracle with the same contract as :func:`optimal_maximal_matching`."""
    R, D = g.weight.shape
    if R > BRUTE_FORCE_MAX_RELAYS:
        raise SizeLimit(f"brute force handles at most {BRUTE_FORCE_MAX_RELAYS} relays")
    if D == 0:
        return Matching((), 0.0)
    w = g.weight if g.objective == MINIMIZE else -g.weight
    w = np.where(np.isfinite(w), w, np.inf)
    tol = _tolerance(w)
    for k in range(D, -1, -1):
        if k < D:
            tol = _tolerance(w)
        best_value = np.inf
        candidates = []
        perms = np.array(list(itertools.permutations(range(R), k)), dtype=int)
        perms = perms.reshape(len(perms), k)
        for dests in itertools.combinations(range(D), k):
            totals = w[perms, list(dests)].sum(axis=1) if k else np.zeros(1)
            ok = np.isfinite(totals)
            if not ok.any():
                continue
            low = float(totals[ok].min())
            best_value = min(best_value, low)
            for idx in np.flatnonzero(ok & (totals <= low + tol)):
                candidates.append((float(totals[idx]), dests, tuple(perms[idx])))
        if not np.isfinite(best_value):
            continue
        if k == D:
            tol = _scale_tolerance(w.T, _relevant(w.T, best_value))
        winners = [(dests, relays) for total, dests, relays in candidates
                   if total <= best_value + tol]

        def key(item):
            dests, relays = item
            return sorted((g.destination_ids[d], g.relay_ids[r]) for d, r in zip(dests, relays))

        dests, relays = min(winners, key=key)
        assignment = {d: None for d in range(D)}
        assignment.update(zip(dests, relays))
        return _finish(g, assignment)
    raise AssertionError("unreachable: the empty matching always exists")


def optimal_weight(weight, objective: str = MINIMIZE) -> float:
    """Weight of an optimal matching covering every destination (column).

    Skips tie-breaking and id bookkeeping; used where only the value
    matters, such as payment computations. Raises :class:`Uncoverable`
    (with ``matching=None``) when no such matching exists.
    """
    w = np.asarray(weight, dtype=float)
    R, D = w.shape
    if D == 0:
        return 0.0
    cost = w.T if objective == MINIMIZE else -w.T
    cost = np.where(np.isfinite(cost), cost, np.inf)
    try:
        rows, cols = linear_sum_assignment(cost)
    except ValueError:
        raise Uncoverable((), None) from None
    return math.fsum(w[cols[np.argsort(rows)], np.arange(D)])


def matching_without(g: WeightedBipartite, excluded_relays=(), excluded_destinations=(),
                     solver=optimal_maximal_matching) -> Matching:
    """Optimal matching of the subgraph without the given relay/destination ids."""
    keep_r = [k for k, r in enumerate(g.relay_ids) if r not in set(excluded_relays)]
    keep_d = [k for k, d in enumerate(g.destination_ids) if d not in set(excluded_destinations)]
    sub = WeightedBipartite(
        g.weight[np.ix_(keep_r, keep_d)], g.objective,
        tuple(g.relay_ids[k] for k in keep_r),
        tuple(g.destination_ids[k] for k in keep_d))
    return solver(sub)
