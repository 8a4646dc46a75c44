"""Many-objective selection by non-dominated sorting with niching.

Candidates maximize every objective. Whole Pareto fronts are taken in
order until one no longer fits; that boundary front is split by
associating candidates with reference directions and filling the least
crowded niches first.

Two deliberate simplifications against the canonical method, both
forced by objective counts in the dozens: reference directions are
sampled uniformly on the unit simplex (one per selection slot) instead
of a structured lattice, and normalization is per-objective min-max
over the candidates under consideration instead of the
ideal-point/intercept construction. Niching is fully deterministic:
least-filled niche wins (lowest direction index on ties) and within a
niche the member closest to the direction's ray wins (lowest candidate
index on ties).
"""

from __future__ import annotations

import numpy as np

from .core import UsageError


def dominates(a, b) -> bool:
    """True if a is at least as good everywhere and better somewhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return bool(np.all(a >= b) and np.any(a > b))


def non_dominated_sort(objectives) -> list:
    """Partition candidate indices into Pareto fronts, best first."""
    obj = np.asarray(objectives, dtype=np.float64)
    n = obj.shape[0]
    dominated_by = [[] for _ in range(n)]  # i dominates these
    n_dominating = np.zeros(n, dtype=np.int64)
    for i in range(n):
        ge = np.all(obj[i] >= obj, axis=1)
        gt = np.any(obj[i] > obj, axis=1)
        dom_i = ge & gt  # i dominates j
        dom_i[i] = False
        dominated_by[i] = np.nonzero(dom_i)[0]
    for i in range(n):
        for j in dominated_by[i]:
            n_dominating[j] += 1
    fronts = []
    current = sorted(np.nonzero(n_dominating == 0)[0].tolist())
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                n_dominating[j] -= 1
                if n_dominating[j] == 0:
                    nxt.append(int(j))
        current = sorted(set(nxt))
    return fronts


def simplex_directions(n_dir: int, dim: int, rng) -> np.ndarray:
    """n_dir directions sampled uniformly on the unit simplex."""
    g = -np.log(rng.uniform(size=(n_dir, dim)))
    return g / g.sum(axis=1, keepdims=True)


def _associate(normalized, directions):
    """Perpendicular distance of each point to each direction's ray."""
    unit = directions / np.sqrt((directions ** 2).sum(axis=1, keepdims=True))
    proj = normalized @ unit.T  # (n, n_dir) scalar projections
    d2 = (normalized ** 2).sum(axis=1, keepdims=True) - proj ** 2
    return np.sqrt(np.maximum(d2, 0.0))


def nsga3_select(objectives, k: int, seed: int) -> list:
    """Pick k candidate indices from successive Pareto fronts."""
    obj = np.asarray(objectives, dtype=np.float64)
    n = obj.shape[0]
    if n < k:
        raise UsageError(f"need at least k={k} candidates, got {n}")
    if k == 0:
        return []
    fronts = non_dominated_sort(obj)

    chosen = []
    boundary = None
    for front in fronts:
        if len(chosen) + len(front) <= k:
            chosen.extend(front)
            if len(chosen) == k:
                return chosen
        else:
            boundary = front
            break

    # split the boundary front by niche counts
    pool = chosen + boundary
    sub = obj[pool]
    lo = sub.min(axis=0)
    span = sub.max(axis=0) - lo
    span[span == 0.0] = 1.0
    normalized = (sub - lo) / span

    rng = np.random.default_rng(np.random.PCG64(seed))
    directions = simplex_directions(k, obj.shape[1], rng)
    dist = _associate(normalized, directions)
    niche_of = np.argmin(dist, axis=1)  # ties -> lowest direction

    counts = np.zeros(k, dtype=np.int64)
    for local in range(len(chosen)):
        counts[niche_of[local]] += 1

    remaining = list(range(len(chosen), len(pool)))  # boundary, local idx
    while len(chosen) < k:
        # least-filled direction that still has unassigned members
        best_dir = None
        for d in range(k):
            if any(niche_of[l] == d for l in remaining):
                if best_dir is None or counts[d] < counts[best_dir]:
                    best_dir = d
        members = [l for l in remaining if niche_of[l] == best_dir]
        pick = min(members, key=lambda l: (dist[l, best_dir], l))
        chosen.append(pool[pick])
        remaining.remove(pick)
        counts[best_dir] += 1
    return chosen
