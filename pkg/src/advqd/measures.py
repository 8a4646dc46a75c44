"""The six set-level measures computed from a round-robin fitness matrix.

All operate on a red-perspective matrix (rows = red solutions, columns
= blue solutions, entries in [0,1] with f_red + f_blue = 1); blue-side
measures are the same functions applied to the transposed complement.
Wins and losses are strict: an entry of exactly 0.5 is a tie and counts
for neither side. Every set-level value follows the max/min composition
of its per-solution form:

    win rate    max over the set of (fraction of opponents beaten)
    elo score   max over the set of the solution's pooled rating
                percentile
    robustness  max over the set of (worst fitness across opponents)
    coverage    fraction of the set's ranking-vector clusters that are
                distinct, clustering pooled over ALL same-side solutions
    expertise   worst-case best response: min over opponents of the
                set's max fitness
    aqd score   exact minimum number of opponents needed to beat every
                set member at least once (UNBOUNDED if one never loses)
"""

from __future__ import annotations

import math

import numpy as np

from .core import UsageError
from .kmeans import kmeans
from .rng import COVERAGE, ELO, derive_seed
from .selection import ranking_vector

UNBOUNDED = math.inf


def _rows_view(values, rows):
    values = np.asarray(values, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size == 0:
        raise UsageError("measure needs a non-empty row subset")
    return values[rows]


def win_rate(values, rows) -> float:
    """Max over the subset of the per-row strict-win percentage."""
    sub = _rows_view(values, rows)
    per_row = (sub > 0.5).mean(axis=1)
    return float(per_row.max() * 100.0)


def robustness(values, rows) -> float:
    """Max over the subset of each row's worst entry."""
    sub = _rows_view(values, rows)
    return float(sub.min(axis=1).max())


def expertise(values, rows) -> float:
    """Min over columns of the subset's best entry (worst counter)."""
    sub = _rows_view(values, rows)
    return float(sub.max(axis=0).min())


def coverage(values, rows, k: int, seed: int) -> float:
    """Distinct ranking-vector clusters hit by the subset, as a percentage.

    Clustering runs over every row of the matrix (the pooled population
    of this side), so subsets from different variants land in one shared
    partition."""
    values = np.asarray(values, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size == 0:
        raise UsageError("coverage needs a non-empty row subset")
    if values.shape[0] < k:
        raise UsageError(
            f"pooled population {values.shape[0]} is smaller than k={k}")
    vectors = np.stack([ranking_vector(values[i])
                        for i in range(values.shape[0])])
    assign, _ = kmeans(vectors, k, seed)
    hit = {int(assign[i]) for i in rows}
    return float(len(hit) / rows.size * 100.0)


def _greedy_cover(loses: np.ndarray) -> list:
    """Greedy column cover; upper bound for the exact search."""
    n_rows = loses.shape[0]
    uncovered = np.ones(n_rows, dtype=bool)
    picked = []
    while uncovered.any():
        gain = (loses & uncovered[:, None]).sum(axis=0)
        j = int(np.argmax(gain))    # ties: lowest index
        if gain[j] == 0:
            return None
        picked.append(j)
        uncovered &= ~loses[:, j]
    return picked


def aqd_score(values, rows):
    """Exact minimum number of columns that defeat every subset row.

    A row is defeated by a column when the entry is strictly below 0.5.
    Returns UNBOUNDED when some row never loses. Exact search: columns
    reduced to distinct maximal loss patterns, then depth-limited
    branching on the hardest uncovered row, deepening 1, 2, ... up to
    the greedy bound."""
    sub = _rows_view(values, rows)
    loses = sub < 0.5
    if not loses.any(axis=1).all():
        return UNBOUNDED
    n_rows = sub.shape[0]

    # distinct column patterns as row bitmasks, dominated ones dropped
    masks = set()
    for j in range(sub.shape[1]):
        m = 0
        for i in range(n_rows):
            if loses[i, j]:
                m |= 1 << i
        if m:
            masks.add(m)
    masks = [m for m in masks
             if not any(m != o and m & o == m for o in masks)]
    masks.sort(reverse=True)

    ub = len(_greedy_cover(loses))
    full = (1 << n_rows) - 1

    covers_row = [[m for m in masks if m >> i & 1] for i in range(n_rows)]

    def search(covered: int, depth: int) -> bool:
        if covered == full:
            return True
        if depth == 0:
            return False
        # branch on the uncovered row with the fewest candidate columns
        best_row, best_opts = -1, None
        for i in range(n_rows):
            if covered >> i & 1:
                continue
            opts = [m for m in covers_row[i] if m & ~covered]
            if best_opts is None or len(opts) < len(best_opts):
                best_row, best_opts = i, opts
        if not best_opts:
            return False
        return any(search(covered | m, depth - 1) for m in best_opts)

    for size in range(1, ub + 1):
        if search(0, size):
            return size
    return ub


def elo_ratings(per_rep, seed: int, n_passes: int = 10, k_factor: float = 16.0,
                initial: float = 1000.0, scale: float = 400.0):
    """Ratings for every row and column solution from the duel list.

    Each (row, column, repetition) duel is one match: win above 0.5,
    draw at exactly 0.5. Matches are replayed in n_passes seeded uniform
    shuffles of the full list, Elo logistic expectation with the given
    scale, symmetric K-factor updates. Returns (ratings_red,
    ratings_blue)."""
    per_rep = np.asarray(per_rep, dtype=np.float64)
    n_red, n_blue, reps = per_rep.shape
    ratings_red = np.full(n_red, initial)
    ratings_blue = np.full(n_blue, initial)
    matches = [(i, j, r) for i in range(n_red) for j in range(n_blue)
               for r in range(reps)]
    rng = np.random.default_rng(np.random.PCG64(derive_seed(seed, (ELO,))))
    for _ in range(n_passes):
        for m in rng.permutation(len(matches)):
            i, j, r = matches[m]
            f = per_rep[i, j, r]
            s_red = 1.0 if f > 0.5 else (0.5 if f == 0.5 else 0.0)
            e_red = 1.0 / (1.0 + 10.0 ** ((ratings_blue[j] - ratings_red[i])
                                          / scale))
            ratings_red[i] += k_factor * (s_red - e_red)
            ratings_blue[j] += k_factor * ((1.0 - s_red) - (1.0 - e_red))
    return ratings_red, ratings_blue


def rating_percentiles(ratings) -> np.ndarray:
    """Rank-normalize ratings to [0,100]%, stable order on ties."""
    ratings = np.asarray(ratings, dtype=np.float64)
    n = ratings.shape[0]
    if n == 1:
        return np.array([100.0])
    order = np.argsort(ratings, kind="stable")
    pct = np.empty(n)
    pct[order] = 100.0 * np.arange(n) / (n - 1)
    return pct


def elo_score(percentiles, rows) -> float:
    """Set-level score: best pooled percentile among the subset."""
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size == 0:
        raise UsageError("measure needs a non-empty row subset")
    return float(np.asarray(percentiles)[rows].max())


MEASURE_NAMES = ("Win rate", "ELO Score", "Robustness", "Coverage",
                 "Expertise", "AQD-Score")


def measure_sets(values, percentiles, sets, k: int, cov_seed: int) -> dict:
    """All six measures for each labeled row subset of one side.

    `values` is this side's perspective matrix (rows = its solutions),
    `percentiles` its solutions' pooled Elo percentiles, `sets` maps a
    set key to its row indices, `k` is the coverage cluster count.
    Returns {key: {measure name: value}}."""
    out = {}
    for key, rows in sets.items():
        out[key] = {
            "Win rate": win_rate(values, rows),
            "ELO Score": elo_score(percentiles, rows),
            "Robustness": robustness(values, rows),
            "Coverage": coverage(values, rows, k, cov_seed),
            "Expertise": expertise(values, rows),
            "AQD-Score": aqd_score(values, rows),
        }
    return out


def both_side_measures(per_rep, red_sets, blue_sets, k: int,
                       seed: int) -> dict:
    """Measure tables for both sides of one red-perspective duel tensor.

    One Elo replay rates every solution on both sides simultaneously;
    the blue side then sees the complement-transposed matrix. Returns
    {"red": {key: {...}}, "blue": {key: {...}}}."""
    per_rep = np.asarray(per_rep, dtype=np.float64)
    values_red = per_rep.mean(axis=2)
    values_blue = 1.0 - values_red.T
    ratings_red, ratings_blue = elo_ratings(per_rep, seed)
    return {
        "red": measure_sets(values_red, rating_percentiles(ratings_red),
                            red_sets, k, derive_seed(seed, (COVERAGE, 0))),
        "blue": measure_sets(values_blue, rating_percentiles(ratings_blue),
                             blue_sets, k, derive_seed(seed, (COVERAGE, 1))),
    }
