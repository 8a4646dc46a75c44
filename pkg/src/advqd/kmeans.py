"""Seeded k-means with k-means++ initialization.

Built in-repo rather than pulled from a library because selection must
be bit-reproducible from a 64-bit seed across platforms, and the
tie-break rules (lowest index everywhere) are part of the replay
contract. Lloyd iterations stop at an assignment fixpoint or after 100
rounds; a cluster that comes up empty is re-seeded with the point
currently farthest from its own centroid.
"""

from __future__ import annotations

import numpy as np

from .core import UsageError

MAX_ITER = 100


def kmeans(points, k: int, seed: int, objective_trace=None):
    """Cluster points into k groups. Returns (assignments, centroids).

    Pass a list as objective_trace to record the within-cluster sum of
    squares after each assignment step."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise UsageError("points must be a 2-D array-like")
    n = pts.shape[0]
    if n < k:
        raise UsageError(f"need at least k={k} points, got {n}")
    if k < 1:
        raise UsageError("k must be positive")

    rng = np.random.default_rng(np.random.PCG64(seed))
    centroids = _plus_plus_seeding(pts, k, rng)

    assign = None
    for _ in range(MAX_ITER):
        d2 = ((pts[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)  # ties resolve to lowest index
        if objective_trace is not None:
            objective_trace.append(
                float(d2[np.arange(n), new_assign].sum()))
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign

        own_d2 = d2[np.arange(n), assign].copy()
        for c in range(k):
            members = assign == c
            if members.any():
                centroids[c] = pts[members].mean(axis=0)
            else:
                far = int(np.argmax(own_d2))
                centroids[c] = pts[far]
                own_d2[far] = 0.0  # each empty cluster takes a distinct point
    return assign, centroids


def _plus_plus_seeding(pts, k, rng):
    n = pts.shape[0]
    centroids = np.empty((k, pts.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = pts[first]
    d2 = ((pts - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))  # all remaining points coincide
        centroids[c] = pts[idx]
        d2 = np.minimum(d2, ((pts - centroids[c]) ** 2).sum(axis=1))
    return centroids


def kmeans_objective(points, assign, centroids) -> float:
    pts = np.asarray(points, dtype=np.float64)
    return float(((pts - centroids[assign]) ** 2).sum())
