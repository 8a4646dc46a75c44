"""Growing unstructured archive with bounded cell count.

Cells are created on the fly: while under capacity every insertion
founds a new cell whose centroid is the insertion's behavior. At
capacity, a behavior farther from every centroid than the closest
existing centroid pair is from each other triggers growth: the closest
pair donates one member (the one with the smaller distance to its own
nearest neighbor; the pair's second member on the tie that this rule
always produces, since both share the same nearest-neighbor distance),
and the freed slot is re-founded at the new behavior. Anything else can
only replace its cell's elite by strictly better fitness.

Each cell keeps a backup list of every elite it has held (capped), used
to repair cells whose elite no longer maps to them after the centroid
set changes: the repaired elite is the highest-fitness backup entry
that maps to the cell, earliest on ties, or the current elite if none
maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Genome, UsageError
from .serial import sparse_to_vec, vec_to_list, vec_to_sparse


@dataclass(frozen=True)
class Elite:
    genome: Genome
    fitness: float
    behavior: np.ndarray


def find_cell(centroids, b) -> int:
    """Index of the centroid nearest to b (Euclidean, lowest index wins)."""
    if len(centroids) == 0:
        raise UsageError("find_cell on an archive with no cells")
    c = np.stack(centroids)
    d = np.sqrt(((c - np.asarray(b, dtype=np.float64)) ** 2).sum(axis=1))
    return int(np.argmin(d))


def min_pairwise_distance(centroids):
    """Smallest centroid-to-centroid distance and its (lowest) index pair."""
    n = len(centroids)
    if n < 2:
        raise UsageError("min_pairwise_distance needs at least two centroids")
    c = np.stack(centroids)
    ii, jj = np.triu_indices(n, k=1)  # pair order is lexicographic
    d = np.sqrt(((c[ii] - c[jj]) ** 2).sum(axis=1))
    m = int(np.argmin(d))
    return float(d[m]), (int(ii[m]), int(jj[m]))


class GrowingArchive:
    def __init__(self, n_cell: int, backup_cap: int = 32):
        if n_cell < 2:
            raise UsageError("archive capacity must be at least 2 "
                             "(the growth rule needs a centroid pair)")
        if backup_cap < 1:
            raise UsageError("backup cap must be positive")
        self.n_cell = n_cell
        self.backup_cap = backup_cap
        self.centroids: list = []
        self.elites: list = []
        self.backups: list = []

    def __len__(self) -> int:
        return len(self.centroids)

    def update(self, genome: Genome, fitness: float, behavior) -> str:
        """Insert one evaluation; returns the branch taken, one of
        "append", "grow", "replace", "reject"."""
        b = np.asarray(behavior, dtype=np.float64)
        if not np.all(np.isfinite(b)):
            raise UsageError("behavior descriptor must be finite")
        if not 0.0 <= fitness <= 1.0:
            raise UsageError("fitness must lie in [0, 1]")
        entry = Elite(genome, float(fitness), b.copy())

        if len(self.centroids) < self.n_cell:
            self.centroids.append(b.copy())
            self.elites.append(entry)
            self.backups.append([entry])
            return "append"

        d_min, (j, k) = min_pairwise_distance(self.centroids)
        d = float(np.sqrt(((np.stack(self.centroids) - b) ** 2)
                          .sum(axis=1).min()))
        if d > d_min:
            d_j = self._nearest_other(j)
            d_k = self._nearest_other(k)
            victim = j if d_j < d_k else k
            self.centroids[victim] = b.copy()
            self.elites[victim] = entry
            self.backups[victim] = [entry]
            self._repair_holes()
            return "grow"

        i = find_cell(self.centroids, b)
        if fitness > self.elites[i].fitness:
            self.elites[i] = entry
            self.backups[i].append(entry)
            self._trim_backups(i)
            return "replace"
        return "reject"

    def _nearest_other(self, i: int) -> float:
        c = np.stack(self.centroids)
        d = np.sqrt(((c - self.centroids[i]) ** 2).sum(axis=1))
        d[i] = np.inf
        return float(d.min())

    def _repair_holes(self) -> None:
        for i in range(len(self.centroids)):
            if find_cell(self.centroids, self.elites[i].behavior) == i:
                continue
            best = None
            for e in self.backups[i]:
                if find_cell(self.centroids, e.behavior) != i:
                    continue
                if best is None or e.fitness > best.fitness:
                    best = e
            if best is not None:
                self.elites[i] = best

    def _trim_backups(self, i: int) -> None:
        lst = self.backups[i]
        while len(lst) > self.backup_cap:
            # never drop the current elite, whatever its fitness
            drop = None
            for idx, e in enumerate(lst):
                if e is self.elites[i]:
                    continue
                if drop is None or e.fitness < lst[drop].fitness:
                    drop = idx
            del lst[drop]

    # persistence -----------------------------------------------------

    def to_dict(self) -> dict:
        def elite_dict(e: Elite) -> dict:
            return {"side": e.genome.side.value,
                    "env_id": e.genome.env_id,
                    "params": vec_to_list(e.genome.params),
                    "fitness": e.fitness,
                    "behavior": vec_to_sparse(e.behavior)}

        cells = []
        for c, e, bk in zip(self.centroids, self.elites, self.backups):
            cells.append({"centroid": vec_to_sparse(c),
                          "elite": elite_dict(e),
                          "backups": [elite_dict(x) for x in bk]})
        return {"n_cell": self.n_cell, "backup_cap": self.backup_cap,
                "cells": cells}

    @classmethod
    def from_dict(cls, data: dict, behavior_dim: int) -> "GrowingArchive":
        from .core import Side

        def elite_from(d: dict) -> Elite:
            g = Genome(side=Side(d["side"]),
                       params=np.array(d["params"], dtype=np.float64),
                       env_id=d["env_id"])
            return Elite(g, float(d["fitness"]),
                         sparse_to_vec(d["behavior"], behavior_dim))

        a = cls(int(data["n_cell"]), int(data["backup_cap"]))
        for cell in data["cells"]:
            a.centroids.append(sparse_to_vec(cell["centroid"], behavior_dim))
            elite = elite_from(cell["elite"])
            backups = [elite_from(x) for x in cell["backups"]]
            # identity between the elite and its backup-list copy is not
            # preserved across serialization; re-link by value so the
            # trim guard keeps protecting the elite
            for idx, e in enumerate(backups):
                if (e.fitness == elite.fitness
                        and np.array_equal(e.behavior, elite.behavior)
                        and e.genome == elite.genome):
                    backups[idx] = elite
                    break
            a.elites.append(elite)
            a.backups.append(backups)
        return a

    def all_elites(self) -> list:
        return list(self.elites)
