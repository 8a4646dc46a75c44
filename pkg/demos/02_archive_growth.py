"""
Watching an unstructured archive grow
=====================================

Task archives here have no fixed grid. Each one starts empty and adopts
a new behavior as a fresh cell while it has room; once full, a
newcomer only displaces a cell if it is *more novel* than the closest
existing pair, otherwise it competes for the cell it lands in. The
result is a self-spacing map of behaviors, one archive per task.
"""

import numpy as np

from advqd.archive import GrowingArchive
from advqd.core import Genome, Side

rng = np.random.default_rng(7)
arch = GrowingArchive(n_cell=8)


def genome(i):
    return Genome(Side.RED, np.array([float(i)]), "cat_mouse")


# phase 1: the first n_cell distinct behaviors are adopted verbatim
print("filling up:")
for i in range(8):
    b = rng.uniform(0.0, 1.0, 2)
    branch = arch.update(genome(i), float(rng.uniform()), b)
    print(f"  insert {i}: {branch:8s} size={len(arch)}")

# phase 2: now every insertion is a fight. Count what happens to the
# next few hundred candidates.
outcomes = {"grow": 0, "replace": 0, "reject": 0}
for i in range(8, 400):
    b = rng.uniform(0.0, 1.0, 2)
    branch = arch.update(genome(i), float(rng.uniform()), b)
    outcomes[branch] = outcomes.get(branch, 0) + 1
print("\nafter 392 more insertions:", outcomes)

# the centroids should have spread out: compare the minimum pairwise
# distance of the final archive to a fresh random set of 8 points
from advqd.archive import min_pairwise_distance

d_arch, _ = min_pairwise_distance(arch.centroids)
d_rand = np.mean([min_pairwise_distance(
    [rng.uniform(0, 1, 2) for _ in range(8)])[0] for _ in range(200)])
print(f"\nmin pairwise distance: archive {d_arch:.3f} "
      f"vs random sets {d_rand:.3f} (bigger = better spaced)")

# elites only ever improve between growth events
fits = [e.fitness for e in arch.elites]
print("final elite fitnesses:", np.round(fits, 3))
