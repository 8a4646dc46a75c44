"""
One duel in each environment
============================

Every number in this engine ultimately comes from a duel: two policy
networks, a seeded physics rollout, one zero-sum fitness pair and one
behavior descriptor. This script runs a single duel per environment
and pulls each outcome apart.
"""

import numpy as np

from advqd.core import Side
from advqd.envs import evaluate_duel, descriptor_dim
from advqd.policy import random_genome
from advqd.render import trajectory_svg

rng = np.random.default_rng(2024)

for env_id in ("pong", "cat_mouse", "pursuit"):
    red = random_genome(env_id, Side.RED, rng)
    blue = random_genome(env_id, Side.BLUE, rng)
    out = evaluate_duel(env_id, red, blue, duel_seed=5)

    print(f"\n=== {env_id} ===")
    # fitness is strictly zero-sum: the two sides always sum to one
    f = out.fitness
    print(f"f_red = {f.f_red:.4f}   f_blue = {f.f_blue:.4f}   "
          f"sum = {f.f_red + f.f_blue:.1f}")

    # the raw game outcome that produced the score
    print("outcome:", {k: v for k, v in out.trajectory.extras.items()})
    print("events :", [(e.step, e.kind) for e in out.trajectory.events][:6])

    # the behavior descriptor is a coarse occupancy histogram of every
    # entity's trajectory; both sides share the same description
    b = out.behavior_red
    print(f"descriptor: dim {descriptor_dim(env_id)}, "
          f"{np.count_nonzero(b)} cells visited, total mass {b.sum():.1f} "
          f"(1 per entity, {len(out.trajectory.entities)} entities)")

    # the same seed always reproduces the same duel, bit for bit
    again = evaluate_duel(env_id, red, blue, duel_seed=5)
    assert again.fitness.f_red == f.f_red
    assert np.array_equal(again.behavior_red, b)
    print("replay with the same seed: identical")

    # a one-frame picture of the whole episode
    path = f"/tmp/duel_{env_id}.svg"
    with open(path, "w") as fh:
        fh.write(trajectory_svg(out.trajectory, meta={"demo": "anatomy"}))
    print("wrote", path)
