"""
Two selection strategies, head to head
======================================

The core experiment: evolve cat populations under different
task-selection strategies, then make their final task sets fight in a
shared round-robin and score the outcome with the six set-level
measures. Miniature budgets keep this to about a minute.
"""

from advqd.core import RunConfig, Side
from advqd.measures import MEASURE_NAMES
from advqd.report import build_tables, tables_to_text
from advqd.runner import run_game
from advqd.tournament import SolutionSet, round_robin


def config(strategy, seed):
    return RunConfig(env_id="cat_mouse", strategy=strategy,
                     master_seed=seed, n_gen=2, n_task=4, n_cell=4,
                     n_budget=400, n_init=40)


# evolve two replications per strategy; odd generations train the cat
# (red), even ones the mouse (blue)
red_sets, blue_sets = [], []
for strategy in ("random", "ranking"):
    for rep in range(2):
        man = run_game(config(strategy, 90 + rep))
        print(f"{strategy} rep{rep}: {man.total_evals} evaluations, "
              f"{len(man.records)} generations")
        red_sets.append(SolutionSet(strategy, rep, man.final_taskset(
            Side.RED).genomes))
        blue_sets.append(SolutionSet(strategy, rep, man.final_taskset(
            Side.BLUE).genomes))

# every cat meets every mouse once
matrix = round_robin(red_sets, blue_sets, reps=1, seed=17)
n_red, n_blue, _ = matrix.per_rep.shape
print(f"\nround robin: {n_red} cats x {n_blue} mice "
      f"= {n_red * n_blue} duels")
print("mean cat fitness by block:")
for key, rows in matrix.row_sets().items():
    print(f"  {key}: {matrix.values[rows].mean():.3f}")

# the six measures, both sides, medians across the two replications
tables = build_tables(matrix, k=4)
print()
print(tables_to_text(tables))
print("measures:", ", ".join(MEASURE_NAMES))
