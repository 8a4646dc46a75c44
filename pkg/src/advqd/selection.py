"""The four task-selection strategies.

At the end of a generation the evolving side holds one archive per
opposing task; each strategy picks the N_task elites that become the
next generation's tasks, and produces the bootstrap set: duel records
reusable by the other side, fitness flipped to its perspective.

Behavior and Random pick without any new duels, then play the selected
elites against the old tasks once (N_task^2 duels) purely to build the
bootstrap. Ranking and Pareto instead play every elite against every
old task first (N_task^2 * N_cell duels) and select from that
tournament; their bootstrap reuses the selected elites' rows. The outer
loop equalizes total evaluation budgets across the two regimes.

Selection-stream draw order is part of the replay contract: first any
strategy-specific draws (the Random sample), then the clustering or
niching seed, then padding draws if the pool came up short.
"""

from __future__ import annotations

import logging

import numpy as np

from .core import RunConfig, Side, UsageError
from .envs import evaluate_duel
from .kmeans import kmeans
from .mtmb import BootstrapRecord, TaskSet, _flat_elites
from .nsga3 import nsga3_select
from .rng import SELECTION, SELECTION_DUEL, derive_seed

log = logging.getLogger("advqd.selection")


def ranking_vector(f) -> np.ndarray:
    """Rank transform of a fitness vector, affinely mapped into [-1, 1].

    Ties keep input order (stable sort), so the output is always a
    permutation of the equispaced grid."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1 or f.shape[0] < 2:
        raise UsageError("ranking_vector needs a 1-D vector of length >= 2")
    if not np.all(np.isfinite(f)):
        raise UsageError("ranking_vector needs finite entries")
    n = f.shape[0]
    order = np.argsort(f, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.arange(n)
    return 2.0 * ranks / (n - 1) - 1.0


def selection_tournament(pool, elite_indices, old_tasks: TaskSet, side: Side,
                         config: RunConfig, env_params=None):
    """Duel elites (by flat pool index) against every old task.

    Returns (fitness, behaviors) with one row per entry of
    elite_indices; fitness is from the evolving side's perspective.
    Duel seeds depend only on (generation, flat elite index, task
    index), so a duel is the same whether it is played for selection or
    for the bootstrap."""
    gen = old_tasks.generation
    n_t = len(old_tasks)
    f = np.empty((len(elite_indices), n_t))
    b = np.empty((len(elite_indices), n_t), dtype=object)
    for row, e in enumerate(elite_indices):
        cand = pool[e].genome
        for t in range(n_t):
            seed = derive_seed(config.master_seed, (SELECTION_DUEL, gen, e, t))
            task = old_tasks.genomes[t]
            red, blue = (cand, task) if side is Side.RED else (task, cand)
            out = evaluate_duel(config.env_id, red, blue, seed,
                                params=env_params)
            f[row, t] = out.fitness.for_side(side)
            b[row, t] = out.behavior_red
    return f, b


def _pad(selected, pool_size, rng, n_task):
    if len(selected) < n_task:
        short = n_task - len(selected)
        log.warning("elite pool gave %d winners for %d task slots; "
                    "padding by resampling", len(selected), n_task)
        selected = selected + [int(rng.integers(pool_size))
                               for _ in range(short)]
    return selected


def _outcome(pool, selected, old_tasks, side, config, f_rows, b_rows,
             report_extra, n_evals):
    """Assemble the next task set and the perspective-flipped bootstrap."""
    genomes = tuple(pool[e].genome for e in selected)
    next_tasks = TaskSet(side=side, genomes=genomes,
                         generation=old_tasks.generation + 1)
    bootstrap = []
    for i in range(len(selected)):
        for t in range(len(old_tasks)):
            bootstrap.append(BootstrapRecord(
                task_index=i,
                genome=old_tasks.genomes[t],
                fitness=1.0 - f_rows[i, t],
                behavior=b_rows[i, t]))
    report = {"generation": old_tasks.generation,
              "selected": [pool[e].genome.digest() for e in selected],
              "selected_flat_indices": [int(e) for e in selected],
              "pool_size": len(pool),
              "tournament_evals": int(n_evals)}
    report.update(report_extra)
    return next_tasks, bootstrap, report


def select_tasks(strategy: str, archives, old_tasks: TaskSet, side: Side,
                 config: RunConfig, env_params=None):
    """Dispatch one strategy. Returns (task set, bootstrap, report, n_evals)."""
    pool = _flat_elites(archives)
    if not pool:
        raise UsageError("cannot select tasks from empty archives")
    n_task = config.n_task
    rng = np.random.default_rng(np.random.PCG64(
        derive_seed(config.master_seed, (SELECTION, old_tasks.generation))))

    if strategy in ("behavior", "random"):
        if strategy == "behavior":
            selected, extra = _pick_behavior(pool, n_task, rng)
        else:
            selected, extra = _pick_random(pool, n_task, rng)
        f, b = selection_tournament(pool, selected, old_tasks, side, config,
                                    env_params)
        n_evals = len(selected) * len(old_tasks)
    elif strategy in ("ranking", "pareto"):
        all_idx = list(range(len(pool)))
        f_all, b_all = selection_tournament(pool, all_idx, old_tasks, side,
                                            config, env_params)
        n_evals = len(pool) * len(old_tasks)
        if strategy == "ranking":
            selected, extra = _pick_ranking(f_all, n_task, rng)
        else:
            selected, extra = _pick_pareto(f_all, n_task, rng)
        f = f_all[selected]
        b = b_all[selected]
    else:
        raise UsageError(f"unknown strategy '{strategy}'")

    extra["strategy"] = strategy
    tasks, bootstrap, report = _outcome(pool, selected, old_tasks, side,
                                        config, f, b, extra, n_evals)
    return tasks, bootstrap, report, n_evals


def _cluster_winners(assign, k, score):
    """Best-scoring member index per nonempty cluster (stable ties)."""
    winners = []
    sizes = []
    for c in range(k):
        members = np.nonzero(assign == c)[0]
        sizes.append(int(members.size))
        if members.size == 0:
            continue
        best = members[0]
        for m in members[1:]:
            if score[m] > score[best]:
                best = m
        winners.append(int(best))
    return winners, sizes


def _pick_behavior(pool, n_task, rng):
    if len(pool) < n_task:
        selected = _pad(list(range(len(pool))), len(pool), rng, n_task)
        return selected, {"cluster_sizes": None, "padded": n_task - len(pool)}
    points = np.stack([e.behavior for e in pool])
    seed = int(rng.integers(0, 2 ** 64, dtype=np.uint64))
    assign, _ = kmeans(points, n_task, seed)
    fitness = np.array([e.fitness for e in pool])
    winners, sizes = _cluster_winners(assign, n_task, fitness)
    padded = n_task - len(winners)
    selected = _pad(winners, len(pool), rng, n_task)
    return selected, {"cluster_sizes": sizes, "padded": padded}


def _pick_random(pool, n_task, rng):
    if len(pool) <= n_task:
        selected = _pad(list(range(len(pool))), len(pool), rng, n_task)
        return selected, {"cluster_sizes": None,
                          "padded": n_task - min(len(pool), n_task)}
    selected = [int(i) for i in rng.choice(len(pool), n_task, replace=False)]
    return selected, {"cluster_sizes": None, "padded": 0}


def _pick_ranking(f_all, n_task, rng):
    n_pool = f_all.shape[0]
    if n_pool < n_task:
        selected = _pad(list(range(n_pool)), n_pool, rng, n_task)
        return selected, {"cluster_sizes": None, "padded": n_task - n_pool}
    vectors = np.stack([ranking_vector(f_all[e]) for e in range(n_pool)])
    seed = int(rng.integers(0, 2 ** 64, dtype=np.uint64))
    assign, _ = kmeans(vectors, n_task, seed)
    mean_fitness = f_all.mean(axis=1)  # quality: raw average over tasks
    winners, sizes = _cluster_winners(assign, n_task, mean_fitness)
    padded = n_task - len(winners)
    selected = _pad(winners, n_pool, rng, n_task)
    return selected, {"cluster_sizes": sizes, "padded": padded}


def _pick_pareto(f_all, n_task, rng):
    n_pool = f_all.shape[0]
    if n_pool < n_task:
        selected = _pad(list(range(n_pool)), n_pool, rng, n_task)
        return selected, {"cluster_sizes": None, "padded": n_task - n_pool}
    seed = int(rng.integers(0, 2 ** 64, dtype=np.uint64))
    selected = [int(i) for i in nsga3_select(f_all, n_task, seed)]
    return selected, {"cluster_sizes": None, "padded": 0}
