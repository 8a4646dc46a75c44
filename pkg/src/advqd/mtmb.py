"""Multi-task search loop: one growing archive per opposing task.

Each generation evolves one side against a fixed set of opponent tasks.
Candidates are random genomes until the archives hold enough elites,
then mutations of elites drawn uniformly from the union of all task
archives, so strong genes migrate between tasks. Every evaluation is a
full duel against the sampled task and lands in that task's archive
only.

Bootstrap records (recycled duels from the previous generation's task
selection) are pushed through the same archive-update path before the
loop starts; they may found cells but do not count against the budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .archive import GrowingArchive
from .core import EvaluationError, Genome, RunConfig, Side, UsageError
from .envs import evaluate_duel
from .policy import random_genome
from .rng import SEARCH_DUEL, SEARCH_LOOP, derive_seed


@dataclass(frozen=True)
class TaskSet:
    """Opponent genomes one generation evolves against."""
    side: Side            # side of the task genomes themselves
    genomes: tuple
    generation: int       # generation that consumes these tasks

    def __post_init__(self):
        for g in self.genomes:
            if g.side is not self.side:
                raise UsageError("task set mixes sides")

    def __len__(self):
        return len(self.genomes)


@dataclass(frozen=True)
class BootstrapRecord:
    task_index: int
    genome: Genome        # candidate for the evolving side
    fitness: float        # evolving-side perspective
    behavior: np.ndarray


@dataclass
class SearchResult:
    archives: list
    eval_log: list = field(default_factory=list)
    n_evals: int = 0


def mutate(parent: Genome, seed: int, rate: float = 0.3,
           sigma: float = 0.1) -> Genome:
    """Gaussian-perturb exactly round(rate * len) entries of the parent."""
    n = parent.params.shape[0]
    n_mut = int(round(rate * n))
    child = parent.params.copy()
    if n_mut > 0:
        rng = np.random.default_rng(np.random.PCG64(seed))
        idx = rng.choice(n, size=n_mut, replace=False)
        child[idx] += rng.normal(0.0, sigma, size=n_mut)
    return Genome(side=parent.side, params=child, env_id=parent.env_id)


def _flat_elites(archives):
    out = []
    for a in archives:
        out.extend(a.elites)
    return out


def run_mtmb(tasks: TaskSet, side: Side, bootstrap, config: RunConfig,
             n_budget=None, env_params=None) -> SearchResult:
    """One generation of archive building (the loop body of the outer
    algorithm). Deterministic given config.master_seed and the task set's
    generation index."""
    if tasks.side is not side.opponent:
        raise UsageError(f"tasks are {tasks.side.value}, cannot evolve "
                         f"{side.value} against them")
    gen = tasks.generation
    budget = config.n_budget if n_budget is None else int(n_budget)
    archives = [GrowingArchive(config.n_cell, config.backup_cap)
                for _ in range(len(tasks))]

    for rec in bootstrap:
        archives[rec.task_index].update(rec.genome, rec.fitness, rec.behavior)

    loop_rng = np.random.default_rng(
        np.random.PCG64(derive_seed(config.master_seed, (SEARCH_LOOP, gen))))
    result = SearchResult(archives=archives)

    i = 0
    while i < budget:
        n_batch = min(config.batch_size, budget - i)
        # snapshot: candidates in one batch share the parent pool
        pool = _flat_elites(archives)
        total_elites = len(pool)
        batch = []
        for _ in range(n_batch):
            task_id = int(loop_rng.integers(len(tasks)))
            if total_elites < config.n_init:
                cand = random_genome(config.env_id, side, loop_rng)
                prov = {"kind": "random", "digest": cand.digest()}
            else:
                j = int(loop_rng.integers(total_elites))
                mut_seed = int(loop_rng.integers(0, 2 ** 64, dtype=np.uint64))
                cand = mutate(pool[j].genome, mut_seed,
                              config.mutation_rate, config.mutation_sigma)
                prov = {"kind": "mutation", "digest": cand.digest(),
                        "parent": pool[j].genome.digest()}
            batch.append((i + len(batch), task_id, cand, prov))

        evaluated = []
        for it, task_id, cand, prov in batch:
            duel_seed = derive_seed(config.master_seed, (SEARCH_DUEL, gen, it))
            task_genome = tasks.genomes[task_id]
            red, blue = ((cand, task_genome) if side is Side.RED
                         else (task_genome, cand))
            try:
                out = evaluate_duel(config.env_id, red, blue, duel_seed,
                                    params=env_params)
            except EvaluationError as err:
                err.context = {"generation": gen, "iteration": it,
                               "duel_seed": duel_seed,
                               "task_digest": task_genome.digest()}
                raise
            f = out.fitness.for_side(side)
            evaluated.append((it, task_id, cand, prov, f, out.behavior_red))

        for it, task_id, cand, prov, f, behavior in evaluated:
            archives[task_id].update(cand, f, behavior)
            result.eval_log.append({"gen": gen, "iter": it, "task_id": task_id,
                                    "candidate_provenance": prov,
                                    "fitness": f, "behavior": behavior})
        i += n_batch

    result.n_evals = i
    return result
