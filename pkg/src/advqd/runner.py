"""The generation loop: side alternation, budget equalization, artifacts.

Odd generations evolve Red, even ones Blue; each consumes the task set
selected by the previous generation (generation 1 consumes random Blue
genomes) and hands a bootstrap of recycled tournament duels to the
next. The run directory gets one archive dump, evaluation log,
selection report, and resumable state file per generation, plus a
manifest that pins the final task sets of both sides.

Evaluation accounting: Ranking and Pareto pay for a full elite-vs-task
tournament each generation (up to N_task^2 * N_cell duels), Behavior
and Random only for the N_task^2 bootstrap duels, so the latter two get
a correspondingly larger search budget and all four strategies spend
the same per-generation total once the archives are full.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .core import (DataIntegrityError, Genome, RunConfig, Side, UsageError,
                   config_hash)
from .envs import descriptor_dim, get_env
from .mtmb import BootstrapRecord, TaskSet, run_mtmb
from .policy import random_genome
from .rng import INITIAL_TASKS, derive_seed
from .selection import select_tasks
from .serial import (dump_json, dump_json_gz, load_json, load_json_gz,
                     occupancy_to_pairs, pairs_to_occupancy, vec_to_list,
                     write_jsonl_gz)


def equalized_budget(config: RunConfig, strategy: str = None) -> int:
    """Per-generation search budget under the equal-total-cost policy."""
    s = config.strategy if strategy is None else strategy
    if s in ("ranking", "pareto"):
        return config.n_budget
    if s in ("behavior", "random"):
        return (config.n_budget
                + config.n_task ** 2 * config.n_cell
                - config.n_task ** 2)
    raise UsageError(f"unknown strategy '{s}'")


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    side: str                    # side evolved this generation
    tasks_consumed: list         # digests of the opposing task genomes
    archive_summary: list        # per task: {"cells": n, "best_fitness": f}
    selected: list               # digests of the tasks handed onward
    n_search_evals: int
    n_selection_evals: int

    def to_dict(self) -> dict:
        return {"generation": self.generation, "side": self.side,
                "tasks_consumed": self.tasks_consumed,
                "archive_summary": self.archive_summary,
                "selected": self.selected,
                "n_search_evals": self.n_search_evals,
                "n_selection_evals": self.n_selection_evals,
                "n_total_evals": self.n_search_evals + self.n_selection_evals}

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationRecord":
        return cls(generation=d["generation"], side=d["side"],
                   tasks_consumed=d["tasks_consumed"],
                   archive_summary=d["archive_summary"],
                   selected=d["selected"],
                   n_search_evals=d["n_search_evals"],
                   n_selection_evals=d["n_selection_evals"])


@dataclass
class RunManifest:
    """Everything needed to identify, replay, and reuse one run."""

    config: RunConfig
    records: list = field(default_factory=list)
    final_tasks: dict = field(default_factory=dict)   # side value -> task set
    total_evals: int = 0
    aborted: dict = None

    def to_dict(self) -> dict:
        d = {"version": __version__,
             "config_hash": config_hash(self.config),
             "config": self.config.to_dict(),
             "records": [r.to_dict() for r in self.records],
             "final_tasks": self.final_tasks,
             "total_evals": self.total_evals}
        if self.aborted is not None:
            d["aborted"] = self.aborted
        return d

    def final_taskset(self, side: Side) -> TaskSet:
        return taskset_from_dict(self.final_tasks[side.value],
                                  self.config.env_id)


def taskset_to_dict(ts: TaskSet) -> dict:
    return {"side": ts.side.value, "generation": ts.generation,
            "digests": [g.digest() for g in ts.genomes],
            "genomes": [vec_to_list(g.params) for g in ts.genomes]}


def taskset_from_dict(d: dict, env_id: str) -> TaskSet:
    side = Side(d["side"])
    genomes = tuple(Genome(side=side,
                           params=np.asarray(p, dtype=np.float64),
                           env_id=env_id)
                    for p in d["genomes"])
    return TaskSet(side=side, genomes=genomes, generation=d["generation"])


def bootstrap_to_dicts(bootstrap, n_steps: int) -> list:
    return [{"task_index": r.task_index,
             "side": r.genome.side.value,
             "genome": vec_to_list(r.genome.params),
             "fitness": r.fitness,
             "behavior": occupancy_to_pairs(r.behavior, n_steps)}
            for r in bootstrap]


def bootstrap_from_dicts(dicts, env_id: str, n_steps: int) -> list:
    dim = descriptor_dim(env_id)
    out = []
    for d in dicts:
        g = Genome(side=Side(d["side"]),
                   params=np.asarray(d["genome"], dtype=np.float64),
                   env_id=env_id)
        out.append(BootstrapRecord(
            task_index=int(d["task_index"]), genome=g,
            fitness=float(d["fitness"]),
            behavior=pairs_to_occupancy(d["behavior"], dim, n_steps)))
    return out


def _state_path(out_dir: str, gen: int) -> str:
    return os.path.join(out_dir, f"state_gen{gen}.json.gz")


def _check_hash(found: str, expect: str, path: str) -> None:
    if found != expect:
        raise DataIntegrityError(
            f"{path} belongs to config {found}, expected {expect}")


def _prepare_dir(out_dir: str, config: RunConfig) -> None:
    os.makedirs(out_dir, exist_ok=True)
    want = config_hash(config)
    cfg_path = os.path.join(out_dir, "config.json")
    if os.path.exists(cfg_path):
        _check_hash(load_json(cfg_path)["config_hash"], want, cfg_path)
    else:
        dump_json({"version": __version__, "config_hash": want,
                   "config": config.to_dict()}, cfg_path)


def _latest_state(out_dir: str, config: RunConfig):
    """Most advanced complete per-generation state, or None."""
    want = config_hash(config)
    for gen in range(config.n_gen, 0, -1):
        path = _state_path(out_dir, gen)
        if os.path.exists(path):
            st = load_json_gz(path)
            _check_hash(st["config_hash"], want, path)
            return st
    return None


def _persist_generation(out_dir, config, gen, side, res, report, tasks,
                        next_tasks, next_bootstrap, records, total_evals,
                        n_steps):
    chash = config_hash(config)
    dump_json_gz(
        {"version": __version__, "config_hash": chash, "generation": gen,
         "side": side.value,
         "task_digests": [g.digest() for g in tasks.genomes],
         "archives": [a.to_dict() for a in res.archives]},
        os.path.join(out_dir, f"archives_gen{gen}.json.gz"))

    header = {"kind": "header", "version": __version__,
              "config_hash": chash, "generation": gen, "side": side.value,
              "n_steps": n_steps,
              "behavior_dim": descriptor_dim(config.env_id)}
    recs = [header]
    for e in res.eval_log:
        recs.append({"gen": e["gen"], "iter": e["iter"],
                     "task_id": e["task_id"],
                     "candidate_provenance": e["candidate_provenance"],
                     "fitness": e["fitness"],
                     "behavior": occupancy_to_pairs(e["behavior"], n_steps)})
    write_jsonl_gz(recs, os.path.join(out_dir, f"evals_gen{gen}.jsonl.gz"))

    sel = {"version": __version__, "config_hash": chash}
    sel.update(report)
    dump_json(sel, os.path.join(out_dir, f"selection_gen{gen}.json"))

    # the state file is written last: its existence marks the whole
    # generation as complete, and every write above was atomic
    dump_json_gz(
        {"version": __version__, "config_hash": chash, "generation": gen,
         "n_steps": n_steps,
         "tasks": taskset_to_dict(tasks),
         "next_tasks": taskset_to_dict(next_tasks),
         "bootstrap": bootstrap_to_dicts(next_bootstrap, n_steps),
         "records": [r.to_dict() for r in records],
         "total_evals": total_evals},
        _state_path(out_dir, gen))


def initial_tasks(config: RunConfig) -> TaskSet:
    """Generation 1's opponents: N_task random Blue genomes."""
    rng = np.random.default_rng(np.random.PCG64(
        derive_seed(config.master_seed, (INITIAL_TASKS,))))
    genomes = tuple(random_genome(config.env_id, Side.BLUE, rng)
                    for _ in range(config.n_task))
    return TaskSet(side=Side.BLUE, genomes=genomes, generation=1)


def run_game(config: RunConfig, out_dir: str = None, resume: bool = False,
             env_params=None) -> RunManifest:
    """Run the full alternating coevolution and return its manifest.

    With `out_dir`, artifacts are persisted per generation and an abort
    still leaves a manifest of the completed prefix; `resume=True`
    continues from the last complete generation in that directory."""
    params = env_params if env_params is not None \
        else get_env(config.env_id).default_params
    n_steps = params.n_steps

    if out_dir is not None:
        _prepare_dir(out_dir, config)

    start_gen = 1
    records = []
    total_evals = 0
    tasks = None
    consumed = None
    if resume and out_dir is not None:
        st = _latest_state(out_dir, config)
        if st is not None:
            start_gen = st["generation"] + 1
            records = [GenerationRecord.from_dict(d) for d in st["records"]]
            total_evals = st["total_evals"]
            tasks = taskset_from_dict(st["next_tasks"], config.env_id)
            consumed = taskset_from_dict(st["tasks"], config.env_id)
            bootstrap = bootstrap_from_dicts(st["bootstrap"], config.env_id,
                                              st["n_steps"])
    if tasks is None:
        tasks = initial_tasks(config)
        bootstrap = []
        consumed = tasks

    try:
        for gen in range(start_gen, config.n_gen + 1):
            side = Side.RED if gen % 2 == 1 else Side.BLUE
            budget = equalized_budget(config)
            res = run_mtmb(tasks, side, bootstrap, config,
                           n_budget=budget, env_params=env_params)
            next_tasks, next_bootstrap, report, n_sel = select_tasks(
                config.strategy, res.archives, tasks, side, config,
                env_params)
            rec = GenerationRecord(
                generation=gen, side=side.value,
                tasks_consumed=[g.digest() for g in tasks.genomes],
                archive_summary=[
                    {"cells": len(a.elites),
                     "best_fitness": max((e.fitness for e in a.elites),
                                         default=None)}
                    for a in res.archives],
                selected=report["selected"],
                n_search_evals=res.n_evals,
                n_selection_evals=n_sel)
            records.append(rec)
            total_evals += res.n_evals + n_sel
            if out_dir is not None:
                _persist_generation(out_dir, config, gen, side, res, report,
                                    tasks, next_tasks, next_bootstrap,
                                    records, total_evals, n_steps)
            consumed = tasks
            tasks, bootstrap = next_tasks, next_bootstrap
    except BaseException as err:
        if out_dir is not None:
            partial = RunManifest(
                config=config, records=records, total_evals=total_evals,
                aborted={"error": type(err).__name__, "message": str(err),
                         "next_generation": len(records) + 1})
            try:
                dump_json(partial.to_dict(),
                          os.path.join(out_dir, "manifest.json"))
            except OSError:
                pass
        raise

    # the evolved side's final tasks are this run's product; the other
    # side's are the ones it faced in the last generation
    final = {tasks.side.value: taskset_to_dict(tasks),
             consumed.side.value: taskset_to_dict(consumed)}
    manifest = RunManifest(config=config, records=records,
                           final_tasks=final, total_evals=total_evals)
    if out_dir is not None:
        dump_json(manifest.to_dict(), os.path.join(out_dir, "manifest.json"))
    return manifest


def load_manifest(out_dir: str) -> RunManifest:
    """Read back a persisted manifest (aborted ones load too)."""
    d = load_json(os.path.join(out_dir, "manifest.json"))
    config = RunConfig(**d["config"])
    _check_hash(d["config_hash"], config_hash(config), out_dir)
    return RunManifest(config=config,
                       records=[GenerationRecord.from_dict(r)
                                for r in d["records"]],
                       final_tasks=d["final_tasks"],
                       total_evals=d["total_evals"],
                       aborted=d.get("aborted"))
