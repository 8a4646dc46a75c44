"""Generation loop: budgets, alternation, persistence, abort recovery."""

import os
import types

import numpy as np
import pytest

from advqd.archive import GrowingArchive
from advqd.core import (DataIntegrityError, RunConfig, Side, UsageError,
                        config_hash)
from advqd.envs import descriptor_dim, evaluate_duel
from advqd.mtmb import _flat_elites
from advqd.rng import SELECTION_DUEL, derive_seed
from advqd.runner import (RunManifest, equalized_budget, initial_tasks,
                          load_manifest, run_game, taskset_from_dict,
                          taskset_to_dict)
from advqd.serial import load_json, load_json_gz, read_jsonl_gz
import advqd.runner as runner_mod


def _cfg(**kw):
    base = dict(env_id="cat_mouse", strategy="random", master_seed=77,
                n_gen=2, n_task=2, n_cell=3, n_budget=30, n_init=10)
    base.update(kw)
    return RunConfig(**base)


class TestEqualizedBudget:
    def test_reference_operating_point(self):
        cfg = _cfg(n_task=50, n_cell=20, n_budget=100000, n_gen=10)
        assert equalized_budget(cfg, "ranking") == 100000
        assert equalized_budget(cfg, "pareto") == 100000
        assert equalized_budget(cfg, "behavior") == 147500
        assert equalized_budget(cfg, "random") == 147500
        # with full archives every strategy spends the same total:
        # loop budget plus its selection tournament
        pool = 50 * 20
        assert 100000 + pool * 50 == 150000
        assert 147500 + 50 ** 2 == 150000

    def test_degenerate_single_cell_archives(self):
        # one-cell archives make the tournament discount vanish
        stub = types.SimpleNamespace(strategy=None, n_budget=500,
                                     n_task=6, n_cell=1)
        assert {equalized_budget(stub, s) for s in
                ("behavior", "random", "ranking", "pareto")} == {500}

    def test_defaults_to_config_strategy(self):
        assert equalized_budget(_cfg(strategy="behavior")) == 38
        assert equalized_budget(_cfg(strategy="ranking")) == 30

    def test_unknown_strategy(self):
        with pytest.raises(UsageError):
            equalized_budget(_cfg(), "elitist")


class TestInitialTasks:
    def test_shape_and_side(self):
        ts = initial_tasks(_cfg(n_task=5))
        assert ts.side is Side.BLUE
        assert ts.generation == 1
        assert len(ts) == 5
        assert len({g.digest() for g in ts.genomes}) == 5

    def test_deterministic(self):
        a = initial_tasks(_cfg())
        b = initial_tasks(_cfg())
        assert [g.digest() for g in a.genomes] == [g.digest()
                                                   for g in b.genomes]

    def test_follows_master_seed(self):
        a = initial_tasks(_cfg())
        b = initial_tasks(_cfg(master_seed=78))
        assert [g.digest() for g in a.genomes] != [g.digest()
                                                   for g in b.genomes]


class TestRunGame:
    def test_single_generation(self):
        cfg = _cfg(n_gen=1)
        man = run_game(cfg)
        assert len(man.records) == 1
        rec = man.records[0]
        assert rec.generation == 1 and rec.side == "red"
        # blue never evolved: its final tasks are the initial random ones
        init = initial_tasks(cfg)
        assert man.final_tasks["blue"]["digests"] == [g.digest()
                                                      for g in init.genomes]
        assert man.final_tasks["blue"]["generation"] == 1
        assert man.final_tasks["red"]["generation"] == 2
        assert man.final_tasks["red"]["digests"] == rec.selected

    def test_sides_alternate_and_tasks_chain(self):
        man = run_game(_cfg(n_gen=4, master_seed=3))
        assert [r.side for r in man.records] == ["red", "blue",
                                                 "red", "blue"]
        for prev, nxt in zip(man.records, man.records[1:]):
            assert nxt.tasks_consumed == prev.selected

    def test_archive_summary_shape(self):
        cfg = _cfg()
        man = run_game(cfg)
        for rec in man.records:
            assert len(rec.archive_summary) == cfg.n_task
            for cell in rec.archive_summary:
                assert 0 <= cell["cells"] <= cfg.n_cell

    def test_total_evals_accounting(self):
        man = run_game(_cfg())
        assert man.total_evals == sum(r.n_search_evals + r.n_selection_evals
                                      for r in man.records)

    def test_equal_totals_across_strategies(self):
        # archives fill at this scale, so per-generation totals align
        per_gen = {}
        for s in ("behavior", "random", "ranking", "pareto"):
            man = run_game(_cfg(strategy=s, master_seed=5))
            per_gen[s] = [r.n_search_evals + r.n_selection_evals
                          for r in man.records]
        assert len({tuple(v) for v in per_gen.values()}) == 1

    def test_in_memory_determinism(self):
        a = run_game(_cfg(master_seed=11))
        b = run_game(_cfg(master_seed=11))
        assert a.to_dict() == b.to_dict()

    def test_final_task_generations(self):
        man = run_game(_cfg())      # n_gen=2, blue evolved last
        assert man.final_tasks["blue"]["generation"] == 3
        assert man.final_tasks["red"]["generation"] == 2
        ts = man.final_taskset(Side.BLUE)
        assert ts.side is Side.BLUE and len(ts) == 2


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("run")
    cfg = _cfg(strategy="ranking", master_seed=13)
    man = run_game(cfg, out_dir=str(d))
    return d, cfg, man


class TestPersistence:
    def test_artifact_files_exist(self, run_dir):
        d, cfg, _ = run_dir
        names = {"config.json", "manifest.json"}
        for g in (1, 2):
            names |= {f"archives_gen{g}.json.gz", f"evals_gen{g}.jsonl.gz",
                      f"selection_gen{g}.json", f"state_gen{g}.json.gz"}
        assert names <= set(os.listdir(d))

    def test_manifest_round_trip(self, run_dir):
        d, _, man = run_dir
        back = load_manifest(str(d))
        assert back.to_dict() == man.to_dict()

    def test_eval_log_header_and_counts(self, run_dir):
        d, cfg, man = run_dir
        recs = read_jsonl_gz(str(d / "evals_gen1.jsonl.gz"))
        head, evals = recs[0], recs[1:]
        assert head["kind"] == "header"
        assert head["config_hash"] == config_hash(cfg)
        assert head["side"] == "red" and head["generation"] == 1
        assert head["behavior_dim"] == descriptor_dim(cfg.env_id)
        assert len(evals) == man.records[0].n_search_evals
        for e in evals[:20]:
            assert 0.0 <= e["fitness"] <= 1.0
            assert e["task_id"] in (0, 1)
            # behaviors are stored as exact step-count pairs
            for cell, count in e["behavior"]:
                assert count >= 1 and 0 <= cell < head["behavior_dim"]

    def test_bootstrap_records_replay_as_flipped_duels(self, run_dir):
        # every stored bootstrap entry must reproduce its tournament
        # duel exactly, seen from the incoming side's perspective
        d, cfg, _ = run_dir
        state = load_json_gz(str(d / "state_gen1.json.gz"))
        sel = load_json(str(d / "selection_gen1.json"))
        arch_doc = load_json_gz(str(d / "archives_gen1.json.gz"))
        dim = descriptor_dim(cfg.env_id)
        archives = [GrowingArchive.from_dict(a, dim)
                    for a in arch_doc["archives"]]
        pool = _flat_elites(archives)
        tasks = taskset_from_dict(state["tasks"], cfg.env_id)
        boot = runner_mod.bootstrap_from_dicts(state["bootstrap"],
                                               cfg.env_id, state["n_steps"])
        assert len(boot) == cfg.n_task ** 2
        for k, rec in enumerate(boot):
            t = k % cfg.n_task
            e_flat = sel["selected_flat_indices"][rec.task_index]
            seed = derive_seed(cfg.master_seed, (SELECTION_DUEL, 1, e_flat, t))
            out = evaluate_duel(cfg.env_id, pool[e_flat].genome,
                                tasks.genomes[t], seed)
            assert rec.genome.digest() == tasks.genomes[t].digest()
            assert rec.fitness == out.fitness.f_blue
            assert np.array_equal(rec.behavior, out.behavior_red)

    def test_state_bootstrap_round_trip_is_exact(self, run_dir):
        d, cfg, _ = run_dir
        state = load_json_gz(str(d / "state_gen1.json.gz"))
        boot = runner_mod.bootstrap_from_dicts(state["bootstrap"],
                                               cfg.env_id, state["n_steps"])
        again = runner_mod.bootstrap_to_dicts(boot, state["n_steps"])
        assert again == state["bootstrap"]

    def test_selection_report_fields(self, run_dir):
        d, cfg, man = run_dir
        sel = load_json(str(d / "selection_gen2.json"))
        assert sel["generation"] == 2
        assert sel["selected"] == man.records[1].selected
        assert len(sel["selected_flat_indices"]) == cfg.n_task
        assert sel["tournament_evals"] == man.records[1].n_selection_evals

    def test_taskset_round_trip(self, run_dir):
        _, cfg, man = run_dir
        ts = man.final_taskset(Side.RED)
        assert taskset_to_dict(ts) == man.final_tasks["red"]

    def test_rerun_to_fresh_dir_is_byte_identical(self, run_dir, tmp_path):
        d, cfg, _ = run_dir
        run_game(cfg, out_dir=str(tmp_path))
        for name in sorted(os.listdir(d)):
            a = (d / name).read_bytes()
            b = (tmp_path / name).read_bytes()
            assert a == b, f"{name} differs between identical runs"

    def test_foreign_config_dir_rejected(self, run_dir):
        d, cfg, _ = run_dir
        with pytest.raises(DataIntegrityError):
            run_game(_cfg(strategy="ranking", master_seed=14),
                     out_dir=str(d))

    def test_resume_after_complete_changes_nothing(self, run_dir):
        d, cfg, man = run_dir
        before = {n: (d / n).read_bytes() for n in os.listdir(d)}
        again = run_game(cfg, out_dir=str(d), resume=True)
        assert again.to_dict() == man.to_dict()
        assert again.total_evals == man.total_evals
        after = {n: (d / n).read_bytes() for n in os.listdir(d)}
        assert before == after


class TestAbortResume:
    def test_abort_persists_prefix_and_resume_completes(self, tmp_path,
                                                        monkeypatch):
        cfg = _cfg(strategy="ranking", master_seed=13)
        clean = tmp_path / "clean"
        run_game(cfg, out_dir=str(clean))

        broken = tmp_path / "broken"
        real = runner_mod.select_tasks
        calls = {"n": 0}

        def explode(*args, **kw):
            calls["n"] += 1
            if calls["n"] == 2:
                raise RuntimeError("boom")
            return real(*args, **kw)

        monkeypatch.setattr(runner_mod, "select_tasks", explode)
        with pytest.raises(RuntimeError, match="boom"):
            run_game(cfg, out_dir=str(broken))
        monkeypatch.setattr(runner_mod, "select_tasks", real)

        # the aborted manifest records the completed prefix
        part = load_json(str(broken / "manifest.json"))
        assert part["aborted"]["error"] == "RuntimeError"
        assert part["aborted"]["message"] == "boom"
        assert part["aborted"]["next_generation"] == 2
        assert len(part["records"]) == 1
        loaded = load_manifest(str(broken))
        assert loaded.aborted is not None

        run_game(cfg, out_dir=str(broken), resume=True)
        for name in sorted(os.listdir(clean)):
            assert (clean / name).read_bytes() == \
                (broken / name).read_bytes(), name

    def test_keyboard_interrupt_also_persists(self, tmp_path, monkeypatch):
        cfg = _cfg(master_seed=21)
        real = runner_mod.run_mtmb

        def interrupt(*args, **kw):
            raise KeyboardInterrupt

        monkeypatch.setattr(runner_mod, "run_mtmb", interrupt)
        with pytest.raises(KeyboardInterrupt):
            run_game(cfg, out_dir=str(tmp_path))
        part = load_json(str(tmp_path / "manifest.json"))
        assert part["aborted"]["error"] == "KeyboardInterrupt"
        assert part["aborted"]["next_generation"] == 1
        assert part["records"] == []

    def test_resume_without_state_starts_fresh(self, tmp_path):
        cfg = _cfg(master_seed=22)
        man = run_game(cfg, out_dir=str(tmp_path), resume=True)
        assert len(man.records) == cfg.n_gen
