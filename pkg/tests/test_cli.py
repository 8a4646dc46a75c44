"""Command line pipeline: exit codes, guards, artifact layout."""

import json
import shutil

import pytest

from advqd.cli import main
from advqd.core import EvaluationError
import advqd.runner as runner_mod

PLAN_INI = """\
[plan]
env_id = cat_mouse
strategies = random, ranking
n_replications = 2
master_seed = 7
tournament_reps = 1

[run]
n_gen = 2
n_task = 2
n_cell = 3
n_budget = 30
n_init = 10
"""

RUN_INI = """\
[run]
env_id = cat_mouse
strategy = random
master_seed = 5
n_gen = 1
n_task = 2
n_cell = 3
n_budget = 30
n_init = 10
"""


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One fully executed plan: runs, both tournaments, measures."""
    base = tmp_path_factory.mktemp("cli")
    ini = base / "plan.ini"
    ini.write_text(PLAN_INI)
    root = base / "out"
    assert main(["run", "--config", str(ini), "--out", str(root)]) == 0
    for mode in ("final_tasks", "reselect_ranking"):
        assert main(["tournament", "--config", str(ini), "--out", str(root),
                     "--mode", mode]) == 0
    assert main(["measures", "--out", str(root)]) == 0
    return ini, root


class TestRun:
    def test_plan_layout(self, pipeline):
        _, root = pipeline
        assert (root / "plan.json").exists()
        for strat in ("random", "ranking"):
            for rep in (0, 1):
                d = root / "runs" / strat / f"rep{rep}"
                assert (d / "manifest.json").exists()
                assert (d / "config.json").exists()

    def test_each_run_has_distinct_seed(self, pipeline):
        _, root = pipeline
        seeds = set()
        for strat in ("random", "ranking"):
            for rep in (0, 1):
                cfg = json.loads((root / "runs" / strat / f"rep{rep}"
                                  / "config.json").read_text())
                seeds.add(cfg["config"]["master_seed"])
        assert len(seeds) == 4

    def test_rerun_refused_without_flags(self, pipeline, capsys):
        ini, root = pipeline
        assert main(["run", "--config", str(ini), "--out", str(root)]) == 2
        err = capsys.readouterr().err
        assert "--resume" in err and "--force" in err

    def test_resume_after_complete_is_identity(self, pipeline):
        ini, root = pipeline
        man = root / "runs" / "random" / "rep0" / "manifest.json"
        before = man.read_bytes()
        assert main(["run", "--config", str(ini), "--out", str(root),
                     "--resume"]) == 0
        assert man.read_bytes() == before

    def test_other_plan_same_dir_needs_force(self, pipeline, tmp_path):
        _, root = pipeline
        other = tmp_path / "other.ini"
        other.write_text(PLAN_INI.replace("master_seed = 7",
                                          "master_seed = 8"))
        assert main(["run", "--config", str(other),
                     "--out", str(root)]) == 3

    def test_force_restart_reproduces_bytes(self, pipeline, tmp_path):
        ini, root = pipeline
        man = root / "runs" / "ranking" / "rep1" / "manifest.json"
        before = man.read_bytes()
        copy = tmp_path / "copy"
        shutil.copytree(root, copy)
        assert main(["run", "--config", str(ini), "--out", str(copy),
                     "--force"]) == 0
        after = (copy / "runs" / "ranking" / "rep1"
                 / "manifest.json").read_bytes()
        assert after == before

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.ini"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_single_run_ini(self, tmp_path):
        ini = tmp_path / "single.ini"
        ini.write_text(RUN_INI)
        out = tmp_path / "solo"
        assert main(["run", "--config", str(ini), "--out", str(out)]) == 0
        assert (out / "manifest.json").exists()
        assert main(["replay", "--out", str(out)]) == 0

    def test_evaluation_failure_exit_code(self, tmp_path, monkeypatch):
        ini = tmp_path / "single.ini"
        ini.write_text(RUN_INI)

        def explode(*a, **kw):
            raise EvaluationError("cat_mouse", timestep=3)

        monkeypatch.setattr(runner_mod, "run_mtmb", explode)
        assert main(["run", "--config", str(ini),
                     "--out", str(tmp_path / "o")]) == 4


class TestTournament:
    def test_matrix_artifacts(self, pipeline):
        _, root = pipeline
        for mode in ("final_tasks", "reselect_ranking"):
            d = root / "tournament" / mode
            csv = (d / "matrix.csv").read_text()
            assert csv.startswith("# advqd ")
            assert f"mode={mode}" in csv.split("\n")[0]
            side = json.loads((d / "matrix.json").read_text())
            assert side["meta"]["mode"] == mode
            assert len(side["row_labels"]) == 8    # 2 strategies x 2 reps x 2

    def test_modes_share_label_grid(self, pipeline):
        # same (variant, replication, index) grid; the genomes behind the
        # labels differ because reselection picks new tasks
        _, root = pipeline
        docs = [json.loads((root / "tournament" / m / "matrix.json")
                           .read_text())
                for m in ("final_tasks", "reselect_ranking")]

        def grid(doc, key):
            return [(l["variant"], l["replication"], l["index"])
                    for l in doc[key]]

        assert grid(docs[0], "row_labels") == grid(docs[1], "row_labels")
        assert grid(docs[0], "col_labels") == grid(docs[1], "col_labels")

    def test_rerun_is_byte_identical(self, pipeline):
        ini, root = pipeline
        path = root / "tournament" / "final_tasks" / "matrix.csv"
        before = path.read_bytes()
        assert main(["tournament", "--config", str(ini), "--out", str(root),
                     "--mode", "final_tasks"]) == 0
        assert path.read_bytes() == before

    def test_foreign_plan_config_rejected(self, pipeline, tmp_path):
        _, root = pipeline
        other = tmp_path / "other.ini"
        other.write_text(PLAN_INI.replace("master_seed = 7",
                                          "master_seed = 8"))
        assert main(["tournament", "--config", str(other),
                     "--out", str(root)]) == 3

    def test_root_without_plan_rejected(self, pipeline, tmp_path, capsys):
        ini, _ = pipeline
        empty = tmp_path / "fresh"
        empty.mkdir()
        assert main(["tournament", "--config", str(ini),
                     "--out", str(empty)]) == 2
        assert "no plan.json" in capsys.readouterr().err

    def test_missing_runs_reported(self, pipeline, tmp_path, capsys):
        ini, root = pipeline
        copy = tmp_path / "partial"
        shutil.copytree(root, copy)
        shutil.rmtree(copy / "runs" / "ranking" / "rep1")
        assert main(["tournament", "--config", str(ini),
                     "--out", str(copy)]) == 2
        assert "ranking/rep1" in capsys.readouterr().err


class TestMeasures:
    def test_artifacts(self, pipeline):
        _, root = pipeline
        d = root / "measures" / "final_tasks"
        csv = (d / "measures.csv").read_text()
        assert csv.startswith("# advqd ")
        assert "side,variant,measure,median" in csv.split("\n")[1]
        txt = (d / "measures.txt").read_text()
        assert "side: red" in txt and "side: blue" in txt
        doc = json.loads((d / "measures.json").read_text())
        assert set(doc["tables"]) == {"red", "blue"}
        assert set(doc["tables"]["red"]) == {"random", "ranking"}

    def test_json_is_finite(self, pipeline):
        # unbounded scores must be serialized as null, never Infinity
        _, root = pipeline
        raw = (root / "measures" / "final_tasks"
               / "measures.json").read_text()
        assert "Infinity" not in raw

    def test_prints_tables(self, pipeline, capsys):
        _, root = pipeline
        assert main(["measures", "--out", str(root)]) == 0
        out = capsys.readouterr().out
        assert "Win rate" in out and "AQD-Score" in out

    def test_requires_matrix(self, pipeline):
        _, root = pipeline
        assert main(["measures", "--out", str(root),
                     "--mode", "reselect_ranking"]) == 0
        shutil.rmtree(root / "measures" / "reselect_ranking")
        shutil.rmtree(root / "tournament" / "reselect_ranking")
        assert main(["measures", "--out", str(root),
                     "--mode", "reselect_ranking"]) == 2

    def test_tampered_matrix_hash_rejected(self, pipeline, tmp_path):
        _, root = pipeline
        copy = tmp_path / "copy"
        shutil.copytree(root, copy)
        mpath = copy / "tournament" / "final_tasks" / "matrix.json"
        doc = json.loads(mpath.read_text())
        doc["meta"]["plan_hash"] = "0" * 16
        mpath.write_text(json.dumps(doc))
        assert main(["measures", "--out", str(copy)]) == 3

    def test_config_cross_check(self, pipeline, tmp_path):
        ini, root = pipeline
        assert main(["measures", "--config", str(ini),
                     "--out", str(root)]) == 0
        other = tmp_path / "other.ini"
        other.write_text(PLAN_INI.replace("master_seed = 7",
                                          "master_seed = 8"))
        assert main(["measures", "--config", str(other),
                     "--out", str(root)]) == 3


class TestRender:
    def test_archive_curves(self, pipeline):
        _, root = pipeline
        assert main(["render", "--out", str(root),
                     "--run", "ranking/rep0"]) == 0
        svg = (root / "render" / "ranking_rep0_archive_sizes.svg")
        body = svg.read_text()
        assert body.startswith("<svg")
        assert "advqd" in body    # version stamp in the description

    def test_best_duel(self, pipeline):
        _, root = pipeline
        assert main(["render", "--out", str(root), "--duel", "best"]) == 0
        svgs = list((root / "render").glob("duel_final_tasks_*.svg"))
        assert svgs and svgs[0].read_text().startswith("<svg")

    def test_explicit_duel_cell(self, pipeline):
        _, root = pipeline
        assert main(["render", "--out", str(root), "--duel", "0,1"]) == 0
        assert (root / "render" / "duel_final_tasks_0_1.svg").exists()

    def test_render_is_deterministic(self, pipeline):
        _, root = pipeline
        path = root / "render" / "duel_final_tasks_0_1.svg"
        before = path.read_bytes()
        assert main(["render", "--out", str(root), "--duel", "0,1"]) == 0
        assert path.read_bytes() == before

    def test_no_selector_lists_runs(self, pipeline, capsys):
        _, root = pipeline
        assert main(["render", "--out", str(root)]) == 2
        err = capsys.readouterr().err
        assert "ranking/rep0" in err

    def test_unknown_run(self, pipeline):
        _, root = pipeline
        assert main(["render", "--out", str(root),
                     "--run", "ranking/rep9"]) == 2


class TestReplay:
    def test_verifies_stored_run(self, pipeline, capsys):
        _, root = pipeline
        assert main(["replay", "--out", str(root),
                     "--run", "random/rep1"]) == 0
        assert "verified" in capsys.readouterr().out

    def test_detects_tampering(self, pipeline, tmp_path):
        _, root = pipeline
        copy = tmp_path / "copy"
        shutil.copytree(root / "runs" / "random" / "rep0", copy)
        man = json.loads((copy / "manifest.json").read_text())
        man["total_evals"] += 1
        (copy / "manifest.json").write_text(json.dumps(man))
        assert main(["replay", "--out", str(copy)]) == 3

    def test_needs_run_selector_for_plan_roots(self, pipeline):
        _, root = pipeline
        assert main(["replay", "--out", str(root)]) == 2


class TestParser:
    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit):
            main(["polish"])

    def test_bad_mode_value(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["tournament", "--config", "x", "--out", str(tmp_path),
                  "--mode", "bogus"])

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit):
            main(["--version"])
        assert "advqd" in capsys.readouterr().out
