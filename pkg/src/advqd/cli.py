"""Command line entry points.

Subcommands: run (a plan or a single run), tournament (round robin
between completed runs' task sets), measures (the six-measure tables
from a saved matrix), render (SVG plots), replay (re-execute a run and
verify it reproduces its manifest byte for byte).

Exit codes: 0 success, 2 usage or configuration, 3 data integrity,
4 evaluation failure.
"""

from __future__ import annotations

import argparse
import configparser
import os
import shutil
import sys

import numpy as np

from . import __version__
from .archive import GrowingArchive
from .core import (ConfigError, DataIntegrityError, EvaluationError, Side,
                   UsageError, config_hash, load_run_config)
from .envs import descriptor_dim, evaluate_duel
from .measures import elo_ratings, rating_percentiles
from .plan import ExperimentPlan, load_plan, plan_hash, run_dir
from .render import archive_sizes_svg, trajectory_svg
from .report import build_tables, tables_to_csv, tables_to_text
from .rng import ROUND_ROBIN, derive_seed
from .runner import load_manifest, run_game, taskset_from_dict
from .selection import select_tasks
from .serial import (dump_json, load_json, load_json_gz, write_text)
from .tournament import (SolutionSet, load_matrix, round_robin, save_matrix)

MODES = ("final_tasks", "reselect_ranking")

_ERROR_CODES = {"ConfigError": 2, "UsageError": 2,
                "DataIntegrityError": 3, "EvaluationError": 4}


def _say(msg: str) -> None:
    print(msg, flush=True)


def _is_plan_file(path: str) -> bool:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not parser.read(path):
        raise ConfigError(f"config file not found: {path}")
    return "plan" in parser


def _load_plan_checked(args) -> tuple:
    plan = load_plan(args.config, seed_override=getattr(args, "seed", None))
    return plan, plan_hash(plan)


def _verify_root(root: str, phash: str) -> None:
    path = os.path.join(root, "plan.json")
    if not os.path.exists(path):
        raise UsageError(f"{root} has no plan.json; run `advqd run` first")
    found = load_json(path)["plan_hash"]
    if found != phash:
        raise DataIntegrityError(
            f"{path} belongs to plan {found}, expected {phash}")


# ---------------------------------------------------------------- run

def _plan_worker(payload):
    """Run one replication in a worker process; returns an error triple."""
    from .core import RunConfig
    config_dict, out_dir, resume = payload
    try:
        run_game(RunConfig(**config_dict), out_dir=out_dir, resume=resume)
        return None
    except Exception as err:          # reported, not raised: siblings go on
        return (type(err).__name__, str(err))


def _run_plan(args) -> int:
    plan, phash = _load_plan_checked(args)
    root = args.out
    plan_path = os.path.join(root, "plan.json")
    if os.path.exists(plan_path):
        stored = load_json(plan_path)["plan_hash"]
        if stored != phash and not args.force:
            raise DataIntegrityError(
                f"{root} holds plan {stored}, expected {phash}; "
                "pass --force to replace it")
        if stored == phash and not (args.resume or args.force):
            raise UsageError(f"{root} already has outputs; pass --resume "
                             "to continue or --force to start over")
        if args.force:
            shutil.rmtree(root)
    os.makedirs(root, exist_ok=True)
    dump_json({"version": __version__, "plan_hash": phash,
               "plan": plan.to_dict()}, plan_path)

    jobs = [(strategy, rep, plan.run_config(strategy, rep),
             run_dir(root, strategy, rep)) for strategy, rep in plan.runs()]
    failures = []
    if args.workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        payloads = [(cfg.to_dict(), d, args.resume)
                    for _, _, cfg, d in jobs]
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            for (strategy, rep, _, _), err in zip(
                    jobs, pool.map(_plan_worker, payloads)):
                if err is not None:
                    failures.append((strategy, rep) + err)
                else:
                    _say(f"run {strategy}/rep{rep} done")
    else:
        for strategy, rep, cfg, d in jobs:
            try:
                m = run_game(cfg, out_dir=d, resume=args.resume)
                _say(f"run {strategy}/rep{rep} done "
                     f"({m.total_evals} evaluations)")
            except Exception as err:
                failures.append((strategy, rep, type(err).__name__,
                                 str(err)))
    if failures:
        for strategy, rep, kind, msg in failures:
            _say(f"FAILED {strategy}/rep{rep}: {kind}: {msg}")
        return _ERROR_CODES.get(failures[0][2], 1)
    _say(f"plan complete: {len(jobs)} runs under {root}")
    return 0


def _run_single(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    config = load_run_config(args.config, overrides)
    out = args.out
    cfg_path = os.path.join(out, "config.json")
    if os.path.exists(cfg_path):
        stored = load_json(cfg_path)["config_hash"]
        if stored != config_hash(config) and not args.force:
            raise DataIntegrityError(
                f"{out} holds config {stored}, expected "
                f"{config_hash(config)}; pass --force to replace it")
        if stored == config_hash(config) and not (args.resume or args.force):
            raise UsageError(f"{out} already has outputs; pass --resume "
                             "to continue or --force to start over")
        if args.force:
            shutil.rmtree(out)
    manifest = run_game(config, out_dir=out, resume=args.resume)
    _say(f"run done: {len(manifest.records)} generations, "
         f"{manifest.total_evals} evaluations, artifacts under {out}")
    return 0


def cmd_run(args) -> int:
    if _is_plan_file(args.config):
        return _run_plan(args)
    return _run_single(args)


# --------------------------------------------------------- tournament

def _reselect_side(rdir: str, config, side: Side):
    """Ranking-selected tasks from the last archives this side built."""
    last = config.n_gen
    gen = last if (last % 2 == 1) == (side is Side.RED) else last - 1
    if gen < 1:
        return None
    doc = load_json_gz(os.path.join(rdir, f"archives_gen{gen}.json.gz"))
    dim = descriptor_dim(config.env_id)
    archives = [GrowingArchive.from_dict(a, dim) for a in doc["archives"]]
    state = load_json_gz(os.path.join(rdir, f"state_gen{gen}.json.gz"))
    old_tasks = taskset_from_dict(state["tasks"], config.env_id)
    tasks, _, _, _ = select_tasks("ranking", archives, old_tasks, side,
                                  config)
    return tasks


def _gather_sets(plan: ExperimentPlan, root: str, mode: str):
    missing = []
    red_groups, blue_groups = [], []
    for strategy, rep in plan.runs():
        rdir = run_dir(root, strategy, rep)
        if not os.path.exists(os.path.join(rdir, "manifest.json")):
            missing.append(f"{strategy}/rep{rep}")
            continue
        manifest = load_manifest(rdir)
        if manifest.aborted is not None:
            missing.append(f"{strategy}/rep{rep} (aborted)")
            continue
        if mode == "final_tasks":
            ts_red = manifest.final_taskset(Side.RED)
            ts_blue = manifest.final_taskset(Side.BLUE)
        else:
            ts_red = _reselect_side(rdir, manifest.config, Side.RED)
            ts_blue = _reselect_side(rdir, manifest.config, Side.BLUE)
            if ts_red is None:
                ts_red = manifest.final_taskset(Side.RED)
            if ts_blue is None:     # one-generation runs: Blue never evolved
                ts_blue = manifest.final_taskset(Side.BLUE)
        red_groups.append(SolutionSet(strategy, rep, ts_red.genomes))
        blue_groups.append(SolutionSet(strategy, rep, ts_blue.genomes))
    if missing:
        raise UsageError("runs missing from output tree: "
                         + ", ".join(missing))
    return red_groups, blue_groups


def cmd_tournament(args) -> int:
    plan, phash = _load_plan_checked(args)
    root = args.out
    _verify_root(root, phash)
    mode = args.mode
    red_groups, blue_groups = _gather_sets(plan, root, mode)
    seed = derive_seed(plan.master_seed, (ROUND_ROBIN, MODES.index(mode)))
    n_task = plan.run_config(plan.strategies[0], 0).n_task
    matrix = round_robin(red_groups, blue_groups, plan.tournament_reps, seed,
                         meta={"plan_hash": phash, "mode": mode,
                               "n_task": n_task})
    out = os.path.join(root, "tournament", mode)
    save_matrix(matrix, out)
    _say(f"tournament {mode}: {matrix.per_rep.shape[0]}x"
         f"{matrix.per_rep.shape[1]} matrix, reps={matrix.reps}, "
         f"saved under {out}")
    return 0


# ----------------------------------------------------------- measures

def _definite(x):
    """inf -> None so the JSON artifact mirrors the CSV's null."""
    if isinstance(x, dict):
        return {k: _definite(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_definite(v) for v in x]
    if isinstance(x, float) and (x == float("inf") or x == float("-inf")):
        return None
    return x


def cmd_measures(args) -> int:
    root = args.out
    mode = args.mode
    mdir = os.path.join(root, "tournament", mode)
    if not os.path.exists(os.path.join(mdir, "matrix.json")):
        raise UsageError(f"no tournament matrix under {mdir}; "
                         "run `advqd tournament` first")
    matrix = load_matrix(mdir)
    stored = load_json(os.path.join(root, "plan.json"))["plan_hash"]
    got = matrix.meta.get("plan_hash")
    if got != stored:
        raise DataIntegrityError(
            f"matrix plan hash {got} does not match plan.json {stored}")
    if args.config is not None:
        _, phash = _load_plan_checked(args)
        if phash != stored:
            raise DataIntegrityError(
                f"--config hashes to {phash}, output tree is {stored}")
    tables = build_tables(matrix, k=int(matrix.meta["n_task"]))
    header = (f"# advqd {__version__} plan_hash={stored} mode={mode} "
              f"env={matrix.env_id}")
    out = os.path.join(root, "measures", mode)
    os.makedirs(out, exist_ok=True)
    write_text(header + "\n" + tables_to_csv(tables),
               os.path.join(out, "measures.csv"))
    text = header + "\n\n" + tables_to_text(tables)
    write_text(text, os.path.join(out, "measures.txt"))
    dump_json({"version": __version__, "plan_hash": stored, "mode": mode,
               "env_id": matrix.env_id, "tables": _definite(tables)},
              os.path.join(out, "measures.json"))
    _say(text)
    _say(f"measure tables saved under {out}")
    return 0


# ------------------------------------------------------------- render

def _available_runs(root: str) -> list:
    found = []
    runs = os.path.join(root, "runs")
    if os.path.isdir(runs):
        for strategy in sorted(os.listdir(runs)):
            sdir = os.path.join(runs, strategy)
            for rep in sorted(os.listdir(sdir)):
                found.append(f"{strategy}/{rep}")
    return found


def _run_dir_of(args) -> str:
    root = args.out
    if args.run:
        rdir = os.path.join(root, "runs", *args.run.split("/"))
        if not os.path.isdir(rdir):
            raise UsageError(
                f"no run '{args.run}' under {root}; available: "
                + (", ".join(_available_runs(root)) or "none"))
        return rdir
    if os.path.exists(os.path.join(root, "config.json")):
        return root                 # bare single-run directory
    raise UsageError("pass --run strategy/repN; available: "
                     + (", ".join(_available_runs(root)) or "none"))


def cmd_render(args) -> int:
    root = args.out
    rendered = []
    odir = os.path.join(root, "render")
    if args.run is None and args.duel is None:
        _run_dir_of(args)           # raises with the available-run list
    if args.run is not None:
        rdir = _run_dir_of(args)
        cfg_doc = load_json(os.path.join(rdir, "config.json"))
        n_gen = cfg_doc["config"]["n_gen"]
        gens, sizes = [], []
        for g in range(1, n_gen + 1):
            path = os.path.join(rdir, f"archives_gen{g}.json.gz")
            if not os.path.exists(path):
                break
            doc = load_json_gz(path)
            gens.append(g)
            sizes.append([len(a["cells"]) for a in doc["archives"]])
        if not gens:
            raise UsageError(f"{rdir} has no per-generation archives")
        svg = archive_sizes_svg(gens, sizes,
                                meta={"config_hash": cfg_doc["config_hash"],
                                      "run": args.run or "."})
        os.makedirs(odir, exist_ok=True)
        name = (args.run or "run").replace("/", "_") + "_archive_sizes.svg"
        path = os.path.join(odir, name)
        write_text(svg, path)
        rendered.append(path)
    if args.duel is not None:
        mdir = os.path.join(root, "tournament", args.mode)
        if not os.path.exists(os.path.join(mdir, "matrix.json")):
            raise UsageError(f"no tournament matrix under {mdir}")
        matrix = load_matrix(mdir)
        if args.duel == "best":
            rr, rb = elo_ratings(matrix.per_rep, matrix.seed)
            i = int(np.argmax(rating_percentiles(rr)))
            j = int(np.argmax(rating_percentiles(rb)))
        else:
            try:
                i, j = (int(x) for x in args.duel.split(","))
            except ValueError:
                raise UsageError("--duel takes 'best' or 'ROW,COL'")
            if not (0 <= i < len(matrix.row_labels)
                    and 0 <= j < len(matrix.col_labels)):
                raise UsageError(f"duel {i},{j} outside the "
                                 f"{len(matrix.row_labels)}x"
                                 f"{len(matrix.col_labels)} matrix")
        seed = derive_seed(matrix.seed, (ROUND_ROBIN, i, j, 0))
        out = evaluate_duel(matrix.env_id, matrix.row_genomes[i],
                            matrix.col_genomes[j], seed)
        svg = trajectory_svg(
            out.trajectory,
            meta={"red": matrix.row_labels[i].text,
                  "blue": matrix.col_labels[j].text,
                  "fitness_red": f"{out.fitness.f_red:.6g}",
                  "plan_hash": matrix.meta.get("plan_hash", "")})
        os.makedirs(odir, exist_ok=True)
        path = os.path.join(odir, f"duel_{args.mode}_{i}_{j}.svg")
        write_text(svg, path)
        rendered.append(path)
    for path in rendered:
        _say(f"rendered {path}")
    return 0


# ------------------------------------------------------------- replay

def cmd_replay(args) -> int:
    rdir = _run_dir_of(args)
    man_path = os.path.join(rdir, "manifest.json")
    if not os.path.exists(man_path):
        raise UsageError(f"{rdir} has no manifest.json")
    stored = load_manifest(rdir)
    if stored.aborted is not None:
        raise UsageError(f"{rdir} holds an aborted run; "
                         "finish it with `advqd run --resume` first")
    _say(f"replaying {stored.config.n_gen} generations "
         f"(strategy={stored.config.strategy}, "
         f"seed={stored.config.master_seed}) ...")
    fresh = run_game(stored.config)
    if fresh.to_dict() != stored.to_dict():
        raise DataIntegrityError(
            f"replay of {rdir} diverged from its stored manifest")
    _say("replay verified: manifest reproduced exactly")
    return 0


# --------------------------------------------------------------- main

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="advqd",
        description="coevolutionary adversarial quality-diversity engine")
    p.add_argument("--version", action="version",
                   version=f"advqd {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required):
        sp.add_argument("--config", required=config_required,
                        help="plan or run INI file")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the master seed")

    sp = sub.add_parser("run", help="execute a plan or a single run")
    common(sp, True)
    sp.add_argument("--workers", type=int, default=1,
                    help="parallel replication processes")
    sp.add_argument("--resume", action="store_true",
                    help="continue from the last complete generation")
    sp.add_argument("--force", action="store_true",
                    help="discard existing outputs and start over")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("tournament",
                        help="round robin between completed runs")
    common(sp, True)
    sp.add_argument("--mode", choices=MODES, default="final_tasks")
    sp.set_defaults(func=cmd_tournament)

    sp = sub.add_parser("measures",
                        help="six-measure tables from a saved matrix")
    common(sp, False)
    sp.add_argument("--mode", choices=MODES, default="final_tasks")
    sp.set_defaults(func=cmd_measures)

    sp = sub.add_parser("render", help="SVG plots from saved artifacts")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--run", default=None,
                    help="strategy/repN: archive-size curves for that run")
    sp.add_argument("--duel", default=None,
                    help="'best' or 'ROW,COL': one-frame duel plot")
    sp.add_argument("--mode", choices=MODES, default="final_tasks")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("replay",
                        help="re-run a stored run and verify its manifest")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--run", default=None, help="strategy/repN")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except DataIntegrityError as err:
        print(f"data integrity error: {err}", file=sys.stderr)
        return 3
    except EvaluationError as err:
        ctx = getattr(err, "context", None)
        print(f"evaluation error: {err}"
              + (f" (context: {ctx})" if ctx else ""), file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
