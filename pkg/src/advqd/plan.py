"""Experiment plans: a grid of (strategy, replication) runs plus the
tournament settings that compare them.

A plan INI has a [plan] section (environment, strategy list, replication
count, master seed, tournament reps) and a [run] section holding the
RunConfig template shared by every run. Each run's own master seed is
derived from the plan seed and its (variant, replication) coordinates,
where the variant index is the strategy's position in the canonical
strategy tuple so that trimming a plan to fewer strategies never shifts
the other runs' seeds.
"""

from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass

from .core import (STRATEGIES, ConfigError, RunConfig, parse_run_section)
from .rng import REPLICATION, derive_seed


@dataclass(frozen=True)
class ExperimentPlan:
    env_id: str
    strategies: tuple
    n_replications: int
    master_seed: int
    tournament_reps: int
    run_template: dict          # RunConfig kwargs minus env_id/strategy/seed

    def __post_init__(self):
        seen = set()
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy '{s}'")
            if s in seen:
                raise ConfigError(f"strategy '{s}' listed twice")
            seen.add(s)
        if not self.strategies:
            raise ConfigError("plan needs at least one strategy")
        if self.n_replications < 1:
            raise ConfigError("n_replications must be >= 1")
        if self.tournament_reps < 1:
            raise ConfigError("tournament_reps must be >= 1")
        for key in ("env_id", "strategy", "master_seed"):
            if key in self.run_template:
                raise ConfigError(f"[run] must not set '{key}' in a plan; "
                                  "it is plan-level")
        # fail early if the template itself is unusable
        self.run_config(self.strategies[0], 0)

    def to_dict(self) -> dict:
        return {"env_id": self.env_id, "strategies": list(self.strategies),
                "n_replications": self.n_replications,
                "master_seed": self.master_seed,
                "tournament_reps": self.tournament_reps,
                "run_template": dict(self.run_template)}

    def run_seed(self, strategy: str, replication: int) -> int:
        v = STRATEGIES.index(strategy)
        return derive_seed(self.master_seed, (REPLICATION, v, replication))

    def run_config(self, strategy: str, replication: int) -> RunConfig:
        return RunConfig(env_id=self.env_id, strategy=strategy,
                         master_seed=self.run_seed(strategy, replication),
                         **self.run_template)

    def runs(self):
        for strategy in self.strategies:
            for rep in range(self.n_replications):
                yield strategy, rep


def plan_hash(plan: ExperimentPlan) -> str:
    items = sorted(plan.to_dict().items())
    blob = ";".join(f"{k}={v!r}" for k, v in items)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def run_dir(out_root: str, strategy: str, replication: int) -> str:
    return os.path.join(out_root, "runs", strategy, f"rep{replication}")


def load_plan(path: str, seed_override: int = None) -> ExperimentPlan:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not parser.read(path):
        raise ConfigError(f"plan file not found: {path}")
    if "plan" not in parser:
        raise ConfigError(f"{path} has no [plan] section")
    sec = parser["plan"]
    known = {"env_id", "strategies", "n_replications", "master_seed",
             "tournament_reps"}
    unknown = set(sec) - known
    if unknown:
        raise ConfigError(f"unknown [plan] keys: {', '.join(sorted(unknown))}")
    missing = known - set(sec)
    if seed_override is not None:
        missing.discard("master_seed")
    if missing:
        raise ConfigError(f"[plan] is missing: {', '.join(sorted(missing))}")
    template = parse_run_section(parser["run"]) if "run" in parser else {}
    return ExperimentPlan(
        env_id=sec["env_id"].strip(),
        strategies=tuple(s.strip() for s in sec["strategies"].split(",")
                         if s.strip()),
        n_replications=int(sec["n_replications"]),
        master_seed=(seed_override if seed_override is not None
                     else int(sec["master_seed"])),
        tournament_reps=int(sec["tournament_reps"]),
        run_template=template)
