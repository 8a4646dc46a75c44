"""Shared domain types: sides, genomes, fitness pairs, run configuration."""

from __future__ import annotations

import configparser
import enum
import hashlib
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration or dimension mismatch."""


class UsageError(ValueError):
    """Operation called outside its contract (empty inputs, missing runs)."""


class DataIntegrityError(RuntimeError):
    """Artifacts on disk are inconsistent (mixed config hashes, bad files)."""


class EvaluationError(RuntimeError):
    """Physics produced a non-finite state; names environment and timestep."""

    def __init__(self, env_id: str, timestep: int):
        self.env_id = env_id
        self.timestep = timestep
        super().__init__(f"non-finite state in '{env_id}' at timestep {timestep}")


class Side(enum.Enum):
    RED = "red"
    BLUE = "blue"

    @property
    def opponent(self) -> "Side":
        return Side.BLUE if self is Side.RED else Side.RED


STRATEGIES = ("behavior", "random", "ranking", "pareto")

ENV_IDS = ("pong", "cat_mouse", "pursuit")


@dataclass(frozen=True)
class FitnessPair:
    """Complementary duel fitness: f_red + f_blue = 1."""

    f_red: float
    f_blue: float

    def __post_init__(self):
        if not (0.0 <= self.f_red <= 1.0 and 0.0 <= self.f_blue <= 1.0):
            raise ValueError(f"fitness out of [0,1]: {self}")
        if abs(self.f_red + self.f_blue - 1.0) > 1e-9:
            raise ValueError(f"fitness pair does not sum to 1: {self}")

    @classmethod
    def from_red(cls, f_red: float) -> "FitnessPair":
        return cls(float(f_red), 1.0 - float(f_red))

    def for_side(self, side: Side) -> float:
        return self.f_red if side is Side.RED else self.f_blue


@dataclass(frozen=True)
class Genome:
    """Flat parameter vector of one side's policy network.

    Immutable once constructed: the array is copied and marked read-only.
    """

    side: Side
    params: np.ndarray
    env_id: str

    def __post_init__(self):
        arr = np.ascontiguousarray(self.params, dtype=np.float64).copy()
        if arr.ndim != 1:
            raise ConfigError("genome params must be a flat vector")
        if not np.isfinite(arr).all():
            raise ConfigError("genome params must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "params", arr)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Genome)
            and self.side is other.side
            and self.env_id == other.env_id
            and self.params.shape == other.params.shape
            and bool(np.all(self.params == other.params))
        )

    def __hash__(self):
        return hash((self.side, self.env_id, self.params.tobytes()))

    def digest(self) -> str:
        """Short stable identity used in manifests and reports."""
        h = hashlib.sha256()
        h.update(self.side.value.encode())
        h.update(self.env_id.encode())
        h.update(self.params.tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class RunConfig:
    """Full configuration of one coevolution run."""

    env_id: str
    strategy: str
    master_seed: int
    n_gen: int = 10
    n_task: int = 50
    n_cell: int = 20
    n_budget: int = 100_000
    n_init: Optional[int] = None  # defaults to 10 * n_task
    batch_size: int = 1
    mutation_rate: float = 0.3
    mutation_sigma: float = 0.1
    backup_cap: int = 32

    def __post_init__(self):
        if self.n_init is None:
            object.__setattr__(self, "n_init", 10 * self.n_task)
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy '{self.strategy}'")
        if self.env_id not in ENV_IDS:
            raise ConfigError(f"unknown environment '{self.env_id}'")
        if self.n_task < 2:
            raise ConfigError("n_task must be >= 2")
        if self.n_cell < 2:
            raise ConfigError("n_cell must be >= 2")
        if self.n_gen < 1:
            raise ConfigError("n_gen must be >= 1")
        if self.n_budget < self.n_init:
            raise ConfigError("n_budget must be >= n_init")
        if not (0.0 < self.mutation_rate <= 1.0):
            raise ConfigError("mutation_rate must be in (0, 1]")
        if self.mutation_sigma <= 0.0:
            raise ConfigError("mutation_sigma must be > 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.backup_cap < 1:
            raise ConfigError("backup_cap must be >= 1")
        if not (0 <= self.master_seed < 2**64):
            raise ConfigError("master_seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def replace(self, **kwargs) -> "RunConfig":
        d = self.to_dict()
        d.update(kwargs)
        return RunConfig(**d)


_INT_FIELDS = {"master_seed", "n_gen", "n_task", "n_cell", "n_budget",
               "n_init", "batch_size", "backup_cap"}
_FLOAT_FIELDS = {"mutation_rate", "mutation_sigma"}
_STR_FIELDS = {"env_id", "strategy"}


def parse_run_section(section) -> dict:
    """Parse a [run] config section into RunConfig keyword arguments."""
    kwargs = {}
    for key in section:
        if key in _INT_FIELDS:
            kwargs[key] = int(section[key])
        elif key in _FLOAT_FIELDS:
            kwargs[key] = float(section[key])
        elif key in _STR_FIELDS:
            kwargs[key] = section[key].strip()
        else:
            raise ConfigError(f"unknown [run] key '{key}'")
    return kwargs


def load_run_config(path: str, overrides: Optional[dict] = None) -> RunConfig:
    """Load a RunConfig from an INI file; `overrides` wins over file values.

    The master seed must come from the file or an explicit override; there
    is no wall-clock default.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    if "run" not in parser:
        raise ConfigError(f"config file {path} has no [run] section")
    kwargs = parse_run_section(parser["run"])
    if overrides:
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
    missing = [k for k in ("env_id", "strategy", "master_seed") if k not in kwargs]
    if missing:
        raise ConfigError(f"config is missing required keys: {', '.join(missing)}")
    return RunConfig(**kwargs)


def config_hash(config: RunConfig) -> str:
    """Stable hash of a run configuration, embedded in every artifact."""
    items = sorted(config.to_dict().items())
    blob = ";".join(f"{k}={v!r}" for k, v in items)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
