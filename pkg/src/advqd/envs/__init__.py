"""Adversarial two-player environments and the duel evaluation entry point.

Every duel is a pure function of (environment, red genome, blue genome,
seed). The outcome bundles the zero-sum fitness pair, the full entity
trajectory, and the occupancy behavior descriptor built from it. The
descriptor content is identical for both sides (it describes the duel,
not one player); the side tag only decides which archive it feeds.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..core import (ConfigError, DataIntegrityError, EvaluationError,
                    FitnessPair, Genome, Side, UsageError)
from ..policy import env_dims, unpack_params
from . import cat_mouse, pong, pursuit
from .descriptor import GRID, descriptor_length, occupancy_descriptor


@dataclass(frozen=True)
class Event:
    step: int
    kind: str


@dataclass(frozen=True)
class Trajectory:
    env_id: str
    entities: tuple
    positions: np.ndarray  # (n_entities, n_steps, 2)
    events: tuple
    raster_bounds: tuple
    extras: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return self.positions.shape[1]


@dataclass(frozen=True)
class DuelOutcome:
    fitness: FitnessPair
    behavior_red: np.ndarray
    behavior_blue: np.ndarray
    trajectory: Trajectory
    duel_seed: int


@dataclass(frozen=True)
class EnvSpec:
    env_id: str
    entities: tuple
    event_channels: tuple
    raster_bounds: tuple
    params_cls: type
    default_params: object
    run: Callable
    assemble: Callable  # raw rollout dict -> (FitnessPair, positions, events, extras)


def _assemble_pong(raw, params):
    fitness = pong.pong_fitness(*raw["points"])
    n = raw["ball"].shape[0]
    positions = np.empty((3, n, 2))
    positions[0] = raw["ball"]
    positions[1, :, 0] = params.paddle_x_red
    positions[1, :, 1] = raw["paddles"][:, 0]
    positions[2, :, 0] = params.paddle_x_blue
    positions[2, :, 1] = raw["paddles"][:, 1]
    events = tuple(Event(int(t), pong.EVENT_CHANNELS[int(s)])
                   for t, s in raw["events"])
    extras = {"points": raw["points"],
              "speeds": raw["speeds"],
              "rebounds": raw["rebounds"]}
    return fitness, positions, events, extras


def _assemble_cat_mouse(raw, params):
    fitness = cat_mouse.cat_mouse_fitness(
        raw["caught"], raw["t_catch"], raw["d_min"], raw["d_init"], params)
    events = ()
    if raw["caught"]:
        events = (Event(raw["capture_step"], "capture"),)
    extras = {"caught": raw["caught"], "t_catch": raw["t_catch"],
              "d_min": raw["d_min"], "d_init": raw["d_init"]}
    return fitness, raw["positions"], events, extras


def _assemble_pursuit(raw, params):
    fitness = pursuit.pursuit_fitness(
        raw["catches"], raw["d_min"], raw["d_init"], params)
    evs = [(raw["catch_steps"][j], pursuit.EVENT_CHANNELS[j])
           for j in range(2) if raw["catch_steps"][j] >= 0]
    evs.sort()
    events = tuple(Event(s, k) for s, k in evs)
    extras = {"catches": raw["catches"], "d_min": raw["d_min"],
              "d_init": raw["d_init"]}
    return fitness, raw["positions"], events, extras


REGISTRY = {
    "pong": EnvSpec("pong", pong.ENTITIES, pong.EVENT_CHANNELS,
                    pong.RASTER_BOUNDS, pong.PongParams, pong.DEFAULT,
                    pong.run, _assemble_pong),
    "cat_mouse": EnvSpec("cat_mouse", cat_mouse.ENTITIES,
                         cat_mouse.EVENT_CHANNELS, cat_mouse.RASTER_BOUNDS,
                         cat_mouse.CatMouseParams, cat_mouse.DEFAULT,
                         cat_mouse.run, _assemble_cat_mouse),
    "pursuit": EnvSpec("pursuit", pursuit.ENTITIES, pursuit.EVENT_CHANNELS,
                       pursuit.RASTER_BOUNDS, pursuit.PursuitParams,
                       pursuit.DEFAULT, pursuit.run, _assemble_pursuit),
}


def get_env(env_id: str) -> EnvSpec:
    try:
        return REGISTRY[env_id]
    except KeyError:
        raise ConfigError(f"unknown environment '{env_id}'") from None


def descriptor_dim(env_id: str) -> int:
    return descriptor_length(len(get_env(env_id).entities), GRID)


def behavior_descriptor(trajectory: Trajectory, perspective: Side) -> np.ndarray:
    """Occupancy descriptor of a duel. Content is perspective-independent;
    the argument exists so call sites state which archive it feeds."""
    del perspective
    return occupancy_descriptor(trajectory.positions, trajectory.raster_bounds)


def params_from_mapping(env_id: str, mapping) -> object:
    """Build env params from a string mapping (e.g. an INI section),
    falling back to defaults for absent fields."""
    spec = get_env(env_id)
    base = spec.default_params
    if not mapping:
        return base
    kwargs = {}
    for f in dataclasses.fields(spec.params_cls):
        if f.name in mapping:
            conv = int if f.type == "int" else float
            try:
                kwargs[f.name] = conv(mapping[f.name])
            except ValueError as exc:
                raise ConfigError(
                    f"bad value for {env_id}.{f.name}: {mapping[f.name]!r}") from exc
    unknown = set(mapping) - {f.name for f in dataclasses.fields(spec.params_cls)}
    if unknown:
        raise ConfigError(f"unknown {env_id} parameter(s): {sorted(unknown)}")
    return dataclasses.replace(base, **kwargs)


def evaluate_duel(env_id: str, red: Genome, blue: Genome, duel_seed: int,
                  params=None) -> DuelOutcome:
    """Run one duel and package fitness, trajectory, and descriptors."""
    spec = get_env(env_id)
    if red.side is not Side.RED or blue.side is not Side.BLUE:
        raise UsageError("evaluate_duel needs a red genome and a blue genome")
    if red.env_id != env_id or blue.env_id != env_id:
        raise UsageError(f"genome environments {red.env_id!r}/{blue.env_id!r} "
                         f"do not match duel environment {env_id!r}")
    if params is None:
        params = spec.default_params
    d_red, a_red = env_dims(env_id)
    red_w = unpack_params(red.params, d_red, a_red)
    blue_w = unpack_params(blue.params, d_red, a_red)

    raw = spec.run(red_w, blue_w, duel_seed, params)
    err = raw["error_step"]
    if err >= params.n_steps:
        raise DataIntegrityError(
            f"'{env_id}' event buffer exhausted at timestep {err - params.n_steps}")
    if err >= 0:
        raise EvaluationError(env_id, err)

    fitness, positions, events, extras = spec.assemble(raw, params)
    trajectory = Trajectory(env_id=env_id, entities=spec.entities,
                            positions=positions, events=events,
                            raster_bounds=spec.raster_bounds, extras=extras)
    behavior = occupancy_descriptor(positions, spec.raster_bounds)
    return DuelOutcome(fitness=fitness, behavior_red=behavior,
                       behavior_blue=behavior, trajectory=trajectory,
                       duel_seed=duel_seed)


__all__ = ["Event", "Trajectory", "DuelOutcome", "EnvSpec", "REGISTRY",
           "get_env", "descriptor_dim", "behavior_descriptor",
           "params_from_mapping", "evaluate_duel", "GRID"]
