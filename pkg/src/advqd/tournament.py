"""Round-robin duel harness between labeled solution sets.

Every red solution meets every blue solution for a fixed number of
repetitions; each duel's seed depends only on (row, column, repetition),
so the matrix is reproducible entry by entry in any execution order.
The matrix persists as a labeled CSV of mean fitness plus a JSON
sidecar holding the structured labels, seeds, and the raw per-repetition
tensor the Elo computation consumes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import __version__
from .core import Genome, Side, UsageError
from .envs import evaluate_duel
from .rng import ROUND_ROBIN, derive_seed
from .serial import dump_json, load_json, vec_to_list, write_text


@dataclass(frozen=True)
class SolutionLabel:
    variant: str
    replication: int
    index: int          # position within its task set
    digest: str

    @property
    def text(self) -> str:
        return f"{self.variant}.r{self.replication}.t{self.index}"

    def to_dict(self) -> dict:
        return {"variant": self.variant, "replication": self.replication,
                "index": self.index, "digest": self.digest}

    @classmethod
    def from_dict(cls, d: dict) -> "SolutionLabel":
        return cls(d["variant"], int(d["replication"]), int(d["index"]),
                   d["digest"])


@dataclass(frozen=True)
class SolutionSet:
    """One run's task set entering the tournament."""
    variant: str
    replication: int
    genomes: tuple

    @property
    def key(self):
        return (self.variant, self.replication)


@dataclass
class FitnessMatrix:
    env_id: str
    reps: int
    seed: int
    row_labels: list
    col_labels: list
    per_rep: np.ndarray        # (n_rows, n_cols, reps), red perspective
    meta: dict
    row_genomes: tuple = None  # kept so any duel can be replayed later
    col_genomes: tuple = None

    @property
    def values(self) -> np.ndarray:
        return self.per_rep.mean(axis=2)

    def row_sets(self) -> dict:
        """(variant, replication) -> row indices, insertion-ordered."""
        return _group(self.row_labels)

    def col_sets(self) -> dict:
        return _group(self.col_labels)


def _group(labels) -> dict:
    sets = {}
    for i, lab in enumerate(labels):
        sets.setdefault((lab.variant, lab.replication), []).append(i)
    return sets


def _flatten(groups, side: Side, env_id: str):
    genomes, labels = [], []
    for grp in groups:
        for idx, g in enumerate(grp.genomes):
            if g.side is not side:
                raise UsageError(
                    f"{side.value} group '{grp.variant}' holds a "
                    f"{g.side.value} genome")
            if g.env_id != env_id:
                raise UsageError("tournament mixes environments: "
                                 f"{g.env_id} vs {env_id}")
            genomes.append(g)
            labels.append(SolutionLabel(grp.variant, grp.replication, idx,
                                        g.digest()))
    return genomes, labels


def round_robin(red_groups, blue_groups, reps: int, seed: int,
                env_params=None, meta=None) -> FitnessMatrix:
    """Duel every red solution against every blue solution reps times."""
    if not red_groups or not blue_groups:
        raise UsageError("round robin needs solutions on both sides")
    if reps < 1:
        raise UsageError("reps must be >= 1")
    env_id = red_groups[0].genomes[0].env_id
    reds, row_labels = _flatten(red_groups, Side.RED, env_id)
    blues, col_labels = _flatten(blue_groups, Side.BLUE, env_id)

    per_rep = np.empty((len(reds), len(blues), reps))
    for i, red in enumerate(reds):
        for j, blue in enumerate(blues):
            for k in range(reps):
                duel_seed = derive_seed(seed, (ROUND_ROBIN, i, j, k))
                out = evaluate_duel(env_id, red, blue, duel_seed,
                                    params=env_params)
                per_rep[i, j, k] = out.fitness.f_red
    return FitnessMatrix(env_id=env_id, reps=reps, seed=seed,
                         row_labels=row_labels, col_labels=col_labels,
                         per_rep=per_rep, meta=dict(meta or {}),
                         row_genomes=tuple(reds), col_genomes=tuple(blues))


def matrix_to_csv(matrix: FitnessMatrix) -> str:
    """Mean-fitness matrix as labeled CSV text (red perspective)."""
    tags = " ".join(f"{k}={matrix.meta[k]}" for k in sorted(matrix.meta))
    lines = [f"# advqd {__version__} {tags}".rstrip(),
             "," + ",".join(lab.text for lab in matrix.col_labels)]
    values = matrix.values
    for i, lab in enumerate(matrix.row_labels):
        lines.append(lab.text + ","
                     + ",".join(repr(float(v)) for v in values[i]))
    return "\n".join(lines) + "\n"


def save_matrix(matrix: FitnessMatrix, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_text(matrix_to_csv(matrix), os.path.join(out_dir, "matrix.csv"))
    sidecar = {"version": __version__,
               "env_id": matrix.env_id,
               "reps": matrix.reps,
               "seed": matrix.seed,
               "meta": matrix.meta,
               "row_labels": [lab.to_dict() for lab in matrix.row_labels],
               "col_labels": [lab.to_dict() for lab in matrix.col_labels],
               "row_genomes": [vec_to_list(g.params)
                               for g in matrix.row_genomes or ()],
               "col_genomes": [vec_to_list(g.params)
                               for g in matrix.col_genomes or ()],
               "per_rep": [[vec_to_list(cell) for cell in row]
                           for row in matrix.per_rep]}
    dump_json(sidecar, os.path.join(out_dir, "matrix.json"))


def load_matrix(out_dir: str) -> FitnessMatrix:
    d = load_json(os.path.join(out_dir, "matrix.json"))
    per_rep = np.asarray(d["per_rep"], dtype=np.float64)
    env_id = d["env_id"]

    def genomes(key, side):
        return tuple(Genome(side=side,
                            params=np.asarray(p, dtype=np.float64),
                            env_id=env_id)
                     for p in d.get(key, ()))

    return FitnessMatrix(
        env_id=env_id, reps=int(d["reps"]), seed=int(d["seed"]),
        row_labels=[SolutionLabel.from_dict(x) for x in d["row_labels"]],
        col_labels=[SolutionLabel.from_dict(x) for x in d["col_labels"]],
        per_rep=per_rep, meta=d.get("meta", {}),
        row_genomes=genomes("row_genomes", Side.RED),
        col_genomes=genomes("col_genomes", Side.BLUE))
