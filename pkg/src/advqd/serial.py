"""Deterministic file I/O helpers.

All artifacts must be byte-identical across re-runs with the same seed,
so gzip members are written with a zeroed mtime, JSON is emitted with a
fixed compact format, and floats rely on Python's repr round-trip (json
parses them back to the exact same double). Writes go through a
temp-file rename so an interrupted run never leaves a truncated file.
"""

from __future__ import annotations

import gzip
import json
import os

import numpy as np


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _atomic_write_bytes(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def dump_json_gz(obj, path: str) -> None:
    buf = gzip.compress(_dumps(obj).encode("utf-8"), mtime=0)
    _atomic_write_bytes(path, buf)


def load_json_gz(path: str):
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(obj, path: str) -> None:
    _atomic_write_bytes(path, (_dumps(obj) + "\n").encode("utf-8"))


def load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_jsonl(records, path: str) -> None:
    lines = "".join(_dumps(r) + "\n" for r in records)
    _atomic_write_bytes(path, lines.encode("utf-8"))


def write_jsonl_gz(records, path: str) -> None:
    lines = "".join(_dumps(r) + "\n" for r in records)
    _atomic_write_bytes(path, gzip.compress(lines.encode("utf-8"), mtime=0))


def read_jsonl_gz(path: str):
    out = []
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def read_jsonl(path: str):
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def write_text(text: str, path: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def vec_to_sparse(v: np.ndarray) -> list:
    """Mostly-zero vector -> [[index, value], ...] (indices ascending)."""
    v = np.asarray(v, dtype=np.float64)
    idx = np.nonzero(v)[0]
    return [[int(i), float(v[i])] for i in idx]


def sparse_to_vec(pairs, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.float64)
    for i, x in pairs:
        v[i] = x
    return v


def vec_to_list(v: np.ndarray) -> list:
    return [float(x) for x in np.asarray(v, dtype=np.float64)]


def occupancy_to_pairs(v: np.ndarray, n_steps: int) -> list:
    """Occupancy vector (values k/n_steps) -> [[cell, count], ...].

    Counts are integers, so this is lossless where plain float JSON is
    bulky; pairs_to_occupancy re-divides and lands on the same doubles."""
    v = np.asarray(v, dtype=np.float64)
    idx = np.nonzero(v)[0]
    pairs = [[int(i), int(round(v[i] * n_steps))] for i in idx]
    for i, c in pairs:
        if c / n_steps != v[i]:
            raise ValueError("occupancy entry is not a step count ratio")
    return pairs


def pairs_to_occupancy(pairs, dim: int, n_steps: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.float64)
    for i, c in pairs:
        v[i] = c / n_steps
    return v
