"""Occupancy-grid behavior descriptor.

Each entity's positions over the duel are rasterized into a G x G grid over
the environment's raster window; cell values are the fraction of timesteps
spent in the cell, so every entity grid sums to 1. The per-entity grids are
concatenated in the trajectory's documented entity order (grids flattened
row-major, y selecting the row). Positions outside the window (possible only
for the unbounded chase arena) are clipped onto the border cells.
"""

from __future__ import annotations

import numpy as np

GRID = 16


def occupancy_descriptor(positions: np.ndarray, bounds: tuple, grid: int = GRID) -> np.ndarray:
    """Rasterize (n_entities, T, 2) positions into concatenated occupancy grids."""
    xmin, xmax, ymin, ymax = bounds
    n_ent, n_steps, _ = positions.shape
    out = np.zeros((n_ent, grid * grid))
    sx = grid / (xmax - xmin)
    sy = grid / (ymax - ymin)
    for e in range(n_ent):
        ix = np.clip(((positions[e, :, 0] - xmin) * sx).astype(np.int64), 0, grid - 1)
        iy = np.clip(((positions[e, :, 1] - ymin) * sy).astype(np.int64), 0, grid - 1)
        flat = np.bincount(iy * grid + ix, minlength=grid * grid)
        out[e] = flat / n_steps
    return out.reshape(-1)


def descriptor_length(n_entities: int, grid: int = GRID) -> int:
    return n_entities * grid * grid
