"""Two pursuers versus two evaders in a walled arena with a central disc.

All four agents move at the same speed; each side shares one policy
network, distinguished by an id input. Evaders freeze once caught
(distance to any pursuer below the capture threshold) and their caught
flag flips in everyone's observation. The arena walls clamp motion and
the central disc is impassable.

Red (pursuers) fitness has three ordered modes: both evaders caught
(0.5..1, earlier is better), one caught (0.25..0.5, closing progress on
the survivor), none caught (0..0.25, summed closing progress).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..core import ConfigError, FitnessPair
from ._mlp import mlp_scalar


@dataclass(frozen=True)
class PursuitParams:
    n_steps: int = 500
    dt: float = 0.01
    speed: float = 1.0
    capture_radius: float = 0.15
    disc_radius: float = 0.3
    arena_halfwidth: float = 1.0
    spawn_margin: float = 0.45  # evaders spawn at least this far from center

    def as_tuple(self):
        return (self.n_steps, self.dt, self.speed, self.capture_radius,
                self.disc_radius, self.arena_halfwidth)


DEFAULT = PursuitParams()

ENTITIES = ("pursuer_0", "pursuer_1", "evader_0", "evader_1")
EVENT_CHANNELS = ("capture_0", "capture_1")
RASTER_BOUNDS = (-1.0, 1.0, -1.0, 1.0)

_PURSUER_STARTS = ((-0.8, -0.4), (-0.8, 0.4))


def pursuit_fitness(catches, d_min, d_init,
                    params: PursuitParams = DEFAULT) -> FitnessPair:
    """Pursuer fitness from per-evader catch times (None if uncaught),
    closest distances, and initial distances."""
    horizon = params.n_steps * params.dt
    thresh = params.capture_radius
    for j in range(2):
        if d_init[j] <= thresh:
            raise ConfigError("evader starts inside the capture radius")
        if catches[j] is not None and not 0.0 < catches[j] <= horizon:
            raise ValueError("capture time outside the episode")

    def progress(j):
        p = (d_init[j] - d_min[j]) / (d_init[j] - thresh)
        return min(1.0, max(0.0, p))

    n_caught = sum(c is not None for c in catches)
    if n_caught == 2:
        # mean catch time mapped onto [0.5, 1]: both at t=0 gives 1,
        # both at the horizon gives 0.5
        f_red = 1.0 - (catches[0] + catches[1]) / (4.0 * horizon)
    elif n_caught == 1:
        survivor = 0 if catches[0] is None else 1
        f_red = 0.25 + 0.25 * progress(survivor)
    else:
        f_red = 0.125 * (progress(0) + progress(1))
    return FitnessPair.from_red(f_red)


@njit(cache=True)
def _confine(x, y, ox, oy, halfw, disc_r):
    # clamp to the arena, then push out of the central disc
    x = min(halfw, max(-halfw, x))
    y = min(halfw, max(-halfw, y))
    d = np.sqrt(x * x + y * y)
    if d < disc_r:
        if d < 1e-12:
            return ox, oy  # degenerate: stay put
        x = x / d * disc_r
        y = y / d * disc_r
    return x, y


@njit(cache=True)
def _rollout(rw1, rb1, rw2, rb2, rw3, rb3,
             bw1, bb1, bw2, bb2, bw3, bb3,
             e0x, e0y, e1x, e1y,
             n_steps, dt, speed, capture_r, disc_r, halfw):
    pos = np.empty((4, n_steps, 2))
    px = np.array([-0.8, -0.8])
    py = np.array([-0.4, 0.4])
    ex = np.array([e0x, e1x])
    ey = np.array([e0y, e1y])
    caught = np.zeros(2)
    catch_step = np.full(2, -1, np.int64)

    d_init = np.empty(2)
    d_min = np.empty(2)
    for j in range(2):
        d0 = np.sqrt((ex[j] - px[0]) ** 2 + (ey[j] - py[0]) ** 2)
        d1 = np.sqrt((ex[j] - px[1]) ** 2 + (ey[j] - py[1]) ** 2)
        d_init[j] = min(d0, d1)
        d_min[j] = d_init[j]

    inp = np.empty(11)
    head = np.empty(4)
    step_v = speed * dt

    for t in range(n_steps):
        # pursuers observe: own pos, both evaders relative, teammate
        # relative, own id, caught flags
        for i in range(2):
            o = 1 - i
            inp[0] = px[i]
            inp[1] = py[i]
            inp[2] = (ex[0] - px[i]) * 0.5
            inp[3] = (ey[0] - py[i]) * 0.5
            inp[4] = (ex[1] - px[i]) * 0.5
            inp[5] = (ey[1] - py[i]) * 0.5
            inp[6] = (px[o] - px[i]) * 0.5
            inp[7] = (py[o] - py[i]) * 0.5
            inp[8] = 1.0 if i == 0 else -1.0
            inp[9] = caught[0]
            inp[10] = caught[1]
            head[i] = mlp_scalar(rw1, rb1, rw2, rb2, rw3, rb3, inp) * np.pi
        for j in range(2):
            o = 1 - j
            inp[0] = ex[j]
            inp[1] = ey[j]
            inp[2] = (px[0] - ex[j]) * 0.5
            inp[3] = (py[0] - ey[j]) * 0.5
            inp[4] = (px[1] - ex[j]) * 0.5
            inp[5] = (py[1] - ey[j]) * 0.5
            inp[6] = (ex[o] - ex[j]) * 0.5
            inp[7] = (ey[o] - ey[j]) * 0.5
            inp[8] = 1.0 if j == 0 else -1.0
            inp[9] = caught[0]
            inp[10] = caught[1]
            head[2 + j] = mlp_scalar(bw1, bb1, bw2, bb2, bw3, bb3, inp) * np.pi

        for i in range(2):
            nx = px[i] + step_v * np.cos(head[i])
            ny = py[i] + step_v * np.sin(head[i])
            px[i], py[i] = _confine(nx, ny, px[i], py[i], halfw, disc_r)
        for j in range(2):
            if caught[j] == 0.0:
                nx = ex[j] + step_v * np.cos(head[2 + j])
                ny = ey[j] + step_v * np.sin(head[2 + j])
                ex[j], ey[j] = _confine(nx, ny, ex[j], ey[j], halfw, disc_r)

        for j in range(2):
            if caught[j] == 0.0:
                d0 = np.sqrt((ex[j] - px[0]) ** 2 + (ey[j] - py[0]) ** 2)
                d1 = np.sqrt((ex[j] - px[1]) ** 2 + (ey[j] - py[1]) ** 2)
                d = min(d0, d1)
                if d < d_min[j]:
                    d_min[j] = d
                if d < capture_r:
                    caught[j] = 1.0
                    catch_step[j] = t

        ok = True
        for i in range(2):
            pos[i, t, 0] = px[i]
            pos[i, t, 1] = py[i]
            pos[2 + i, t, 0] = ex[i]
            pos[2 + i, t, 1] = ey[i]
            if not (np.isfinite(px[i]) and np.isfinite(py[i])
                    and np.isfinite(ex[i]) and np.isfinite(ey[i])):
                ok = False
        if not ok:
            return pos, catch_step, d_min, d_init, t
    return pos, catch_step, d_min, d_init, -1


def spawn_evaders(rng, params: PursuitParams = DEFAULT):
    """Seeded evader start positions, rejection-sampled clear of the disc."""
    out = []
    for _ in range(2):
        while True:
            x = rng.uniform(0.3, 0.9)
            y = rng.uniform(-0.9, 0.9)
            if math.hypot(x, y) >= params.spawn_margin:
                out.append((x, y))
                break
    return out


def run(red_weights, blue_weights, duel_seed: int,
        params: PursuitParams = DEFAULT):
    """Roll out one duel. Evader spawns come from the duel seed."""
    rng = np.random.default_rng(np.random.PCG64(duel_seed))
    (e0, e1) = spawn_evaders(rng, params)
    pos, catch_step, d_min, d_init, err = _rollout(
        *red_weights, *blue_weights, e0[0], e0[1], e1[0], e1[1],
        *params.as_tuple())
    catches = tuple(None if catch_step[j] < 0 else (catch_step[j] + 1) * params.dt
                    for j in range(2))
    return {
        "positions": pos,
        "catches": catches,
        "catch_steps": tuple(int(s) for s in catch_step),
        "d_min": tuple(float(v) for v in d_min),
        "d_init": tuple(float(v) for v in d_init),
        "error_step": int(err),
    }
