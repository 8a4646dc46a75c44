"""Cat-and-mouse pursuit in an open plane.

The cat (Red) is twice as fast as the mouse (Blue) but can only steer:
its control output is a turning rate applied to its heading. The mouse
picks an absolute heading each step. The mouse starts a seeded random
direction away from the cat and is caught when the distance drops below
the capture radius, which ends the episode.

Red's fitness rewards fast capture; if the mouse survives, the cat is
scored by how much it closed the initial gap at its nearest approach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..core import ConfigError, FitnessPair
from ._mlp import mlp_scalar


@dataclass(frozen=True)
class CatMouseParams:
    n_steps: int = 500
    dt: float = 0.01
    cat_speed: float = 2.0
    mouse_speed: float = 1.0
    turn_rate: float = 2.0  # cat steering gain, rad per unit time
    capture_radius: float = 0.2
    start_distance: float = 2.0
    position_norm: float = 5.0  # input scaling for coordinates

    def as_tuple(self):
        return (self.n_steps, self.dt, self.cat_speed, self.mouse_speed,
                self.turn_rate, self.capture_radius, self.start_distance,
                self.position_norm)


DEFAULT = CatMouseParams()

ENTITIES = ("cat", "mouse")
EVENT_CHANNELS = ("capture",)
RASTER_BOUNDS = (-8.0, 8.0, -8.0, 8.0)


def cat_mouse_fitness(caught: bool, t_catch: float, d_min: float,
                      d_init: float, params: CatMouseParams = DEFAULT) -> FitnessPair:
    """Red fitness: 1 - t_catch/(2 T) on capture, else closing progress
    scaled into [0, 0.5]."""
    horizon = params.n_steps * params.dt
    if d_init <= params.capture_radius:
        raise ConfigError("start distance must exceed the capture radius")
    if caught:
        if not 0.0 < t_catch <= horizon:
            raise ValueError("capture time outside the episode")
        f_red = 1.0 - 0.5 * t_catch / horizon
    else:
        progress = (d_init - d_min) / (d_init - params.capture_radius)
        f_red = 0.5 * min(1.0, max(0.0, progress))
    return FitnessPair.from_red(f_red)


@njit(cache=True)
def _wrap_pi(a):
    while a > np.pi:
        a -= 2.0 * np.pi
    while a < -np.pi:
        a += 2.0 * np.pi
    return a


@njit(cache=True)
def _rollout(rw1, rb1, rw2, rb2, rw3, rb3,
             bw1, bb1, bw2, bb2, bw3, bb3,
             mouse_angle,
             n_steps, dt, cat_v, mouse_v, turn_rate,
             capture_r, d0, pnorm):
    pos = np.empty((2, n_steps, 2))
    cx, cy = 0.0, 0.0
    heading = 0.0
    mx = d0 * np.cos(mouse_angle)
    my = d0 * np.sin(mouse_angle)
    d_min = np.sqrt(mx * mx + my * my)
    capture_step = -1
    inp = np.empty(5)

    for t in range(n_steps):
        if capture_step < 0:
            inp[0] = cx / pnorm
            inp[1] = cy / pnorm
            inp[2] = _wrap_pi(heading) / np.pi
            inp[3] = mx / pnorm
            inp[4] = my / pnorm
            a_cat = mlp_scalar(rw1, rb1, rw2, rb2, rw3, rb3, inp)
            a_mouse = mlp_scalar(bw1, bb1, bw2, bb2, bw3, bb3, inp)
            heading = heading + a_cat * turn_rate * dt
            cx += cat_v * dt * np.cos(heading)
            cy += cat_v * dt * np.sin(heading)
            m_head = a_mouse * np.pi
            mx += mouse_v * dt * np.cos(m_head)
            my += mouse_v * dt * np.sin(m_head)
            dx = mx - cx
            dy = my - cy
            d = np.sqrt(dx * dx + dy * dy)
            if d < d_min:
                d_min = d
            if d < capture_r:
                capture_step = t
        pos[0, t, 0] = cx
        pos[0, t, 1] = cy
        pos[1, t, 0] = mx
        pos[1, t, 1] = my
        if not (np.isfinite(cx) and np.isfinite(cy)
                and np.isfinite(mx) and np.isfinite(my)):
            return pos, capture_step, d_min, t
    return pos, capture_step, d_min, -1


def run(red_weights, blue_weights, duel_seed: int,
        params: CatMouseParams = DEFAULT):
    """Roll out one duel. Mouse spawn angle comes from the duel seed."""
    rng = np.random.default_rng(np.random.PCG64(duel_seed))
    mouse_angle = rng.uniform(-math.pi, math.pi)
    (n_steps, dt, cat_v, mouse_v, turn_rate,
     capture_r, d0, pnorm) = params.as_tuple()
    pos, capture_step, d_min, err = _rollout(
        *red_weights, *blue_weights, mouse_angle,
        n_steps, dt, cat_v, mouse_v, turn_rate, capture_r, d0, pnorm)
    caught = capture_step >= 0
    t_catch = (capture_step + 1) * dt if caught else float("nan")
    return {
        "positions": pos,
        "caught": caught,
        "t_catch": t_catch,
        "capture_step": int(capture_step),
        "d_min": float(d_min),
        "d_init": float(d0),
        "error_step": int(err),
    }
