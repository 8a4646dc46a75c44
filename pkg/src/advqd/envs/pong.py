"""Headless two-player Pong on a unit square.

Red guards the left edge, Blue the right. The ball reflects specularly off
the top and bottom walls and off paddles, gaining 5% speed per successful
rebound; a missed ball scores a point for the other side and the ball
re-serves from the center toward the conceding side at the initial speed.
Paddles read the full normalized game state and move vertically.

Timestep order: both paddles act on the observed state, then the ball
advances. Paddle rebounds use the interpolated ball height at the paddle
plane so fast balls cannot tunnel through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..core import FitnessPair
from ._mlp import mlp_scalar

# serve-angle buffer size; a point needs >= ~60 steps of travel, so 1000
# steps can never consume 64 serves
_MAX_POINTS = 64


@dataclass(frozen=True)
class PongParams:
    n_steps: int = 1000
    paddle_height: float = 0.2
    paddle_x_red: float = 0.02
    paddle_x_blue: float = 0.98
    paddle_speed: float = 0.02
    ball_radius: float = 0.01
    ball_speed: float = 0.01
    rebound_gain: float = 1.05
    serve_halfangle: float = math.pi / 4
    velocity_norm: float = 0.1  # input scaling for ball velocity

    def as_tuple(self):
        return (self.n_steps, self.paddle_height, self.paddle_x_red,
                self.paddle_x_blue, self.paddle_speed, self.ball_radius,
                self.ball_speed, self.rebound_gain, self.velocity_norm)


DEFAULT = PongParams()

ENTITIES = ("ball", "paddle_red", "paddle_blue")
EVENT_CHANNELS = ("point_red", "point_blue")
RASTER_BOUNDS = (0.0, 1.0, 0.0, 1.0)


def pong_fitness(points_red: int, points_blue: int) -> FitnessPair:
    """Share of points scored by Red; 0.5 for a scoreless tie."""
    if points_red < 0 or points_blue < 0:
        raise ValueError("point counts must be non-negative")
    total = points_red + points_blue
    if total == 0:
        return FitnessPair.from_red(0.5)
    return FitnessPair.from_red(points_red / total)


@njit(cache=True)
def _rollout(rw1, rb1, rw2, rb2, rw3, rb3,
             bw1, bb1, bw2, bb2, bw3, bb3,
             first_dir, serve_angles,
             n_steps, paddle_h, px_red, px_blue, paddle_v,
             ball_r, speed0, gain, vnorm):
    ball = np.empty((n_steps, 2))
    paddles = np.empty((n_steps, 2))
    speeds = np.empty(n_steps)
    rebounds = np.empty(n_steps, np.int64)
    events = np.full((serve_angles.shape[0], 2), -1, np.int64)
    n_ev = 0

    half = paddle_h / 2.0
    pmin, pmax = half, 1.0 - half
    plane_l = px_red + ball_r
    plane_r = px_blue - ball_r
    lo, hi = ball_r, 1.0 - ball_r

    x, y = 0.5, 0.5
    pl, pr = 0.5, 0.5
    speed = speed0
    ang = serve_angles[0]
    serve_idx = 1
    vx = first_dir * speed * np.cos(ang)
    vy = speed * np.sin(ang)
    reb = 0
    inp = np.empty(6)

    for t in range(n_steps):
        inp[0] = 2.0 * x - 1.0
        inp[1] = 2.0 * y - 1.0
        inp[2] = min(1.0, max(-1.0, vx / vnorm))
        inp[3] = min(1.0, max(-1.0, vy / vnorm))
        inp[4] = 2.0 * pl - 1.0
        inp[5] = 2.0 * pr - 1.0
        a_red = mlp_scalar(rw1, rb1, rw2, rb2, rw3, rb3, inp)
        a_blue = mlp_scalar(bw1, bb1, bw2, bb2, bw3, bb3, inp)
        pl = min(pmax, max(pmin, pl + a_red * paddle_v))
        pr = min(pmax, max(pmin, pr + a_blue * paddle_v))

        x0, y0 = x, y
        x1 = x + vx
        y1 = y + vy

        if vx < 0.0 and x0 > plane_l and x1 <= plane_l:
            tt = (x0 - plane_l) / (x0 - x1)
            yc = y0 + (y1 - y0) * tt
            while yc < lo or yc > hi:  # fold through wall reflections
                if yc < lo:
                    yc = 2.0 * lo - yc
                else:
                    yc = 2.0 * hi - yc
            if abs(yc - pl) <= half + ball_r:
                x1 = 2.0 * plane_l - x1
                vx = -vx * gain
                vy = vy * gain
                speed = speed * gain
                reb += 1
        elif vx > 0.0 and x0 < plane_r and x1 >= plane_r:
            tt = (plane_r - x0) / (x1 - x0)
            yc = y0 + (y1 - y0) * tt
            while yc < lo or yc > hi:
                if yc < lo:
                    yc = 2.0 * lo - yc
                else:
                    yc = 2.0 * hi - yc
            if abs(yc - pr) <= half + ball_r:
                x1 = 2.0 * plane_r - x1
                vx = -vx * gain
                vy = vy * gain
                speed = speed * gain
                reb += 1

        while y1 < lo or y1 > hi:
            if y1 < lo:
                y1 = 2.0 * lo - y1
            else:
                y1 = 2.0 * hi - y1
            vy = -vy

        x, y = x1, y1

        scorer = -1
        if x + ball_r < 0.0:
            scorer = 1  # Red conceded, Blue scores
        elif x - ball_r > 1.0:
            scorer = 0
        if scorer >= 0:
            events[n_ev, 0] = t
            events[n_ev, 1] = scorer
            n_ev += 1
            if serve_idx >= serve_angles.shape[0]:
                # cannot happen in n_steps <= 1000 (a point needs ~50 steps);
                # code >= n_steps marks buffer exhaustion, not state blowup
                return ball, paddles, events, n_ev, speeds, rebounds, n_steps + t
            # re-serve toward the conceding side at base speed
            dirx = 1.0 if scorer == 0 else -1.0
            ang = serve_angles[serve_idx]
            serve_idx += 1
            x, y = 0.5, 0.5
            speed = speed0
            vx = dirx * speed * np.cos(ang)
            vy = speed * np.sin(ang)
            reb = 0

        ball[t, 0] = x
        ball[t, 1] = y
        paddles[t, 0] = pl
        paddles[t, 1] = pr
        speeds[t] = speed
        rebounds[t] = reb
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(pl) and np.isfinite(pr)):
            return ball, paddles, events, n_ev, speeds, rebounds, t

    return ball, paddles, events, n_ev, speeds, rebounds, -1


def run(red_weights, blue_weights, duel_seed: int, params: PongParams = DEFAULT):
    """Roll out one duel. Returns raw arrays plus the point counts."""
    rng = np.random.default_rng(np.random.PCG64(duel_seed))
    first_dir = -1.0 if rng.integers(2) == 0 else 1.0
    serve_angles = rng.uniform(-params.serve_halfangle, params.serve_halfangle,
                               size=_MAX_POINTS)
    (n_steps, paddle_h, px_red, px_blue, paddle_v,
     ball_r, speed0, gain, vnorm) = params.as_tuple()
    ball, paddles, events, n_ev, speeds, rebounds, err = _rollout(
        *red_weights, *blue_weights, first_dir, serve_angles,
        n_steps, paddle_h, px_red, px_blue, paddle_v,
        ball_r, speed0, gain, vnorm)
    points_red = int(np.sum(events[:n_ev, 1] == 0))
    points_blue = int(np.sum(events[:n_ev, 1] == 1))
    return {
        "ball": ball,
        "paddles": paddles,
        "events": events[:n_ev],
        "points": (points_red, points_blue),
        "speeds": speeds,
        "rebounds": rebounds,
        "error_step": int(err),
    }
