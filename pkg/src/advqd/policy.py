"""Fixed-topology MLP policy: input -> 32 -> 16 -> output, tanh throughout.

Weight layout within a genome is row-major per layer, weights then biases,
layers in forward order:

    W1 (32 x D) | b1 (32) | W2 (16 x 32) | b2 (16) | W3 (A x 16) | b3 (A)

so any two implementations agree on which flat index is which parameter.
"""

from __future__ import annotations

import numpy as np

from .core import ENV_IDS as _CORE_ENV_IDS
from .core import ConfigError, Genome, Side

HIDDEN = (32, 16)

# env_id -> (controller input dimension, action dimension); identical for
# both sides in all three games.
ENV_DIMS = {
    "pong": (6, 1),
    "cat_mouse": (5, 1),
    "pursuit": (11, 1),
}

ENV_IDS = _CORE_ENV_IDS


def env_dims(env_id: str) -> tuple[int, int]:
    try:
        return ENV_DIMS[env_id]
    except KeyError:
        raise ConfigError(f"unknown environment '{env_id}'") from None


def genome_dim(env_id: str, side: Side) -> int:
    """Parameter count of the policy network for one side of an environment."""
    d, a = env_dims(env_id)
    h1, h2 = HIDDEN
    return (d * h1 + h1) + (h1 * h2 + h2) + (h2 * a + a)


def unpack_params(params: np.ndarray, d_in: int, d_out: int):
    """Split a flat parameter vector into (W1, b1, W2, b2, W3, b3)."""
    h1, h2 = HIDDEN
    sizes = [d_in * h1, h1, h1 * h2, h2, h2 * d_out, d_out]
    if len(params) != sum(sizes):
        raise ConfigError(
            f"genome length {len(params)} does not match layout for "
            f"input dim {d_in}, action dim {d_out}"
        )
    offs = np.cumsum([0] + sizes)
    w1 = params[offs[0]:offs[1]].reshape(h1, d_in)
    b1 = params[offs[1]:offs[2]]
    w2 = params[offs[2]:offs[3]].reshape(h2, h1)
    b2 = params[offs[3]:offs[4]]
    w3 = params[offs[4]:offs[5]].reshape(d_out, h2)
    b3 = params[offs[5]:offs[6]]
    return w1, b1, w2, b2, w3, b3


def mlp_forward(genome: Genome, inputs: np.ndarray) -> np.ndarray:
    """Evaluate the policy network; every output lies in (-1, 1)."""
    d, a = env_dims(genome.env_id)
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (d,):
        raise ConfigError(
            f"input length {x.shape} does not match environment "
            f"'{genome.env_id}' input dimension {d}"
        )
    w1, b1, w2, b2, w3, b3 = unpack_params(genome.params, d, a)
    h = np.tanh(w1 @ x + b1)
    h = np.tanh(w2 @ h + b2)
    return np.tanh(w3 @ h + b3)


def random_genome(env_id: str, side: Side, rng: np.random.Generator) -> Genome:
    """Fresh genome with parameters i.i.d. uniform in [-1, 1]."""
    n = genome_dim(env_id, side)
    return Genome(side=side, params=rng.uniform(-1.0, 1.0, size=n), env_id=env_id)
