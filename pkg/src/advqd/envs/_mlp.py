"""Numba forward pass for the fixed 32-16 policy network.

Explicit loop accumulation (no BLAS) keeps the arithmetic order fixed, so
rollouts are bit-reproducible on a given machine regardless of threading or
library builds. All game controllers have a single output neuron.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def mlp_scalar(w1, b1, w2, b2, w3, b3, x):
    h1 = np.empty(w1.shape[0])
    for i in range(w1.shape[0]):
        acc = b1[i]
        for j in range(w1.shape[1]):
            acc += w1[i, j] * x[j]
        h1[i] = np.tanh(acc)
    h2 = np.empty(w2.shape[0])
    for i in range(w2.shape[0]):
        acc = b2[i]
        for j in range(w2.shape[1]):
            acc += w2[i, j] * h1[j]
        h2[i] = np.tanh(acc)
    acc = b3[0]
    for j in range(w3.shape[1]):
        acc += w3[0, j] * h2[j]
    return np.tanh(acc)
