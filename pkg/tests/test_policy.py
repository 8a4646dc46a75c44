import numpy as np
import pytest

from advqd.core import ConfigError, Genome, Side
from advqd.envs._mlp import mlp_scalar
from advqd.policy import (ENV_DIMS, env_dims, genome_dim, mlp_forward,
                          random_genome, unpack_params)


def _genome(env_id, params):
    return Genome(Side.RED, np.asarray(params, dtype=np.float64), env_id)

# hidden layout is fixed at 32-16; dims frozen from the layer arithmetic
# (d*32+32) + (32*16+16) + (16*a+a) computed by hand
EXPECTED_DIM = {"pong": 769, "cat_mouse": 737, "pursuit": 929}


@pytest.mark.parametrize("env_id,want", sorted(EXPECTED_DIM.items()))
def test_genome_dim_frozen(env_id, want):
    assert genome_dim(env_id, Side.RED) == want
    assert genome_dim(env_id, Side.BLUE) == want


def test_genome_dim_matches_layer_arithmetic():
    for env_id, (d, a) in ENV_DIMS.items():
        want = (d * 32 + 32) + (32 * 16 + 16) + (16 * a + a)
        assert genome_dim(env_id, Side.RED) == want


def test_env_dims_rejects_unknown():
    with pytest.raises(ConfigError):
        env_dims("tictactoe")


def test_unpack_shapes_and_coverage():
    d, a = env_dims("pursuit")
    n = genome_dim("pursuit", Side.RED)
    params = np.arange(n, dtype=np.float64)
    w1, b1, w2, b2, w3, b3 = unpack_params(params, d, a)
    assert w1.shape == (32, d) and b1.shape == (32,)
    assert w2.shape == (16, 32) and b2.shape == (16,)
    assert w3.shape == (a, 16) and b3.shape == (a,)
    # the six pieces tile the flat vector exactly, in order
    flat = np.concatenate([w1.ravel(), b1, w2.ravel(), b2, w3.ravel(), b3])
    assert np.array_equal(flat, params)


def test_unpack_rejects_wrong_length():
    with pytest.raises(ConfigError):
        unpack_params(np.zeros(10), 6, 1)


def test_zero_genome_outputs_zero():
    d, a = env_dims("pong")
    g = _genome("pong", np.zeros(genome_dim("pong", Side.RED)))
    assert np.allclose(mlp_forward(g, np.zeros(d)), 0.0)


def test_forward_matches_manual_tanh_chain():
    rng = np.random.default_rng(3)
    d, a = env_dims("cat_mouse")
    params = rng.uniform(-1, 1, genome_dim("cat_mouse", Side.RED))
    x = rng.uniform(-1, 1, d)
    w1, b1, w2, b2, w3, b3 = unpack_params(params, d, a)
    h1 = np.tanh(w1 @ x + b1)
    h2 = np.tanh(w2 @ h1 + b2)
    want = np.tanh(w3 @ h2 + b3)
    assert np.allclose(mlp_forward(_genome("cat_mouse", params), x),
                       want, atol=1e-12)


def test_output_strictly_inside_unit_interval():
    rng = np.random.default_rng(4)
    for env_id in ENV_DIMS:
        d, a = env_dims(env_id)
        g = _genome(env_id, rng.uniform(-1, 1, genome_dim(env_id, Side.RED)))
        for _ in range(10):
            out = mlp_forward(g, rng.uniform(-1, 1, d))
            assert np.all(np.abs(out) < 1.0)


def test_compiled_kernel_agrees_with_numpy_forward():
    rng = np.random.default_rng(5)
    for env_id in ENV_DIMS:
        d, a = env_dims(env_id)
        if a != 1:
            continue  # scalar kernel only
        g = _genome(env_id, rng.uniform(-1, 1, genome_dim(env_id, Side.RED)))
        pieces = unpack_params(g.params, d, a)
        for _ in range(20):
            x = rng.uniform(-1, 1, d)
            got = mlp_scalar(*pieces, x)
            want = mlp_forward(g, x)[0]
            assert got == pytest.approx(want, abs=1e-12)


def test_random_genome_bounds_and_determinism():
    g1 = random_genome("pong", Side.RED, np.random.default_rng(11))
    g2 = random_genome("pong", Side.RED, np.random.default_rng(11))
    g3 = random_genome("pong", Side.RED, np.random.default_rng(12))
    assert g1 == g2
    assert g1 != g3
    assert np.all(np.abs(g1.params) <= 1.0)
    assert g1.params.shape == (769,)
    assert g1.side is Side.RED and g1.env_id == "pong"
