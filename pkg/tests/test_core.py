import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advqd.core import (ConfigError, EvaluationError, FitnessPair, Genome,
                        RunConfig, Side, STRATEGIES, config_hash,
                        load_run_config)


class TestFitnessPair:
    def test_zero_sum_holds(self):
        p = FitnessPair(0.75, 0.25)
        assert p.f_red == 0.75 and p.f_blue == 0.25

    def test_from_red(self):
        p = FitnessPair.from_red(0.3)
        assert p.f_blue == 0.7

    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_complement_by_construction(self, f):
        p = FitnessPair.from_red(f)
        assert abs(p.f_red + p.f_blue - 1.0) <= 1e-9

    def test_rejects_non_complementary(self):
        with pytest.raises(ValueError):
            FitnessPair(0.5, 0.6)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            FitnessPair(1.5, -0.5)

    def test_for_side(self):
        p = FitnessPair.from_red(0.8)
        assert p.for_side(Side.RED) == 0.8
        assert p.for_side(Side.BLUE) == pytest.approx(0.2)


class TestSide:
    def test_opponent(self):
        assert Side.RED.opponent is Side.BLUE
        assert Side.BLUE.opponent is Side.RED

    def test_strategy_names(self):
        assert STRATEGIES == ("behavior", "random", "ranking", "pareto")


class TestGenome:
    def _mk(self, vals):
        return Genome(side=Side.RED, params=np.array(vals, dtype=np.float64),
                      env_id="cat_mouse")

    def test_params_read_only(self):
        g = self._mk([1.0, 2.0])
        with pytest.raises(ValueError):
            g.params[0] = 5.0

    def test_equality_by_content(self):
        a = self._mk([1.0, 2.0])
        b = self._mk([1.0, 2.0])
        c = self._mk([1.0, 2.5])
        assert a == b and hash(a) == hash(b)
        assert a != c

    def test_side_and_env_part_of_identity(self):
        a = self._mk([1.0])
        b = Genome(side=Side.BLUE, params=np.array([1.0]), env_id="cat_mouse")
        assert a != b

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            self._mk([np.nan])

    def test_digest_is_stable_hex(self):
        g = self._mk([0.5, -0.25])
        d = g.digest()
        assert d == self._mk([0.5, -0.25]).digest()
        assert len(d) == 16
        int(d, 16)  # hex


class TestRunConfig:
    def _cfg(self, **kw):
        base = dict(env_id="cat_mouse", strategy="random", master_seed=7)
        base.update(kw)
        return RunConfig(**base)

    def test_defaults(self):
        c = self._cfg()
        assert c.n_init == 10 * c.n_task
        assert c.mutation_rate == 0.3 and c.mutation_sigma == 0.1

    @pytest.mark.parametrize("field,bad", [
        ("n_task", 1), ("n_cell", 1), ("n_gen", 0), ("batch_size", 0),
        ("mutation_rate", 0.0), ("mutation_rate", 1.5),
        ("mutation_sigma", 0.0), ("strategy", "greedy"),
        ("env_id", "checkers"), ("master_seed", -1),
    ])
    def test_rejects_bad_values(self, field, bad):
        with pytest.raises(ConfigError):
            self._cfg(**{field: bad})

    def test_budget_must_cover_init(self):
        with pytest.raises(ConfigError):
            self._cfg(n_task=50, n_budget=100)  # n_init defaults to 500

    def test_replace_and_to_dict_round_trip(self):
        c = self._cfg(n_gen=3)
        d = c.replace(master_seed=8)
        assert d.master_seed == 8 and d.n_gen == 3
        assert c.to_dict()["master_seed"] == 7

    def test_config_hash_sensitivity(self):
        a = config_hash(self._cfg())
        b = config_hash(self._cfg(master_seed=8))
        assert a != b
        assert a == config_hash(self._cfg())
        assert len(a) == 16


class TestConfigFile:
    def test_load_round_trip(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text("[run]\nenv_id = pong\nstrategy = ranking\n"
                     "master_seed = 123\nn_task = 4\nn_cell = 3\n"
                     "n_budget = 500\nn_gen = 2\n")
        c = load_run_config(str(p))
        assert c.env_id == "pong" and c.strategy == "ranking"
        assert c.n_task == 4 and c.master_seed == 123

    def test_overrides_win(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text("[run]\nenv_id = pong\nstrategy = ranking\n"
                     "master_seed = 123\nn_task = 4\nn_cell = 3\n"
                     "n_budget = 500\n")
        c = load_run_config(str(p), {"master_seed": 9, "strategy": "pareto"})
        assert c.master_seed == 9 and c.strategy == "pareto"

    def test_missing_seed_is_an_error(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text("[run]\nenv_id = pong\nstrategy = ranking\n")
        with pytest.raises(ConfigError):
            load_run_config(str(p))

    def test_unknown_key_is_an_error(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text("[run]\nenv_id = pong\nstrategy = ranking\n"
                     "master_seed = 1\nturbo = yes\n")
        with pytest.raises(ConfigError):
            load_run_config(str(p))


def test_evaluation_error_names_env_and_step():
    err = EvaluationError("pong", 42)
    assert "pong" in str(err) and "42" in str(err)
    assert err.env_id == "pong" and err.timestep == 42
