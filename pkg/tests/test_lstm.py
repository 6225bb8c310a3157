import math

import numpy as np
import pytest

from mtoct import lstm
from mtoct.lstm import ModelShape, ParamLayout

from oracles import finite_difference_gradient, max_relative_error


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


class TestModelShape:
    def test_paper_scale_dimension(self):
        assert ModelShape(n_f=24, n_h=10, horizon=1).param_dim == 1411

    def test_minimal_dimension(self):
        # 4*1*2 + 4 + 1 + 1
        assert ModelShape(n_f=1, n_h=1, horizon=1).param_dim == 14

    def test_dimension_formula_over_random_shapes(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n_f, n_h = rng.integers(1, 33, size=2)
            shape = ModelShape(int(n_f), int(n_h), horizon=int(rng.integers(1, 5)))
            blocks = ParamLayout(shape).unpack(np.zeros(shape.param_dim))
            counted = sum(np.size(b) for b in blocks.values())
            assert counted == shape.param_dim == 4 * n_h * (n_h + n_f) + 5 * n_h + 1

    def test_invalid_shape(self):
        with pytest.raises(ValueError):
            ModelShape(n_f=0, n_h=1, horizon=1)


class TestParamLayout:
    def test_pack_unpack_round_trip(self):
        shape = ModelShape(n_f=3, n_h=2, horizon=2)
        rng = np.random.default_rng(1)
        params = rng.standard_normal(shape.param_dim)
        layout = ParamLayout(shape)
        blocks = layout.unpack(params)
        repacked = layout.pack(blocks)
        assert np.array_equal(repacked, params)

    def test_blocks_are_views(self):
        shape = ModelShape(n_f=3, n_h=2, horizon=1)
        params = np.zeros(shape.param_dim)
        blocks = ParamLayout(shape).unpack(params)
        blocks["W_f"][0, 0] = 7.0
        assert params[0] == 7.0

    def test_block_order_is_w_gates_biases_readout(self):
        shape = ModelShape(n_f=1, n_h=1, horizon=1)
        params = np.arange(shape.param_dim, dtype=float)
        blocks = ParamLayout(shape).unpack(params)
        assert blocks["W_f"].tolist() == [[0.0, 1.0]]
        assert blocks["W_i"].tolist() == [[2.0, 3.0]]
        assert blocks["W_c"].tolist() == [[4.0, 5.0]]
        assert blocks["W_o"].tolist() == [[6.0, 7.0]]
        assert blocks["b_f"].tolist() == [8.0]
        assert blocks["b_o"].tolist() == [11.0]
        assert blocks["W_y"].tolist() == [12.0]
        assert blocks["b_y"] == 13.0

    def test_wrong_length_rejected(self):
        shape = ModelShape(n_f=3, n_h=2, horizon=1)
        with pytest.raises(ValueError, match=str(shape.param_dim)):
            ParamLayout(shape).unpack(np.zeros(5))


class TestInitParams:
    def test_seeded_determinism(self):
        shape = ModelShape(n_f=24, n_h=10, horizon=1)
        a = lstm.init_params(shape, np.random.default_rng(3))
        b = lstm.init_params(shape, np.random.default_rng(3))
        assert np.array_equal(a, b)
        assert a.shape == (1411,)

    def test_standard_normal_moments(self):
        shape = ModelShape(n_f=30, n_h=30, horizon=1)
        draws = lstm.init_params(shape, np.random.default_rng(4))
        assert abs(draws.mean()) < 0.05
        assert abs(draws.std() - 1.0) < 0.05


class TestForward:
    def test_zero_params_give_half_everywhere(self):
        shape = ModelShape(n_f=5, n_h=4, horizon=6)
        params = np.zeros(shape.param_dim)
        for seed in range(3):
            window = np.random.default_rng(seed).random(5)
            preds, _ = lstm.forward(params, shape, window)
            assert np.all(preds == 0.5)

    def test_single_cell_hand_computation(self):
        shape = ModelShape(n_f=1, n_h=1, horizon=1)
        layout = ParamLayout(shape)
        params = layout.pack(
            {
                "W_f": [[0.1, 0.2]],
                "W_i": [[-0.3, 0.4]],
                "W_c": [[0.5, -0.6]],
                "W_o": [[0.7, 0.8]],
                "b_f": [0.01],
                "b_i": [0.02],
                "b_c": [0.03],
                "b_o": [0.04],
                "W_y": [1.5],
                "b_y": -0.2,
            }
        )
        x = 0.9
        # One cell from zero states: z = [0, x].
        f = sigmoid(0.2 * x + 0.01)
        i = sigmoid(0.4 * x + 0.02)
        c_bar = math.tanh(-0.6 * x + 0.03)
        o = sigmoid(0.8 * x + 0.04)
        c = i * c_bar
        h = o * math.tanh(c)
        expected = sigmoid(1.5 * h - 0.2)
        preds, cache = lstm.forward(params, shape, np.array([x]))
        assert abs(preds[0] - expected) < 1e-12
        assert len(cache) == 1
        assert abs(cache[0]["f"][0, 0] - f) < 1e-12

    def test_steps_share_window_but_differ(self):
        shape = ModelShape(n_f=4, n_h=3, horizon=5)
        rng = np.random.default_rng(5)
        params = lstm.init_params(shape, rng)
        preds, _ = lstm.forward(params, shape, rng.random(4))
        assert len(set(np.round(preds, 12))) > 1

    def test_forward_deterministic_bitwise(self):
        shape = ModelShape(n_f=6, n_h=4, horizon=3)
        rng = np.random.default_rng(6)
        params = lstm.init_params(shape, rng)
        window = rng.random(6)
        a, _ = lstm.forward(params, shape, window)
        b, _ = lstm.forward(params, shape, window)
        assert np.array_equal(a, b)

    def test_outputs_strictly_inside_unit_interval(self):
        shape = ModelShape(n_f=8, n_h=6, horizon=4)
        rng = np.random.default_rng(7)
        for _ in range(10):
            params = lstm.init_params(shape, rng)
            preds = lstm.predict(params, shape, rng.random((20, 8)))
            assert np.all(preds > 0.0) and np.all(preds < 1.0)

    def test_window_length_checked(self):
        shape = ModelShape(n_f=4, n_h=2, horizon=1)
        with pytest.raises(ValueError, match="4"):
            lstm.forward(np.zeros(shape.param_dim), shape, np.zeros(3))


class TestLossRmse:
    def test_perfect_fit_is_zero(self):
        shape = ModelShape(n_f=3, n_h=2, horizon=2)
        params = np.zeros(shape.param_dim)
        inputs = np.random.default_rng(8).random((4, 3))
        targets = np.full((4, 2), 0.5)  # zero params predict exactly 0.5
        assert lstm.loss_rmse(params, shape, inputs, targets) == 0.0

    def test_single_sample_single_step(self):
        shape = ModelShape(n_f=3, n_h=2, horizon=1)
        params = np.zeros(shape.param_dim)
        inputs = np.random.default_rng(9).random((1, 3))
        assert lstm.loss_rmse(params, shape, inputs, np.zeros((1, 1))) == 0.5

    def test_hand_arithmetic_residuals(self):
        # Zero params predict 0.5; choose targets for residuals 0.1/-0.1/0.3/-0.3.
        shape = ModelShape(n_f=2, n_h=3, horizon=2)
        params = np.zeros(shape.param_dim)
        inputs = np.random.default_rng(10).random((2, 2))
        targets = 0.5 - np.array([[0.1, -0.1], [0.3, -0.3]])
        loss = lstm.loss_rmse(params, shape, inputs, targets)
        assert abs(loss - math.sqrt(0.05)) < 1e-12

    def test_empty_view_rejected(self):
        shape = ModelShape(n_f=2, n_h=2, horizon=1)
        with pytest.raises(ValueError, match="empty"):
            lstm.loss_rmse(np.zeros(shape.param_dim), shape, np.empty((0, 2)), np.empty((0, 1)))


class TestGradient:
    def test_zero_residuals_give_zero_gradient(self):
        shape = ModelShape(n_f=3, n_h=2, horizon=2)
        params = np.zeros(shape.param_dim)
        inputs = np.random.default_rng(11).random((4, 3))
        targets = np.full((4, 2), 0.5)
        loss, grad = lstm.loss_and_gradient(params, shape, inputs, targets)
        assert loss == 0.0
        assert np.all(grad == 0.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_central_differences(self, seed):
        shape = ModelShape(n_f=4, n_h=3, horizon=3)
        rng = np.random.default_rng(seed)
        params = lstm.init_params(shape, rng)
        inputs = rng.random((5, 4))
        targets = rng.random((5, 3))
        grad = lstm.gradient(params, shape, inputs, targets)
        oracle = finite_difference_gradient(
            lambda p: lstm.loss_rmse(p, shape, inputs, targets), params, step=1e-5
        )
        assert max_relative_error(grad, oracle) < 1e-4

    def test_shifted_targets_still_match_oracle(self):
        # Shifting targets rescales every residual; the RMSE chain rule
        # must keep tracking the finite-difference slope.
        shape = ModelShape(n_f=4, n_h=3, horizon=3)
        rng = np.random.default_rng(12)
        params = lstm.init_params(shape, rng)
        inputs = rng.random((5, 4))
        targets = np.clip(rng.random((5, 3)) - 0.25, 0.0, 1.0)
        grad = lstm.gradient(params, shape, inputs, targets)
        oracle = finite_difference_gradient(
            lambda p: lstm.loss_rmse(p, shape, inputs, targets), params, step=1e-5
        )
        assert max_relative_error(grad, oracle) < 1e-4
