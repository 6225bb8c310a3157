"""The predictor: an LSTM chain read out through a sigmoid, one cell per
prediction step, all cells fed the same input window.

Parameters live in a single flat vector (the unit of knowledge exchanged
between tasks) with a fixed block layout; see ParamLayout. The heavy
numeric paths (batched forward, RMSE, backpropagation through time)
delegate to the selected kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

GATE_NAMES = ("f", "i", "c", "o")


@dataclass(frozen=True)
class ModelShape:
    """Architecture of one task's predictor."""

    n_f: int
    n_h: int
    horizon: int

    def __post_init__(self):
        if self.n_f < 1 or self.n_h < 1 or self.horizon < 1:
            raise ValueError(
                f"model shape fields must all be >= 1, got {self.n_f}, {self.n_h}, {self.horizon}"
            )

    @property
    def param_dim(self) -> int:
        # 4 gate matrices n_h x (n_h + n_f), 4 gate biases, readout
        # weights and readout bias.
        return 4 * self.n_h * (self.n_h + self.n_f) + 4 * self.n_h + self.n_h + 1


class ParamLayout:
    """Slicing map between the flat parameter vector and its blocks.

    Block order: W_f, W_i, W_c, W_o (each n_h x (n_h + n_f), row-major),
    b_f, b_i, b_c, b_o (each n_h), W_y (n_h), b_y (scalar).
    """

    def __init__(self, shape: ModelShape):
        self.shape = shape
        n_h, width = shape.n_h, shape.n_h + shape.n_f
        self._w_end = 4 * n_h * width
        self._b_end = self._w_end + 4 * n_h

    def unpack(self, params: np.ndarray) -> dict:
        """Views (no copies) of every block, keyed W_f..b_y."""
        n_h, width = self.shape.n_h, self.shape.n_h + self.shape.n_f
        self._check(params)
        blocks = {}
        for g_idx, g in enumerate(GATE_NAMES):
            start = g_idx * n_h * width
            blocks[f"W_{g}"] = params[start : start + n_h * width].reshape(n_h, width)
        for g_idx, g in enumerate(GATE_NAMES):
            start = self._w_end + g_idx * n_h
            blocks[f"b_{g}"] = params[start : start + n_h]
        blocks["W_y"] = params[self._b_end : self._b_end + n_h]
        blocks["b_y"] = params[self._b_end + n_h]
        return blocks

    def pack(self, blocks: dict) -> np.ndarray:
        """Assemble a fresh flat vector from a block dict."""
        n_h, width = self.shape.n_h, self.shape.n_h + self.shape.n_f
        params = np.empty(self.shape.param_dim)
        for g_idx, g in enumerate(GATE_NAMES):
            block = np.asarray(blocks[f"W_{g}"], dtype=np.float64)
            if block.shape != (n_h, width):
                raise ValueError(f"W_{g} must have shape ({n_h}, {width}), got {block.shape}")
            start = g_idx * n_h * width
            params[start : start + n_h * width] = block.reshape(-1)
        for g_idx, g in enumerate(GATE_NAMES):
            start = self._w_end + g_idx * n_h
            params[start : start + n_h] = np.asarray(blocks[f"b_{g}"], dtype=np.float64)
        params[self._b_end : self._b_end + n_h] = np.asarray(blocks["W_y"], dtype=np.float64)
        params[self._b_end + n_h] = float(blocks["b_y"])
        return params

    def _check(self, params):
        if params.shape != (self.shape.param_dim,):
            raise ValueError(
                f"parameter vector must have length {self.shape.param_dim}, got {params.shape}"
            )


def init_params(shape: ModelShape, rng: np.random.Generator) -> np.ndarray:
    """Fresh parameters: independent standard normal draws."""
    return rng.standard_normal(shape.param_dim)


def forward(params: np.ndarray, shape: ModelShape, window: np.ndarray):
    """Predictions for one input window, plus the activation cache.

    Returns (predictions of length horizon, cache); the cache is a list
    of per-step activation dicts in forward order.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (shape.n_f,):
        raise ValueError(f"window must have length {shape.n_f}, got {window.shape}")
    _check_params(params, shape)
    preds, cache = kernels.forward_cached(
        params, shape.n_f, shape.n_h, shape.horizon, window[None, :]
    )
    return preds[0], cache


def predict(params: np.ndarray, shape: ModelShape, inputs: np.ndarray) -> np.ndarray:
    """Batched predictions, shape (N, horizon)."""
    _check_params(params, shape)
    return kernels.predict(params, shape.n_f, shape.n_h, shape.horizon, inputs)


def loss_rmse(
    params: np.ndarray, shape: ModelShape, inputs: np.ndarray, targets: np.ndarray
) -> float:
    """RMSE of the predictions against targets over a sample view."""
    if len(inputs) == 0:
        raise ValueError("cannot evaluate the loss on an empty sample view")
    _check_params(params, shape)
    return kernels.loss_rmse(params, shape.n_f, shape.n_h, shape.horizon, inputs, targets)


def loss_and_gradient(
    params: np.ndarray, shape: ModelShape, inputs: np.ndarray, targets: np.ndarray
):
    """RMSE plus its gradient w.r.t. every parameter, via backpropagation
    through the chained cells. Returns (loss, gradient)."""
    if len(inputs) == 0:
        raise ValueError("cannot evaluate the loss on an empty sample view")
    _check_params(params, shape)
    return kernels.loss_and_gradient(
        params, shape.n_f, shape.n_h, shape.horizon, inputs, targets
    )


def gradient(
    params: np.ndarray, shape: ModelShape, inputs: np.ndarray, targets: np.ndarray
) -> np.ndarray:
    return loss_and_gradient(params, shape, inputs, targets)[1]


def _check_params(params, shape):
    if params.shape != (shape.param_dim,):
        raise ValueError(
            f"parameter vector must have length {shape.param_dim}, got {params.shape}"
        )
