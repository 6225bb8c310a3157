"""Vectorized numpy implementation of the LSTM hot kernels.

This is the fallback backend and the reference the compiled kernel is
checked against. All three entry points share the same parameter layout:
a flat vector holding, in order, the stacked gate weights W_f, W_i, W_c,
W_o (each n_h x (n_h + n_f), row-major), the gate biases b_f, b_i, b_c,
b_o (each n_h), the output weights W_y (n_h) and the output bias b_y.

The model chains `horizon` cells. Every cell is fed the same input
window; recurrence flows only through the hidden and cell states, which
start at zero. Cell t's sigmoid readout is the t-step-ahead prediction.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def _sigmoid(x):
    # Split by sign to stay overflow-free for large |x|.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _unpack(params, n_f, n_h):
    width = n_h + n_f
    w_end = 4 * n_h * width
    W = params[:w_end].reshape(4, n_h, width)
    b = params[w_end : w_end + 4 * n_h].reshape(4, n_h)
    w_y = params[w_end + 4 * n_h : w_end + 5 * n_h]
    b_y = params[w_end + 5 * n_h]
    return W, b, w_y, b_y


def _run_cells(params, n_f, n_h, horizon, X, keep_cache):
    """Forward pass over all samples at once; optionally keeps the
    per-step activations needed for backpropagation."""
    W, b, w_y, b_y = _unpack(params, n_f, n_h)
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    # Gates of all four kinds are computed from one stacked product:
    # [H, X] @ W_all^T, with W_all the 4*n_h stacked gate rows.
    W_all = W.reshape(4 * n_h, n_h + n_f)
    Wh = W_all[:, :n_h]
    Wx = W_all[:, n_h:]
    b_all = b.reshape(4 * n_h)
    x_part = X @ Wx.T + b_all  # constant across steps

    H = np.zeros((n, n_h))
    C = np.zeros((n, n_h))
    preds = np.empty((n, horizon))
    cache = [] if keep_cache else None
    for _t in range(horizon):
        A = H @ Wh.T + x_part
        f = _sigmoid(A[:, :n_h])
        i = _sigmoid(A[:, n_h : 2 * n_h])
        c_bar = np.tanh(A[:, 2 * n_h : 3 * n_h])
        o = _sigmoid(A[:, 3 * n_h :])
        C_prev = C
        C = C_prev * f + i * c_bar
        tanh_C = np.tanh(C)
        H_prev = H
        H = o * tanh_C
        y = _sigmoid(H @ w_y + b_y)
        preds[:, _t] = y
        if keep_cache:
            cache.append(
                {
                    "H_prev": H_prev,
                    "C_prev": C_prev,
                    "f": f,
                    "i": i,
                    "c_bar": c_bar,
                    "o": o,
                    "C": C,
                    "tanh_C": tanh_C,
                    "H": H,
                    "y": y,
                }
            )
    return preds, cache


def predict(params, n_f, n_h, horizon, X):
    """Predictions for a batch of input windows; shape (N, horizon)."""
    preds, _ = _run_cells(params, n_f, n_h, horizon, X, keep_cache=False)
    return preds


def forward_cached(params, n_f, n_h, horizon, X):
    """Predictions plus the per-step activation cache (list of dicts,
    one per chained cell, in forward order)."""
    return _run_cells(params, n_f, n_h, horizon, X, keep_cache=True)


def loss_rmse(params, n_f, n_h, horizon, X, Y):
    """Root mean square error over every sample and step."""
    preds = predict(params, n_f, n_h, horizon, X)
    diff = preds - np.asarray(Y, dtype=np.float64)
    return float(np.sqrt(np.mean(diff * diff)))


def loss_and_gradient(params, n_f, n_h, horizon, X, Y):
    """RMSE and its analytic gradient w.r.t. the flat parameter vector.

    Backpropagation through the chained cells, accumulated over the full
    batch. At a perfect fit the sqrt is singular, so an RMSE below 1e-12
    returns a zero gradient.
    """
    W, b, w_y, b_y = _unpack(params, n_f, n_h)
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    n = X.shape[0]
    W_all = W.reshape(4 * n_h, n_h + n_f)
    Wh = W_all[:, :n_h]

    preds, cache = _run_cells(params, n_f, n_h, horizon, X, keep_cache=True)
    resid = preds - Y
    loss = float(np.sqrt(np.mean(resid * resid)))
    grad = np.zeros_like(params)
    if loss < 1e-12:
        return loss, grad

    gW_all = np.zeros_like(W_all)
    gb_all = np.zeros(4 * n_h)
    gw_y = np.zeros(n_h)
    gb_y = 0.0

    # d(RMSE)/d(pred) for every sample and step.
    dY = resid / (n * horizon * loss)

    dH_next = np.zeros((n, n_h))
    dC_next = np.zeros((n, n_h))
    for t in range(horizon - 1, -1, -1):
        step = cache[t]
        y = step["y"]
        da_y = dY[:, t] * y * (1.0 - y)
        gw_y += da_y @ step["H"]
        gb_y += da_y.sum()
        dH = np.outer(da_y, w_y) + dH_next

        do = dH * step["tanh_C"]
        dC = dH * step["o"] * (1.0 - step["tanh_C"] ** 2) + dC_next
        df = dC * step["C_prev"]
        di = dC * step["c_bar"]
        dc_bar = dC * step["i"]

        dA = np.concatenate(
            [
                df * step["f"] * (1.0 - step["f"]),
                di * step["i"] * (1.0 - step["i"]),
                dc_bar * (1.0 - step["c_bar"] ** 2),
                do * step["o"] * (1.0 - step["o"]),
            ],
            axis=1,
        )
        Z = np.concatenate([step["H_prev"], X], axis=1)
        gW_all += dA.T @ Z
        gb_all += dA.sum(axis=0)
        dH_next = dA @ Wh
        dC_next = dC * step["f"]

    w_end = 4 * n_h * (n_h + n_f)
    grad[:w_end] = gW_all.reshape(-1)
    grad[w_end : w_end + 4 * n_h] = gb_all
    grad[w_end + 4 * n_h : w_end + 5 * n_h] = gw_y
    grad[w_end + 5 * n_h] = gb_y
    return loss, grad
