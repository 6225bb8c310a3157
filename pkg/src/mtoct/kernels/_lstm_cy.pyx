# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM hot kernels.

Same contract and parameter layout as mtoct.kernels.numpy_backend; plain
C loops instead of BLAS calls, which wins on the small per-task matrices
this model uses. Accumulation order is fixed (sample-major, then step),
so results are deterministic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()

NAME = "cython"


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef void _forward_sample(const double[::1] p, int n_f, int n_h, int horizon,
                          const double[:, ::1] X, Py_ssize_t s,
                          double[::1] xa, double[::1] a,
                          double[::1] h, double[::1] c,
                          double[:, ::1] preds,
                          double[:, :, ::1] F, double[:, :, ::1] I,
                          double[:, :, ::1] CB, double[:, :, ::1] O,
                          double[:, :, ::1] TC, double[:, :, ::1] H,
                          double[:, :, ::1] C, bint keep) noexcept nogil:
    cdef int width = n_h + n_f
    cdef Py_ssize_t w_end = 4 * n_h * width
    cdef Py_ssize_t off_wy = w_end + 4 * n_h
    cdef Py_ssize_t off_by = w_end + 5 * n_h
    cdef Py_ssize_t row, k, r, t
    cdef double acc, fv, iv, cbv, ov, tc, yv

    # Per-sample constant part of every gate: bias + input-window term.
    for row in range(4 * n_h):
        acc = p[w_end + row]
        for k in range(n_f):
            acc += p[row * width + n_h + k] * X[s, k]
        xa[row] = acc

    for k in range(n_h):
        h[k] = 0.0
        c[k] = 0.0

    for t in range(horizon):
        for row in range(4 * n_h):
            acc = xa[row]
            for k in range(n_h):
                acc += p[row * width + k] * h[k]
            a[row] = acc
        for r in range(n_h):
            fv = _sigmoid(a[r])
            iv = _sigmoid(a[n_h + r])
            cbv = tanh(a[2 * n_h + r])
            ov = _sigmoid(a[3 * n_h + r])
            c[r] = c[r] * fv + iv * cbv
            tc = tanh(c[r])
            h[r] = ov * tc
            if keep:
                F[s, t, r] = fv
                I[s, t, r] = iv
                CB[s, t, r] = cbv
                O[s, t, r] = ov
                TC[s, t, r] = tc
                H[s, t, r] = h[r]
                C[s, t, r] = c[r]
        acc = p[off_by]
        for k in range(n_h):
            acc += p[off_wy + k] * h[k]
        preds[s, t] = _sigmoid(acc)


def _check_args(params, n_f, n_h, horizon, X):
    params = np.ascontiguousarray(params, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    dim = 4 * n_h * (n_h + n_f) + 5 * n_h + 1
    if params.ndim != 1 or params.shape[0] != dim:
        raise ValueError(f"parameter vector must have length {dim}, got {params.shape}")
    if X.ndim != 2 or X.shape[1] != n_f:
        raise ValueError(f"inputs must be (N, {n_f}), got {X.shape}")
    return params, X


def predict(params, int n_f, int n_h, int horizon, X):
    """Predictions for a batch of input windows; shape (N, horizon)."""
    params, X = _check_args(params, n_f, n_h, horizon, X)
    cdef Py_ssize_t n = X.shape[0]
    preds = np.empty((n, horizon))
    xa = np.empty(4 * n_h)
    a = np.empty(4 * n_h)
    h = np.empty(n_h)
    c = np.empty(n_h)
    empty = np.empty((0, 0, 0))
    cdef const double[::1] p_v = params
    cdef const double[:, ::1] x_v = X
    cdef double[:, ::1] preds_v = preds
    cdef double[::1] xa_v = xa, a_v = a, h_v = h, c_v = c
    cdef double[:, :, ::1] e_v = empty
    cdef Py_ssize_t s
    with nogil:
        for s in range(n):
            _forward_sample(p_v, n_f, n_h, horizon, x_v, s, xa_v, a_v, h_v, c_v,
                            preds_v, e_v, e_v, e_v, e_v, e_v, e_v, e_v, False)
    return preds


def loss_rmse(params, int n_f, int n_h, int horizon, X, Y):
    """Root mean square error over every sample and step."""
    preds = predict(params, n_f, n_h, horizon, X)
    diff = preds - np.asarray(Y, dtype=np.float64)
    return float(np.sqrt(np.mean(diff * diff)))


def loss_and_gradient(params, int n_f, int n_h, int horizon, X, Y):
    """RMSE and its analytic gradient w.r.t. the flat parameter vector.

    An RMSE below 1e-12 returns a zero gradient (the sqrt derivative is
    singular at a perfect fit).
    """
    params, X = _check_args(params, n_f, n_h, horizon, X)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0]
    if Y.ndim != 2 or Y.shape[0] != n or Y.shape[1] != horizon:
        raise ValueError(f"targets must be ({n}, {horizon}), got {Y.shape}")

    preds = np.empty((n, horizon))
    F = np.empty((n, horizon, n_h))
    I = np.empty((n, horizon, n_h))
    CB = np.empty((n, horizon, n_h))
    O = np.empty((n, horizon, n_h))
    TC = np.empty((n, horizon, n_h))
    H = np.empty((n, horizon, n_h))
    C = np.empty((n, horizon, n_h))
    xa = np.empty(4 * n_h)
    a = np.empty(4 * n_h)
    h = np.empty(n_h)
    c = np.empty(n_h)

    cdef const double[::1] p_v = params
    cdef const double[:, ::1] x_v = X
    cdef double[:, ::1] preds_v = preds
    cdef double[::1] xa_v = xa, a_v = a, h_v = h, c_v = c
    cdef double[:, :, ::1] f_v = F, i_v = I, cb_v = CB, o_v = O
    cdef double[:, :, ::1] tc_v = TC, h3_v = H, c3_v = C
    cdef Py_ssize_t s
    with nogil:
        for s in range(n):
            _forward_sample(p_v, n_f, n_h, horizon, x_v, s, xa_v, a_v, h_v, c_v,
                            preds_v, f_v, i_v, cb_v, o_v, tc_v, h3_v, c3_v, True)

    resid = preds - Y
    cdef double loss = float(np.sqrt(np.mean(resid * resid)))
    grad = np.zeros(params.shape[0])
    if loss < 1e-12:
        return loss, grad

    dh = np.empty(n_h)
    dc = np.empty(n_h)
    dh_prev = np.empty(n_h)
    da = np.empty(4 * n_h)
    cdef double[:, ::1] resid_v = resid
    cdef double[::1] g_v = grad
    cdef double[::1] dh_v = dh, dc_v = dc, dhp_v = dh_prev, da_v = da
    cdef double scale = 1.0 / (<double> n * horizon * loss)
    cdef int width = n_h + n_f
    cdef Py_ssize_t w_end = 4 * n_h * width
    cdef Py_ssize_t off_wy = w_end + 4 * n_h
    cdef Py_ssize_t off_by = w_end + 5 * n_h
    cdef Py_ssize_t row, k, r, t
    cdef double day, yv, dhr, dor, dcr, hprev, cprev, d

    with nogil:
        for s in range(n):
            for k in range(n_h):
                dh_v[k] = 0.0
                dc_v[k] = 0.0
            for t in range(horizon - 1, -1, -1):
                yv = preds_v[s, t]
                day = resid_v[s, t] * scale * yv * (1.0 - yv)
                g_v[off_by] += day
                for k in range(n_h):
                    g_v[off_wy + k] += day * h3_v[s, t, k]
                    dh_v[k] += day * p_v[off_wy + k]
                for r in range(n_h):
                    dhr = dh_v[r]
                    dor = dhr * tc_v[s, t, r]
                    dcr = dhr * o_v[s, t, r] * (1.0 - tc_v[s, t, r] * tc_v[s, t, r]) + dc_v[r]
                    cprev = c3_v[s, t - 1, r] if t > 0 else 0.0
                    # gate pre-activation sensitivities, stacked f/i/c/o
                    da_v[r] = dcr * cprev * f_v[s, t, r] * (1.0 - f_v[s, t, r])
                    da_v[n_h + r] = dcr * cb_v[s, t, r] * i_v[s, t, r] * (1.0 - i_v[s, t, r])
                    da_v[2 * n_h + r] = dcr * i_v[s, t, r] * (1.0 - cb_v[s, t, r] * cb_v[s, t, r])
                    da_v[3 * n_h + r] = dor * o_v[s, t, r] * (1.0 - o_v[s, t, r])
                    dc_v[r] = dcr * f_v[s, t, r]
                for k in range(n_h):
                    dhp_v[k] = 0.0
                for row in range(4 * n_h):
                    d = da_v[row]
                    g_v[w_end + row] += d
                    for k in range(n_h):
                        hprev = h3_v[s, t - 1, k] if t > 0 else 0.0
                        g_v[row * width + k] += d * hprev
                        dhp_v[k] += d * p_v[row * width + k]
                    for k in range(n_f):
                        g_v[row * width + n_h + k] += d * x_v[s, k]
                for k in range(n_h):
                    dh_v[k] = dhp_v[k]
    return loss, grad
