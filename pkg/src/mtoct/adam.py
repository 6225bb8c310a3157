"""Bias-corrected Adam, one step per training iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AdamState:
    """Per-task optimizer state; never shared between tasks."""

    m: np.ndarray
    v: np.ndarray
    step_count: int
    lr: float
    beta1: float
    beta2: float
    eps: float


def adam_init(
    dim: int,
    lr: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    if dim < 1:
        raise ValueError(f"parameter dimension must be >= 1, got {dim}")
    if lr <= 0.0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    return AdamState(
        m=np.zeros(dim),
        v=np.zeros(dim),
        step_count=0,
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """One bias-corrected update; mutates the state, returns new params."""
    if grad.shape != params.shape or params.shape != state.m.shape:
        raise ValueError(
            f"dimension mismatch: params {params.shape}, grad {grad.shape}, state {state.m.shape}"
        )
    state.step_count += 1
    t = state.step_count
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1**t)
    v_hat = state.v / (1.0 - state.beta2**t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
