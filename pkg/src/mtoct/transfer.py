"""Inter-task knowledge transfer operators.

For each target task this module tracks how helpful every other task has
been (an exponentially smoothed success rate), turns those scores into a
stochastic-universal-sampling draw of donor tasks, and reuses donor
parameter vectors through rand/1 differential mutation followed by
binomial crossover against the target's own parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TransferConfig:
    """Knobs of the transfer step. n_s = 0 disables transfer entirely."""

    n_s: int = 3
    F: float = 0.2
    CR: float = 0.5
    q_init: float = 0.005
    alpha: float = 0.3
    eps_reward: float = 1e-12

    def __post_init__(self):
        if self.n_s < 0:
            raise ValueError(f"n_s must be >= 0, got {self.n_s}")
        if not 0.0 <= self.F <= 1.0:
            raise ValueError(f"F must lie in [0, 1], got {self.F}")
        if not 0.0 <= self.CR <= 1.0:
            raise ValueError(f"CR must lie in [0, 1], got {self.CR}")
        if self.q_init <= 0.0:
            raise ValueError(f"q_init must be positive, got {self.q_init}")


@dataclass
class TransferState:
    """Helpfulness bookkeeping of one target task towards its sources.

    Arrays are indexed by source slot; source_ids maps slots back to task
    ids. Counters only grow over a run.
    """

    target_id: int
    source_ids: tuple
    q: np.ndarray
    ns: np.ndarray
    na: np.ndarray
    alpha: float
    eps_reward: float

    @classmethod
    def create(cls, target_id: int, source_ids, config: TransferConfig) -> "TransferState":
        source_ids = tuple(source_ids)
        if target_id in source_ids:
            raise ValueError(f"target task {target_id} cannot be its own source")
        k = len(source_ids)
        return cls(
            target_id=target_id,
            source_ids=source_ids,
            q=np.full(k, config.q_init),
            ns=np.zeros(k, dtype=np.int64),
            na=np.zeros(k, dtype=np.int64),
            alpha=config.alpha,
            eps_reward=config.eps_reward,
        )


_Q_FLOOR = np.finfo(np.float64).tiny


def update_scores(state: TransferState) -> TransferState:
    """Smooth each source's score towards its observed success rate:
    q <- alpha * q + (1 - alpha) * ns / (na + eps).

    Scores are floored at the smallest positive normal double: a source
    with no successes decays geometrically and would otherwise underflow
    to exactly zero after a few hundred iterations, breaking the
    strict-positivity selection invariant.
    """
    reward = state.ns / (state.na + state.eps_reward)
    state.q = np.maximum(state.alpha * state.q + (1.0 - state.alpha) * reward, _Q_FLOOR)
    return state


def sus_select(scores: np.ndarray, n_s: int, rng: np.random.Generator) -> list[int]:
    """Stochastic universal sampling of n_s distinct source slots.

    Scores are normalized internally; n_s equally spaced pointers walk the
    cumulative distribution. Slots hit more than once are refilled
    uniformly at random from the not-yet-selected slots, so the result is
    always distinct.
    """
    scores = np.asarray(scores, dtype=np.float64)
    k = scores.size
    if n_s > k:
        raise ValueError(f"cannot select {n_s} distinct sources from {k}")
    if np.any(scores <= 0.0):
        raise ValueError("all selection scores must be positive")
    cum = np.cumsum(scores / scores.sum())
    pointers = rng.uniform(0.0, 1.0 / n_s) + np.arange(n_s) / n_s
    hits = np.searchsorted(cum, pointers, side="right")
    hits = np.minimum(hits, k - 1)  # guard the cum[-1] rounding edge

    selected: list[int] = []
    chosen = set()
    refill_slots = 0
    for idx in hits:
        if idx in chosen:
            refill_slots += 1
        else:
            chosen.add(int(idx))
            selected.append(int(idx))
    if refill_slots:
        remaining = [i for i in range(k) if i not in chosen]
        for _ in range(refill_slots):
            pick = remaining.pop(int(rng.integers(len(remaining))))
            chosen.add(pick)
            selected.append(pick)
    return selected


def mutate(p1: np.ndarray, p2: np.ndarray, p3: np.ndarray, F: float) -> np.ndarray:
    """rand/1 differential mutant: p1 + F * (p2 - p3)."""
    if p1.shape != p2.shape or p1.shape != p3.shape:
        raise ValueError(
            f"donor dimension mismatch: {p1.shape}, {p2.shape}, {p3.shape}"
        )
    return p1 + F * (p2 - p3)


def crossover(
    mutant: np.ndarray, target: np.ndarray, CR: float, rng: np.random.Generator
) -> np.ndarray:
    """Binomial crossover: keep the mutant entry where a uniform draw is
    <= CR, the target entry otherwise. No dimension is forced."""
    if mutant.shape != target.shape:
        raise ValueError(f"dimension mismatch: mutant {mutant.shape}, target {target.shape}")
    draws = rng.random(mutant.shape[0])
    return np.where(draws <= CR, mutant, target)


def record_attempt(state: TransferState, selected: list[int], succeeded: bool) -> TransferState:
    """Count this iteration's attempt for every selected source; credit all
    of them jointly when the offspring replaced the target."""
    slots = np.asarray(selected, dtype=np.intp)
    state.na[slots] += 1
    if succeeded:
        state.ns[slots] += 1
    return state
