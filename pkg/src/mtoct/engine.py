"""Experiment engine: runs the co-training method (MTO-CT) and the
independent single-task baseline (STP) over a set of prediction tasks.

Every iteration of MTO-CT, for each task in ascending id order: evaluate
the training loss, refresh the source helpfulness scores, SUS-select
donor tasks, build a candidate via rand/1 mutation plus binomial
crossover, keep it on strict improvement, log the attempt, then take one
Adam step. STP is the same loop with the transfer block removed.

Randomness is split into named streams per (run, task, purpose), so
enabling or disabling transfer never perturbs initialization draws, and
a fixed master seed reproduces results bit-for-bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import lstm
from .adam import adam_init, adam_step
from .dataio import SampleSet
from .lstm import ModelShape
from .transfer import (
    TransferConfig,
    TransferState,
    crossover,
    mutate,
    record_attempt,
    sus_select,
    update_scores,
)

METHOD_STP = "STP"
METHOD_MTOCT = "MTO-CT"

SET_A = "A"
SET_B = "B"
SET_B_HORIZONS = (6, 12, 18, 24)

# Stream purposes; fixed codes keep seeding stable across releases.
_PURPOSES = {"init": 0, "sus": 1, "crossover": 2}


@dataclass(frozen=True)
class TaskSpec:
    """One prediction task: a state's series at one horizon."""

    task_id: int
    state: str
    horizon: int
    samples: SampleSet

    def __post_init__(self):
        if self.horizon != self.samples.horizon:
            raise ValueError(
                f"task {self.task_id}: horizon {self.horizon} != samples horizon "
                f"{self.samples.horizon}"
            )


@dataclass(frozen=True)
class EngineConfig:
    method: str
    max_iter: int
    runs: int = 10
    n_h: int = 10
    transfer: TransferConfig = TransferConfig()
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    master_seed: int = 0
    mode: str = "sequential"
    workers: int = 1

    def __post_init__(self):
        if self.method not in (METHOD_STP, METHOD_MTOCT):
            raise ValueError(f"unknown method {self.method!r}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.mode not in ("sequential", "snapshot"):
            raise ValueError(f"unknown execution mode {self.mode!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class RunResult:
    method: str
    task_id: int
    state: str
    horizon: int
    run: int
    seed: int
    train_rmse: float
    test_rmse: float
    loss_evaluation_count: int
    transfer_successes: dict = field(default_factory=dict)


def task_stream(master_seed: int, run: int, task_id: int, purpose: str) -> np.random.Generator:
    """Independent generator for one (run, task, purpose) triple."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(run, task_id, _PURPOSES[purpose]))
    return np.random.default_rng(seq)


def _run_seed(master_seed: int, run: int, task_id: int) -> int:
    seq = np.random.SeedSequence(master_seed, spawn_key=(run, task_id, _PURPOSES["init"]))
    return int(seq.generate_state(1)[0])


def make_task_set(set_id: str, state_values: dict, n_f: int) -> list[TaskSpec]:
    """Build the 5-task (one-step) or 20-task (multi-horizon) grid.

    state_values maps the five region names, in canonical order, to their
    normalized day-aligned series. Task ids follow the grid convention:
    horizon rows stacked top to bottom, states left to right.
    """
    from .dataio import build_samples

    states = list(state_values)
    if len(states) != 5:
        raise ValueError(f"task grids require exactly 5 states, got {len(states)}")
    if set_id == SET_A:
        horizons = (1,)
    elif set_id == SET_B:
        horizons = SET_B_HORIZONS
    else:
        raise ValueError(f"unknown task set {set_id!r} (use 'A' or 'B')")
    tasks = []
    for h_idx, horizon in enumerate(horizons):
        for s_idx, state in enumerate(states):
            tasks.append(
                TaskSpec(
                    task_id=5 * h_idx + s_idx + 1,
                    state=state,
                    horizon=horizon,
                    samples=build_samples(state_values[state], n_f, horizon),
                )
            )
    return tasks


def _check_unique_ids(tasks):
    ids = [t.task_id for t in tasks]
    if len(ids) != len(set(ids)):
        raise ValueError(f"task ids must be unique, got {sorted(ids)}")


def run_stp(tasks: list[TaskSpec], config: EngineConfig) -> list[RunResult]:
    """Train every task independently: max_iter iterations of one training
    loss evaluation (fused with its gradient) and one Adam step."""
    if config.method != METHOD_STP:
        raise ValueError(f"run_stp called with method {config.method!r}")
    _check_unique_ids(tasks)
    tasks = sorted(tasks, key=lambda t: t.task_id)
    results = []
    for run in range(config.runs):
        for task in tasks:
            shape = ModelShape(task.samples.n_f, config.n_h, task.horizon)
            x_train, y_train = task.samples.train_view()
            params = lstm.init_params(
                shape, task_stream(config.master_seed, run, task.task_id, "init")
            )
            opt = adam_init(shape.param_dim, config.lr, config.beta1, config.beta2, config.eps)
            evals = 0
            for _ in range(config.max_iter):
                _, grad = lstm.loss_and_gradient(params, shape, x_train, y_train)
                evals += 1
                params = adam_step(opt, params, grad)
            results.append(
                _final_result(task, config, run, params, shape, evals, successes={})
            )
    return results


def run_mtoct(
    tasks: list[TaskSpec], config: EngineConfig, trace=None
) -> list[RunResult]:
    """Co-train all tasks with inter-task knowledge transfer.

    trace, when given, is called as trace(iteration, task_id, loss_before,
    loss_candidate, accepted) after every transfer decision.
    """
    if config.method != METHOD_MTOCT:
        raise ValueError(f"run_mtoct called with method {config.method!r}")
    _check_unique_ids(tasks)
    tasks = sorted(tasks, key=lambda t: t.task_id)
    n_s = config.transfer.n_s
    if n_s != 0:
        if n_s < 3:
            raise ValueError(
                f"n_s={n_s} unsupported: rand/1 mutation needs three distinct donors "
                "(use n_s >= 3, or 0 to disable transfer)"
            )
        if len(tasks) < n_s + 1:
            raise ValueError(
                f"{len(tasks)} tasks cannot provide {n_s} distinct sources per target"
            )

    snapshot_mode = config.mode == "snapshot" and n_s != 0
    results = []
    for run in range(config.runs):
        space = _RunWorkspace(tasks, config, run)
        if snapshot_mode and config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                for iteration in range(config.max_iter):
                    snapshot = dict(space.params)
                    list(
                        pool.map(
                            lambda t: space.step_task(t.task_id, iteration, snapshot, trace),
                            tasks,
                        )
                    )
        else:
            for iteration in range(config.max_iter):
                donors = dict(space.params) if snapshot_mode else space.params
                for task in tasks:
                    space.step_task(task.task_id, iteration, donors, trace)
        for task in tasks:
            results.append(space.final_result(task))
    return results


class _RunWorkspace:
    """Mutable per-run state of every co-trained task."""

    def __init__(self, tasks, config: EngineConfig, run: int):
        self.config = config
        self.run = run
        self.tasks = {t.task_id: t for t in tasks}
        self.shapes = {}
        self.views = {}
        self.params = {}
        self.opt = {}
        self.tstate = {}
        self.sus_rng = {}
        self.cross_rng = {}
        self.evals = {}
        task_ids = sorted(self.tasks)
        for tid in task_ids:
            task = self.tasks[tid]
            shape = ModelShape(task.samples.n_f, config.n_h, task.horizon)
            self.shapes[tid] = shape
            self.views[tid] = task.samples.train_view()
            self.params[tid] = lstm.init_params(
                shape, task_stream(config.master_seed, run, tid, "init")
            )
            self.opt[tid] = adam_init(
                shape.param_dim, config.lr, config.beta1, config.beta2, config.eps
            )
            sources = tuple(i for i in task_ids if i != tid)
            self.tstate[tid] = TransferState.create(tid, sources, config.transfer)
            self.sus_rng[tid] = task_stream(config.master_seed, run, tid, "sus")
            self.cross_rng[tid] = task_stream(config.master_seed, run, tid, "crossover")
            self.evals[tid] = 0

    def step_task(self, tid, iteration, donor_params, trace):
        shape = self.shapes[tid]
        x_train, y_train = self.views[tid]
        params = self.params[tid]
        loss_j = lstm.loss_rmse(params, shape, x_train, y_train)
        self.evals[tid] += 1

        if self.config.transfer.n_s > 0:
            tstate = self.tstate[tid]
            update_scores(tstate)
            slots = sus_select(tstate.q, self.config.transfer.n_s, self.sus_rng[tid])
            donors = [donor_params[tstate.source_ids[s]] for s in slots[:3]]
            mutant = mutate(donors[0], donors[1], donors[2], self.config.transfer.F)
            candidate = crossover(mutant, params, self.config.transfer.CR, self.cross_rng[tid])
            loss_new = lstm.loss_rmse(candidate, shape, x_train, y_train)
            self.evals[tid] += 1
            loss_before = loss_j
            accepted = loss_new < loss_j
            if accepted:
                params = candidate
                loss_j = loss_new
            record_attempt(tstate, slots, accepted)
            if trace is not None:
                trace(iteration, tid, loss_before, loss_new, accepted)

        _, grad = lstm.loss_and_gradient(params, shape, x_train, y_train)
        self.params[tid] = adam_step(self.opt[tid], params, grad)

    def final_result(self, task):
        tstate = self.tstate[task.task_id]
        successes = {
            source: int(count)
            for source, count in zip(tstate.source_ids, tstate.ns)
        }
        return _final_result(
            task,
            self.config,
            self.run,
            self.params[task.task_id],
            self.shapes[task.task_id],
            self.evals[task.task_id],
            successes,
        )


def _final_result(task, config, run, params, shape, evals, successes):
    x_train, y_train = task.samples.train_view()
    x_test, y_test = task.samples.test_view()
    return RunResult(
        method=config.method,
        task_id=task.task_id,
        state=task.state,
        horizon=task.horizon,
        run=run,
        seed=_run_seed(config.master_seed, run, task.task_id),
        train_rmse=lstm.loss_rmse(params, shape, x_train, y_train),
        test_rmse=lstm.loss_rmse(params, shape, x_test, y_test),
        loss_evaluation_count=evals,
        transfer_successes=successes,
    )


def run_method(tasks: list[TaskSpec], config: EngineConfig, trace=None) -> list[RunResult]:
    if config.method == METHOD_STP:
        return run_stp(tasks, config)
    return run_mtoct(tasks, config, trace=trace)
