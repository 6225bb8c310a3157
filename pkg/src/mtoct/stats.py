"""Aggregation and significance testing of experiment results.

Per task, the two methods' per-run RMSE vectors are compared with an
exact two-sided Wilcoxon signed-rank test (all 2^n sign assignments are
enumerated, feasible because runs are typically 10). Verdicts follow the
better/same/worse convention at the 0.05 level, and exports cover a raw
per-run CSV, the comparison summary, and a long-form CSV for plotting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import METHOD_MTOCT, METHOD_STP, RunResult

ALPHA = 0.05
_MAX_EXACT_N = 25
_CHUNK = 1 << 16

RAW_FILENAME = "raw_results.csv"
SUMMARY_FILENAME = "summary.csv"
LONG_FILENAME = "long_results.csv"

RAW_COLUMNS = ("method", "task_id", "state", "horizon", "run", "seed", "train_rmse", "test_rmse")
LONG_COLUMNS = ("method", "task_id", "state", "horizon", "run", "metric", "value")


def average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def wilcoxon_signed_rank(x, y) -> tuple[float, float]:
    """Exact two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped. Returns (W, p) with W = min(W+, W-) and
    p the exact probability, under sign symmetry conditional on the
    observed absolute-difference ranks, of a W at most as large as
    observed. All-zero differences give p = 1 (no evidence).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 1:
        raise ValueError(f"need two equal-length 1-d samples, got {x.shape} and {y.shape}")
    d = x - y
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        return 0.0, 1.0
    if n > _MAX_EXACT_N:
        raise ValueError(f"exact enumeration supports n <= {_MAX_EXACT_N}, got {n}")
    ranks = average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    total = float(ranks.sum())
    w = min(w_plus, total - w_plus)

    # Ranks are multiples of 0.5, so every sum below is exact in binary
    # floating point and the <= comparisons carry no rounding slack.
    count = 0
    bits = np.arange(n)
    for lo in range(0, 1 << n, _CHUNK):
        block = np.arange(lo, min(lo + _CHUNK, 1 << n))
        signs = (block[:, None] >> bits) & 1
        sim_plus = signs @ ranks
        sim_w = np.minimum(sim_plus, total - sim_plus)
        count += int(np.count_nonzero(sim_w <= w))
    return w, count / float(1 << n)


@dataclass(frozen=True)
class MetricComparison:
    """One metric's pairing of the two methods on one task."""

    mean_a: float
    mean_b: float
    p_value: float
    verdict_a: str
    verdict_b: str


@dataclass(frozen=True)
class TaskComparison:
    task_id: int
    state: str
    horizon: int
    method_a: str
    method_b: str
    runs_a_train: tuple
    runs_b_train: tuple
    runs_a_test: tuple
    runs_b_test: tuple
    train: MetricComparison
    test: MetricComparison


def _verdicts(mean_a: float, mean_b: float, p: float) -> tuple[str, str]:
    if p >= ALPHA or mean_a == mean_b:
        return "same", "same"
    return ("better", "worse") if mean_a < mean_b else ("worse", "better")


def _paired_metric(vals_a, vals_b) -> MetricComparison:
    mean_a = float(np.mean(vals_a))
    mean_b = float(np.mean(vals_b))
    _, p = wilcoxon_signed_rank(vals_a, vals_b)
    verdict_a, verdict_b = _verdicts(mean_a, mean_b, p)
    return MetricComparison(mean_a, mean_b, p, verdict_a, verdict_b)


def compare(
    results: list[RunResult],
    method_a: str = METHOD_STP,
    method_b: str = METHOD_MTOCT,
) -> tuple[list[TaskComparison], dict]:
    """Per-task paired comparison of two methods plus the +/=/- tally.

    Both methods must cover the same tasks with the same run indices;
    pairs are matched run by run.
    """
    by_key = {}
    for r in results:
        by_key.setdefault((r.method, r.task_id), []).append(r)
    task_ids = sorted({r.task_id for r in results})
    comparisons = []
    tally = {
        metric: {m: {"+": 0, "=": 0, "-": 0} for m in (method_a, method_b)}
        for metric in ("train", "test")
    }
    mark = {"better": "+", "same": "=", "worse": "-"}
    for tid in task_ids:
        try:
            rows_a = sorted(by_key[(method_a, tid)], key=lambda r: r.run)
            rows_b = sorted(by_key[(method_b, tid)], key=lambda r: r.run)
        except KeyError as missing:
            raise ValueError(f"task {tid}: no results for method {missing}") from None
        if [r.run for r in rows_a] != [r.run for r in rows_b]:
            raise ValueError(
                f"task {tid}: run indices differ between {method_a} and {method_b}"
            )
        train = _paired_metric(
            [r.train_rmse for r in rows_a], [r.train_rmse for r in rows_b]
        )
        test = _paired_metric([r.test_rmse for r in rows_a], [r.test_rmse for r in rows_b])
        comparisons.append(
            TaskComparison(
                task_id=tid,
                state=rows_a[0].state,
                horizon=rows_a[0].horizon,
                method_a=method_a,
                method_b=method_b,
                runs_a_train=tuple(r.train_rmse for r in rows_a),
                runs_b_train=tuple(r.train_rmse for r in rows_b),
                runs_a_test=tuple(r.test_rmse for r in rows_a),
                runs_b_test=tuple(r.test_rmse for r in rows_b),
                train=train,
                test=test,
            )
        )
        for metric, cmp_ in (("train", train), ("test", test)):
            tally[metric][method_a][mark[cmp_.verdict_a]] += 1
            tally[metric][method_b][mark[cmp_.verdict_b]] += 1
    return comparisons, tally


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def method_order(method: str) -> tuple:
    canonical = {METHOD_STP: 0, METHOD_MTOCT: 1}
    return (canonical.get(method, 2), method)


def export_results(results: list[RunResult], out_dir) -> dict:
    """Write the raw per-run CSV, the summary CSV, and the long-form CSV.

    Output is deterministic: fixed ordering, fixed float formatting, LF
    newlines. Returns a dict of the written paths.
    """
    if not results:
        raise ValueError("no results to export")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = sorted(results, key=lambda r: (method_order(r.method), r.task_id, r.run))
    methods = sorted({r.method for r in results}, key=method_order)

    raw_path = out_dir / RAW_FILENAME
    with raw_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RAW_COLUMNS)
        for r in ordered:
            writer.writerow(
                [
                    r.method,
                    r.task_id,
                    r.state,
                    r.horizon,
                    r.run,
                    r.seed,
                    _fmt(r.train_rmse),
                    _fmt(r.test_rmse),
                ]
            )

    long_path = out_dir / LONG_FILENAME
    with long_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LONG_COLUMNS)
        for r in ordered:
            for metric, value in (("train_rmse", r.train_rmse), ("test_rmse", r.test_rmse)):
                writer.writerow(
                    [r.method, r.task_id, r.state, r.horizon, r.run, metric, _fmt(value)]
                )

    summary_path = out_dir / SUMMARY_FILENAME
    if len(methods) == 2:
        _write_comparison_summary(summary_path, results, methods)
    else:
        _write_means_summary(summary_path, results, methods)
    return {"raw": raw_path, "summary": summary_path, "long": long_path}


def _write_comparison_summary(path, results, methods):
    method_a, method_b = methods
    comparisons, tally = compare(results, method_a, method_b)
    header = ["task_id", "state", "horizon"]
    for metric in ("train", "test"):
        header += [
            f"{metric}_mean_{method_a}",
            f"{metric}_mean_{method_b}",
            f"{metric}_p",
            f"{metric}_verdict_{method_a}",
            f"{metric}_verdict_{method_b}",
        ]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for c in comparisons:
            row = [c.task_id, c.state, c.horizon]
            for cmp_ in (c.train, c.test):
                row += [
                    _fmt(cmp_.mean_a),
                    _fmt(cmp_.mean_b),
                    _fmt(cmp_.p_value),
                    cmp_.verdict_a,
                    cmp_.verdict_b,
                ]
            writer.writerow(row)
        tally_row = ["tally", "", ""]
        for metric in ("train", "test"):
            counts_a = tally[metric][method_a]
            counts_b = tally[metric][method_b]
            tally_row += [
                "",
                "",
                "",
                f"{counts_a['+']}/{counts_a['=']}/{counts_a['-']}",
                f"{counts_b['+']}/{counts_b['=']}/{counts_b['-']}",
            ]
        writer.writerow(tally_row)


def _write_means_summary(path, results, methods):
    by_key = {}
    for r in results:
        by_key.setdefault((r.method, r.task_id), []).append(r)
    task_ids = sorted({r.task_id for r in results})
    header = ["task_id", "state", "horizon"]
    for m in methods:
        header += [f"train_mean_{m}", f"test_mean_{m}"]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for tid in task_ids:
            sample = next(r for r in results if r.task_id == tid)
            row = [tid, sample.state, sample.horizon]
            for m in methods:
                rows = by_key.get((m, tid), [])
                if rows:
                    row += [
                        _fmt(float(np.mean([r.train_rmse for r in rows]))),
                        _fmt(float(np.mean([r.test_rmse for r in rows]))),
                    ]
                else:
                    row += ["", ""]
            writer.writerow(row)
