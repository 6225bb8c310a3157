"""Command-line driver: fixture generation, experiment runs, reports.

Experiments are described by a flat key=value config file; unknown keys
are rejected so a mistyped hyperparameter cannot silently fall back to a
default. `run` writes the result CSVs plus a machine-readable manifest
that echoes the fully resolved config (feeding the manifest's config
back through `run` reproduces the results byte for byte).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import platform
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, dataio, kernels, stats
from .engine import (
    METHOD_MTOCT,
    METHOD_STP,
    EngineConfig,
    run_method,
    make_task_set,
)
from .transfer import TransferConfig

MANIFEST_FILENAME = "run_manifest.json"

DEFAULT_REGIONS = ("VIC", "NSW", "SA", "QLD", "TAS")

# Defaults of every tunable; a unit test pins these against a frozen copy.
DEFAULTS = {
    "regions": ",".join(DEFAULT_REGIONS),
    "task_set": "A",
    "methods": f"{METHOD_STP},{METHOD_MTOCT}",
    "runs": 10,
    "max_iter_stp": 20000,
    "max_iter_mtoct": 10000,
    "n_f": 24,
    "n_h": 10,
    "lr": 0.001,
    "beta1": 0.9,
    "beta2": 0.999,
    "eps": 1e-8,
    "F": 0.2,
    "CR": 0.5,
    "n_s": 3,
    "alpha": 0.3,
    "q_init": 0.005,
    "eps_reward": 1e-12,
    "master_seed": 1,
    "norm_fit": "full",
    "exec_mode": "sequential",
    "workers": 1,
}


class ConfigError(ValueError):
    """A config file problem, named after the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    data: str
    out_dir: str
    regions: tuple
    task_set: str
    methods: tuple
    runs: int
    max_iter_stp: int
    max_iter_mtoct: int
    n_f: int
    n_h: int
    lr: float
    beta1: float
    beta2: float
    eps: float
    F: float
    CR: float
    n_s: int
    alpha: float
    q_init: float
    eps_reward: float
    master_seed: int
    norm_fit: str
    exec_mode: str
    workers: int

    def flat_items(self) -> dict:
        """The config as flat key=value strings, parseable back into an
        identical ExperimentConfig."""
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                out[f.name] = ",".join(str(v) for v in value)
            elif isinstance(value, float):
                out[f.name] = repr(value)
            else:
                out[f.name] = str(value)
        return out


def _parse_int(key, raw, minimum=None):
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value}")
    return value


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    raw = dict(DEFAULTS)
    raw["data"] = None
    raw["out_dir"] = None
    seen = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in raw:
            raise ConfigError(f"{source}:{line_no}: unknown config key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{line_no}: duplicate config key {key!r}")
        seen.add(key)
        raw[key] = value

    for required in ("data", "out_dir"):
        if raw[required] in (None, ""):
            raise ConfigError(f"{required}: required key is missing")

    regions = tuple(r.strip() for r in str(raw["regions"]).split(",") if r.strip())
    if len(regions) != len(set(regions)):
        raise ConfigError("regions: duplicate region names")
    if len(regions) != 5:
        raise ConfigError(f"regions: task grids need exactly 5 regions, got {len(regions)}")
    methods = tuple(m.strip() for m in str(raw["methods"]).split(",") if m.strip())
    for m in methods:
        if m not in (METHOD_STP, METHOD_MTOCT):
            raise ConfigError(f"methods: unknown method {m!r}")
    if not methods:
        raise ConfigError("methods: at least one method is required")
    task_set = str(raw["task_set"]).strip().upper()
    if task_set not in ("A", "B"):
        raise ConfigError(f"task_set: must be A or B, got {raw['task_set']!r}")
    norm_fit = str(raw["norm_fit"]).strip()
    if norm_fit not in ("full", "train"):
        raise ConfigError(f"norm_fit: must be 'full' or 'train', got {norm_fit!r}")
    exec_mode = str(raw["exec_mode"]).strip()
    if exec_mode not in ("sequential", "snapshot"):
        raise ConfigError(f"exec_mode: must be 'sequential' or 'snapshot', got {exec_mode!r}")

    n_f = _parse_int("n_f", raw["n_f"], minimum=1)
    max_horizon = 1 if task_set == "A" else 24
    if n_f + max_horizon > dataio.READINGS_PER_DAY:
        raise ConfigError(
            f"n_f: window {n_f} plus the largest horizon {max_horizon} exceeds "
            f"{dataio.READINGS_PER_DAY} readings per day"
        )
    n_s = _parse_int("n_s", raw["n_s"], minimum=None)
    if n_s < 3:
        raise ConfigError(f"n_s: needs three or more donor tasks, got {n_s}")
    if n_s > len(regions) * (1 if task_set == "A" else 4) - 1:
        raise ConfigError(f"n_s: {n_s} exceeds the available source-task count")

    for probability in ("F", "CR", "alpha"):
        value = _parse_float(probability, raw[probability])
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"{probability}: must lie in [0, 1], got {value}")
    lr = _parse_float("lr", raw["lr"])
    if lr <= 0:
        raise ConfigError(f"lr: must be positive, got {lr}")
    q_init = _parse_float("q_init", raw["q_init"])
    if q_init <= 0:
        raise ConfigError(f"q_init: must be positive, got {q_init}")

    return ExperimentConfig(
        data=str(raw["data"]),
        out_dir=str(raw["out_dir"]),
        regions=regions,
        task_set=task_set,
        methods=methods,
        runs=_parse_int("runs", raw["runs"], minimum=1),
        max_iter_stp=_parse_int("max_iter_stp", raw["max_iter_stp"], minimum=1),
        max_iter_mtoct=_parse_int("max_iter_mtoct", raw["max_iter_mtoct"], minimum=1),
        n_f=n_f,
        n_h=_parse_int("n_h", raw["n_h"], minimum=1),
        lr=lr,
        beta1=_parse_float("beta1", raw["beta1"]),
        beta2=_parse_float("beta2", raw["beta2"]),
        eps=_parse_float("eps", raw["eps"]),
        F=_parse_float("F", raw["F"]),
        CR=_parse_float("CR", raw["CR"]),
        n_s=n_s,
        alpha=_parse_float("alpha", raw["alpha"]),
        q_init=q_init,
        eps_reward=_parse_float("eps_reward", raw["eps_reward"]),
        master_seed=_parse_int("master_seed", raw["master_seed"]),
        norm_fit=norm_fit,
        exec_mode=exec_mode,
        workers=_parse_int("workers", raw["workers"], minimum=1),
    )


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), source=str(path))


def _load_state_values(config: ExperimentConfig) -> dict:
    """Normalized day-aligned series per region, in config order."""
    data_path = Path(config.data)
    values = {}
    for region in config.regions:
        source = data_path / f"{region}.csv" if data_path.is_dir() else data_path
        series = dataio.load_csv(source, region)
        stats_ = dataio.fit_normalization(series, mode=config.norm_fit)
        values[region] = dataio.normalize(series, stats_)
    return values


def _engine_config(config: ExperimentConfig, method: str) -> EngineConfig:
    return EngineConfig(
        method=method,
        max_iter=config.max_iter_stp if method == METHOD_STP else config.max_iter_mtoct,
        runs=config.runs,
        n_h=config.n_h,
        transfer=TransferConfig(
            n_s=config.n_s,
            F=config.F,
            CR=config.CR,
            q_init=config.q_init,
            alpha=config.alpha,
            eps_reward=config.eps_reward,
        ),
        lr=config.lr,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.eps,
        master_seed=config.master_seed,
        mode=config.exec_mode,
        workers=config.workers,
    )


def cmd_run(config_path) -> int:
    config = parse_config(config_path)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    state_values = _load_state_values(config)
    tasks = make_task_set(config.task_set, state_values, config.n_f)
    results = []
    for method in config.methods:
        print(f"running {method}: {len(tasks)} tasks x {config.runs} runs")
        results.extend(run_method(tasks, _engine_config(config, method)))
    paths = stats.export_results(results, out_dir)
    manifest = {
        "config": config.flat_items(),
        "master_seed": config.master_seed,
        "versions": {
            "mtoct": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "kernel_backend": kernels.BACKEND,
        },
    }
    manifest_path = out_dir / MANIFEST_FILENAME
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {paths['raw']}")
    print(f"wrote {paths['summary']}")
    print(f"wrote {paths['long']}")
    print(f"wrote {manifest_path}")
    return 0


def cmd_fixture(out, days: int, seed: int, regions, noise: float, weekly: float, phase_spread: float) -> int:
    rows = dataio.generate_fixture_csv(
        out,
        days=days,
        regions=regions,
        seed=seed,
        noise=noise,
        weekly=weekly,
        phase_spread=phase_spread,
    )
    print(f"wrote {out}: {rows} rows, {len(list(regions))} regions x {days} days")
    return 0


def _read_raw_results(path) -> list:
    from .engine import RunResult

    path = Path(path)
    if not path.exists():
        raise ValueError(f"no raw results at {path}")
    results = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(stats.RAW_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            results.append(
                RunResult(
                    method=row["method"],
                    task_id=int(row["task_id"]),
                    state=row["state"],
                    horizon=int(row["horizon"]),
                    run=int(row["run"]),
                    seed=int(row["seed"]),
                    train_rmse=float(row["train_rmse"]),
                    test_rmse=float(row["test_rmse"]),
                    loss_evaluation_count=0,
                    transfer_successes={},
                )
            )
    if not results:
        raise ValueError(f"{path}: no data rows")
    return results


def cmd_report(results_dir) -> int:
    """Print the per-task mean-RMSE table with significance markers."""
    results = _read_raw_results(Path(results_dir) / stats.RAW_FILENAME)
    methods = sorted({r.method for r in results}, key=stats.method_order)
    if len(methods) != 2:
        raise ValueError(f"report needs exactly two methods, found {methods}")
    method_a, method_b = methods
    comparisons, tally = compare_for_report(results, method_a, method_b)

    def cell(mean, verdict):
        return f"{mean:.5f}{'*' if verdict == 'better' else ' '}"

    col_a, col_b = (m[:12] for m in (method_a, method_b))
    print(f"{'task':>4} {'state':>6} {'T':>3} | {'train ' + col_a:>16} {'train ' + col_b:>16} "
          f"| {'test ' + col_a:>15} {'test ' + col_b:>15}")
    for c in comparisons:
        print(
            f"{c.task_id:>4} {c.state:>6} {c.horizon:>3} "
            f"| {cell(c.train.mean_a, c.train.verdict_a):>16} "
            f"{cell(c.train.mean_b, c.train.verdict_b):>16} "
            f"| {cell(c.test.mean_a, c.test.verdict_a):>15} "
            f"{cell(c.test.mean_b, c.test.verdict_b):>15}"
        )
    t_train_a = tally["train"][method_a]
    t_train_b = tally["train"][method_b]
    t_test_a = tally["test"][method_a]
    t_test_b = tally["test"][method_b]
    print(
        f"{'+/=/-':>15} | {_tally_str(t_train_a):>16} {_tally_str(t_train_b):>16} "
        f"| {_tally_str(t_test_a):>15} {_tally_str(t_test_b):>15}"
    )
    print("* = significantly better (exact Wilcoxon signed-rank, 0.05 level)")
    return 0


def compare_for_report(results, method_a, method_b):
    return stats.compare(results, method_a, method_b)


def _tally_str(counts) -> str:
    return f"{counts['+']}/{counts['=']}/{counts['-']}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtoct",
        description="Co-trained LSTM demand forecasting experiments (MTO-CT vs STP).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True, help="path to a key=value config file")

    p_fix = sub.add_parser("fixture", help="generate a synthetic demand CSV")
    p_fix.add_argument("--out", required=True, help="output CSV path")
    p_fix.add_argument("--days", required=True, type=int, help="days per region (>= 2)")
    p_fix.add_argument("--seed", type=int, default=0, help="noise seed")
    p_fix.add_argument(
        "--regions", default=",".join(DEFAULT_REGIONS), help="comma-separated region names"
    )
    p_fix.add_argument("--noise", type=float, default=0.02, help="noise fraction of base demand")
    p_fix.add_argument("--weekly", type=float, default=0.05, help="weekly modulation amplitude")
    p_fix.add_argument(
        "--phase-spread", type=float, default=0.015, help="per-region stagger of the daily peak"
    )

    p_rep = sub.add_parser("report", help="print the comparison table for a results dir")
    p_rep.add_argument("--dir", required=True, help="directory holding raw_results.csv")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "fixture":
            regions = [r.strip() for r in args.regions.split(",") if r.strip()]
            return cmd_fixture(
                args.out, args.days, args.seed, regions, args.noise, args.weekly, args.phase_spread
            )
        if args.command == "report":
            return cmd_report(args.dir)
        raise ValueError(f"unhandled command {args.command!r}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
