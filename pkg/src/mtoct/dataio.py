"""Half-hourly electricity demand ingestion.

Loads regional demand CSVs, keeps only complete days (48 half-hour
readings, exact spacing), min-max normalizes per region, and cuts each
day into one supervised sample: the first n_f readings as input, the
following `horizon` readings as targets. The split into train/test is
chronological, 80/20.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

READINGS_PER_DAY = 48
HALF_HOUR = timedelta(minutes=30)
TIMESTAMP_FORMAT = "%Y/%m/%d %H:%M:%S"

# Canonical ingestion header; extra columns are ignored, order is free.
REGION_COLUMN = "REGION"
TIMESTAMP_COLUMN = "SETTLEMENTDATE"
DEMAND_COLUMN = "TOTALDEMAND"


class DataError(ValueError):
    """Unusable input data: bad rows, empty filters, degenerate ranges."""


@dataclass(frozen=True)
class NormalizationStats:
    """Min-max range of a demand series, in MW."""

    min_value: float
    max_value: float

    def __post_init__(self):
        if not self.max_value > self.min_value:
            raise DataError(
                f"constant series: min ({self.min_value}) must be < max ({self.max_value})"
            )


@dataclass
class RawSeries:
    """Demand readings for one region, restricted to complete days.

    values holds num_days * 48 readings in chronological order;
    dropped_days counts days discarded for having a reading count other
    than 48 or irregular spacing.
    """

    region_id: str
    timestamps: np.ndarray
    values: np.ndarray
    dropped_days: int = 0

    @property
    def num_days(self) -> int:
        return self.values.size // READINGS_PER_DAY


@dataclass
class SampleSet:
    """Supervised windows for one task: inputs N x n_f, targets N x horizon.

    Values are normalized to [0, 1]; the first split_index samples are the
    training set, the rest the (strictly later) test set. Arrays are frozen
    after construction so the set can be shared across task trainers.
    """

    inputs: np.ndarray
    targets: np.ndarray
    n_f: int
    horizon: int
    split_index: int

    def __post_init__(self):
        if self.n_f + self.horizon > READINGS_PER_DAY:
            raise DataError(
                f"window ({self.n_f}) plus horizon ({self.horizon}) exceeds "
                f"{READINGS_PER_DAY} readings per day"
            )
        if self.inputs.shape != (self.num_samples, self.n_f):
            raise DataError(f"inputs shape {self.inputs.shape} inconsistent with n_f={self.n_f}")
        if self.targets.shape != (self.num_samples, self.horizon):
            raise DataError(
                f"targets shape {self.targets.shape} inconsistent with horizon={self.horizon}"
            )
        for name, arr in (("inputs", self.inputs), ("targets", self.targets)):
            if arr.min(initial=0.0) < 0.0 or arr.max(initial=0.0) > 1.0:
                raise DataError(f"{name} contain values outside [0, 1]")
        if self.split_index != split_80_20(self.num_samples):
            raise DataError(
                f"split_index {self.split_index} != 80% rule for N={self.num_samples}"
            )
        self.inputs.flags.writeable = False
        self.targets.flags.writeable = False

    @property
    def num_samples(self) -> int:
        return self.inputs.shape[0]

    def train_view(self) -> tuple[np.ndarray, np.ndarray]:
        return self.inputs[: self.split_index], self.targets[: self.split_index]

    def test_view(self) -> tuple[np.ndarray, np.ndarray]:
        return self.inputs[self.split_index :], self.targets[self.split_index :]


def split_80_20(num_samples: int) -> int:
    # round(0.8 * N) in exact integer arithmetic; 4N/5 never lands on .5,
    # so round-to-nearest is unambiguous.
    return (4 * num_samples + 2) // 5


def load_csv(path, region_id: str) -> RawSeries:
    """Read a demand CSV and return the complete days for one region.

    The file must have a header naming REGION, SETTLEMENTDATE and
    TOTALDEMAND columns (any order, extra columns ignored). Days with a
    reading count other than 48, duplicate stamps, or spacing other than
    30 minutes are dropped and counted in RawSeries.dropped_days.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such data file: {path}")
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        columns = {name.strip().upper(): i for i, name in enumerate(header)}
        try:
            region_col = columns[REGION_COLUMN]
            ts_col = columns[TIMESTAMP_COLUMN]
            demand_col = columns[DEMAND_COLUMN]
        except KeyError as missing:
            raise DataError(f"{path}: header lacks required column {missing}") from None
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if row[region_col].strip() != region_id:
                continue
            try:
                stamp = datetime.strptime(row[ts_col].strip(), TIMESTAMP_FORMAT)
                demand = float(row[demand_col])
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{line_no}: unparseable row ({exc})") from None
            rows.append((stamp, demand))
    if not rows:
        raise DataError(f"{path}: no rows for region {region_id!r}")
    rows.sort(key=lambda r: r[0])

    by_day: dict = {}
    for stamp, demand in rows:
        by_day.setdefault(stamp.date(), []).append((stamp, demand))

    stamps: list = []
    values: list = []
    dropped = 0
    for day in sorted(by_day):
        readings = by_day[day]
        if len(readings) != READINGS_PER_DAY or not _evenly_spaced(readings):
            dropped += 1
            continue
        stamps.extend(s for s, _ in readings)
        values.extend(v for _, v in readings)
    if not values:
        raise DataError(f"{path}: zero complete days for region {region_id!r}")
    return RawSeries(
        region_id=region_id,
        timestamps=np.array(stamps, dtype="datetime64[s]"),
        values=np.asarray(values, dtype=np.float64),
        dropped_days=dropped,
    )


def _evenly_spaced(readings) -> bool:
    return all(
        readings[i + 1][0] - readings[i][0] == HALF_HOUR for i in range(len(readings) - 1)
    )


def fit_normalization(series: RawSeries, mode: str = "full") -> NormalizationStats:
    """Min-max stats over the series; mode='train' restricts to the
    chronological 80% of days so a test set cannot leak into the range."""
    if series.values.size == 0:
        raise DataError("cannot fit normalization on an empty series")
    if mode == "full":
        values = series.values
    elif mode == "train":
        train_days = split_80_20(series.num_days)
        values = series.values[: train_days * READINGS_PER_DAY]
    else:
        raise ValueError(f"unknown normalization mode {mode!r} (use 'full' or 'train')")
    return NormalizationStats(float(values.min()), float(values.max()))


def normalize(series: RawSeries, stats: NormalizationStats) -> np.ndarray:
    """Map values to [0, 1]; out-of-range values (possible when the stats
    were fitted on the training part only) clamp to the boundary."""
    span = stats.max_value - stats.min_value
    return np.clip((series.values - stats.min_value) / span, 0.0, 1.0)


def denormalize(values: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    return np.asarray(values) * (stats.max_value - stats.min_value) + stats.min_value


def build_samples(normalized_values: np.ndarray, n_f: int, horizon: int) -> SampleSet:
    """One sample per day: inputs are the day's first n_f readings, targets
    the following `horizon` readings of the same day."""
    if n_f < 1 or horizon < 1:
        raise DataError(f"window ({n_f}) and horizon ({horizon}) must be >= 1")
    if n_f + horizon > READINGS_PER_DAY:
        raise DataError(
            f"window ({n_f}) plus horizon ({horizon}) exceeds {READINGS_PER_DAY}"
        )
    values = np.asarray(normalized_values, dtype=np.float64)
    if values.ndim != 1 or values.size % READINGS_PER_DAY != 0:
        raise DataError("normalized series must be a flat multiple of 48 readings")
    days = values.reshape(-1, READINGS_PER_DAY)
    if days.shape[0] < 2:
        raise DataError(f"need at least 2 complete days, got {days.shape[0]}")
    inputs = days[:, :n_f].copy()
    targets = days[:, n_f : n_f + horizon].copy()
    return SampleSet(
        inputs=inputs,
        targets=targets,
        n_f=n_f,
        horizon=horizon,
        split_index=split_80_20(days.shape[0]),
    )


# Synthetic fixture generation: a deterministic stand-in for real demand
# archives, in the exact ingestion format.

FIXTURE_PROFILES = [
    # (base MW, daily amplitude fraction)
    (5200.0, 0.22),
    (8100.0, 0.18),
    (1500.0, 0.25),
    (6300.0, 0.20),
    (1100.0, 0.15),
]


def generate_fixture_csv(
    path,
    days: int,
    regions,
    seed: int = 0,
    noise: float = 0.02,
    weekly: float = 0.05,
    phase_spread: float = 0.015,
    start: datetime = datetime(2020, 11, 1),
) -> int:
    """Write a synthetic demand CSV (daily sinusoid + weekly modulation +
    seeded noise, 48 readings/day) covering `days` days per region.

    Regions share the daily shape, so their series are strongly
    correlated; phase_spread staggers their peaks, `weekly` scales the
    day-of-week factor and `noise` the per-reading disturbance, each as a
    fraction of the regional base level. Returns the number of data rows.
    """
    if days < 2:
        raise DataError(f"need at least 2 days for a usable fixture, got {days}")
    regions = list(regions)
    if not regions:
        raise DataError("at least one region is required")
    path = Path(path)
    rows = 0
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([REGION_COLUMN, TIMESTAMP_COLUMN, DEMAND_COLUMN])
        for r_idx, region in enumerate(regions):
            base, amp = FIXTURE_PROFILES[r_idx % len(FIXTURE_PROFILES)]
            phase = 0.27 + phase_spread * r_idx
            rng = np.random.default_rng(np.random.SeedSequence((seed, r_idx)))
            for d in range(days):
                day_start = start + timedelta(days=d)
                week_factor = np.sin(2.0 * np.pi * (d % 7) / 7.0)
                frac = np.arange(READINGS_PER_DAY) / READINGS_PER_DAY
                shape = np.sin(2.0 * np.pi * (frac - phase))
                demand = base * (
                    1.0
                    + amp * shape
                    + weekly * week_factor
                    + noise * rng.standard_normal(READINGS_PER_DAY)
                )
                for k in range(READINGS_PER_DAY):
                    stamp = day_start + k * HALF_HOUR
                    writer.writerow(
                        [region, stamp.strftime(TIMESTAMP_FORMAT), f"{demand[k]:.2f}"]
                    )
                    rows += 1
    return rows
