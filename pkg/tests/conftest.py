import numpy as np
import pytest

from mtoct import dataio

REGIONS = ("VIC", "NSW", "SA", "QLD", "TAS")


@pytest.fixture(scope="session")
def small_fixture_csv(tmp_path_factory):
    """30 days of synthetic demand for the five canonical regions."""
    path = tmp_path_factory.mktemp("data") / "demand_small.csv"
    dataio.generate_fixture_csv(path, days=30, regions=REGIONS, seed=11)
    return path


@pytest.fixture(scope="session")
def small_state_values(small_fixture_csv):
    values = {}
    for region in REGIONS:
        series = dataio.load_csv(small_fixture_csv, region)
        stats = dataio.fit_normalization(series)
        values[region] = dataio.normalize(series, stats)
    return values


@pytest.fixture(scope="session")
def small_tasks(small_state_values):
    from mtoct.engine import make_task_set

    return make_task_set("A", small_state_values, n_f=24)


def tiny_sample_set(n_samples=8, n_f=4, horizon=1, seed=0):
    """A directly constructed SampleSet for fast engine tests."""
    rng = np.random.default_rng(seed)
    return dataio.SampleSet(
        inputs=rng.random((n_samples, n_f)),
        targets=rng.random((n_samples, horizon)),
        n_f=n_f,
        horizon=horizon,
        split_index=dataio.split_80_20(n_samples),
    )
