import os
from pathlib import Path

import numpy as np
import pytest

from ecgwave.data import synth_beats
from ecgwave.features import extract_dataset

DATA_DIR = Path(__file__).parent / "data"

# Lines collected by test_acceptance.py, printed once at the end of the run.
ACCEPTANCE_LINES = []


def dataset_dir():
    """Directory holding mitbih_train.csv / mitbih_test.csv, if configured."""
    d = os.environ.get("ECGWAVE_DATA_DIR")
    return Path(d) if d else None


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def synthetic():
    return synth_beats(30, seed=3)


@pytest.fixture(scope="session")
def synthetic_features(synthetic):
    return extract_dataset(synthetic)


@pytest.fixture(scope="session")
def blobs():
    """Small continuous 3-class problem with well separated means."""
    r = np.random.default_rng(7)
    centers = np.array([[0.0, 0.0, 0.0, 0.0], [3.0, 0.0, 3.0, 0.0], [0.0, 3.0, 0.0, 3.0]])
    y = np.repeat(np.arange(3), 40)
    X = centers[y] + r.normal(size=(y.size, 4))
    return X, y


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
