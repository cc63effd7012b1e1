import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from metisforge.digits.path import load_seed_corpus  # noqa: E402
from metisforge.harness.data import shipped_dataset  # noqa: E402
from metisforge.harness.model import TrainSpec  # noqa: E402
from metisforge.harness.mutation import build_instances  # noqa: E402

SEEDS_DIR = Path(__file__).resolve().parents[1] / "src" / "metisforge" / "data" / "seeds"


@pytest.fixture(scope="session")
def corpus():
    return load_seed_corpus(SEEDS_DIR)


@pytest.fixture(scope="session")
def digits_ds():
    return shipped_dataset("digits")


@pytest.fixture(scope="session")
def regression_ds():
    return shipped_dataset("regression")


@pytest.fixture(scope="session")
def digit_spec():
    return TrainSpec()


@pytest.fixture(scope="session")
def digit_originals(digits_ds, digit_spec):
    return build_instances(digits_ds, digit_spec, None, 3, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
