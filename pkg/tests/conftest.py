import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synthetic import make_sensor_dataset  # noqa: E402

from secoe.correlation import GroupingPlan, correlation_matrix, form_groups  # noqa: E402
from secoe.dataset import SplitSpec, split  # noqa: E402
from secoe.engine import build_engine  # noqa: E402
from secoe.learners import ClassifierSpec  # noqa: E402
from secoe.planner import select_features  # noqa: E402

BEAN_GROUPS = GroupingPlan((
    ("H", "B", "D", "C", "A", "G"),
    ("E", "F"),
    ("N", "K", "M", "I", "L", "O"),
    ("J", "P"),
))
BEAN_MODELS = (
    ("H", "B", "D", "E", "N", "K", "M", "J"),
    ("B", "D", "C", "F", "K", "M", "I", "P"),
    ("D", "C", "A", "E", "M", "I", "L", "J"),
    ("C", "A", "G", "F", "I", "L", "O", "P"),
)

FAST_MLP = {"hidden": 32, "max_epochs": 60}

# pass/fail lines of the acceptance suite, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bean_groups():
    return BEAN_GROUPS


@pytest.fixture(scope="session")
def bean_plan():
    return select_features(BEAN_GROUPS, 4)


@pytest.fixture(scope="session")
def sensor_data():
    return make_sensor_dataset(n=2000, seed=3)


@pytest.fixture(scope="session")
def sensor_split(sensor_data):
    return split(sensor_data, SplitSpec(0.85, 0))


@pytest.fixture(scope="session")
def sensor_plan(sensor_split):
    train, _ = sensor_split
    return select_features(form_groups(correlation_matrix(train)))


@pytest.fixture(scope="session")
def sensor_engine(sensor_split, sensor_plan):
    train, _ = sensor_split
    return build_engine(train, sensor_plan, ClassifierSpec("mlp", FAST_MLP, 0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
