"""Shared fixtures."""

import pytest
import yaml

from fracdiff.config import SolverSettings
from fracdiff.grid import TimeGrid


@pytest.fixture
def settings():
    return SolverSettings()


@pytest.fixture
def small_grid():
    return TimeGrid(1.0, 32)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "settings.yaml"
    with open(path, "w") as handle:
        yaml.dump({"console_logs": False, "log_level": "WARNING", "threads": 2}, handle)
    return str(path)
