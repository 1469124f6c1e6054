"""Shared fixtures for the iosynth test suite"""

import numpy as np
import pytest

from iosynth.config import SynthesisSettings
from iosynth.experiments import pendulum_model, table1_model
from iosynth.model import SystemModel, save_model
from iosynth.nonlinearities import NonlinearitySpec


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-grid experiment reproductions (minutes)")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def coarse_settings():
    """Small grid for tests whose outcome does not hinge on grid density"""
    return SynthesisSettings(tau_grid=[0.01, 0.1, 1.0, 10.0], lambda_grid=[0.5, 0.9, 0.95], max_workers=2)


@pytest.fixture
def linear_model():
    """x⁺ = 0.5x + w, full-state output"""
    return SystemModel(n=2, m=2, A=0.5 * np.eye(2), C=np.eye(2), nonlinearity=NonlinearitySpec("zero"),
                       D_lo=np.zeros((2, 2)), D_hi=np.zeros((2, 2)),
                       w_lo=[-0.01, -0.01], w_hi=[0.01, 0.01], name="linear")


@pytest.fixture
def pendulum():
    return pendulum_model(0.065)


@pytest.fixture
def table1_instance():
    """Alpha-table plant at alpha = 0.2 with a small disturbance box"""
    return table1_model([[0, 1], [1, 0]], 0.2, w_bound=0.01)


@pytest.fixture
def model_file(tmp_path):
    def write(model, name="model.json"):
        path = tmp_path / name
        save_model(model, path)
        return path
    return write
