"""Shared fixtures."""

import logging

import numpy as np
import pytest

from nmsd.core.linalg import derive_seed
from nmsd.models.simulation import SimConfig
from nmsd.services.simulation_service import generate_dataset


@pytest.fixture
def rng():
    """A fixed-seed generator for ad hoc test data."""
    return np.random.default_rng(20240901)


@pytest.fixture
def small_cfg():
    """A reduced simulation design that runs in well under a second per trial."""
    return SimConfig(p=40, n1=600, n2=600, n_rep=6, n_pilot=3, workers=1)


@pytest.fixture
def null_pair(small_cfg):
    """Both datasets of the first trial of the small null design."""
    seed = derive_seed(small_cfg.master_seed, 0)
    return generate_dataset(small_cfg, 1, seed), generate_dataset(small_cfg, 2, seed)


@pytest.fixture(autouse=True)
def reset_logging():
    """Detach handlers the CLI installs so later tests do not write to closed streams."""
    yield
    logger = logging.getLogger("nmsd")
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)
