import os

import numpy as np
import pytest

from libelcontrol.config_utils import build_experiment

EXAMPLE_CONFIG = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'example_config')


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run the full-horizon closed-loop tests')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-horizon closed-loop runs')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='need --runslow option to run')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1337)


@pytest.fixture
def paper_experiment():
    """The bundled parameter set with a short horizon and the progress bar off."""
    return build_experiment({'t_end': 1.0, 'silent': True})


@pytest.fixture
def example_config():
    def path(name):
        return os.path.join(EXAMPLE_CONFIG, name)
    return path
