import pytest

from ..numerics.configuration import config as run_config


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: acceptance-scale run, deselect with -m "not slow"')


@pytest.fixture(autouse=True)
def default_config():
    """Every test starts from the packaged configuration."""
    run_config.reset()
    yield run_config
    run_config.reset()
