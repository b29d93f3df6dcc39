import pytest

from config.settings import SimConfig, configure_logging
from tests import TEST_CONFIG


@pytest.fixture(autouse=True, scope='session')
def quiet_logging():
    configure_logging('WARNING', 'console')


@pytest.fixture
def make_config():
    def factory(name: str, **overrides) -> SimConfig:
        return SimConfig(**{**TEST_CONFIG[name], **overrides}).validate()
    return factory
