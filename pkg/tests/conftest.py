import pytest

from toricount.logger import reset_logging
from toricount.toric import catalog_variety


@pytest.fixture(autouse=True)
def _no_global_logger():
    reset_logging()
    yield
    reset_logging()


@pytest.fixture
def P1():
    return catalog_variety("P1")


@pytest.fixture
def P2():
    return catalog_variety("P2")


@pytest.fixture
def BlP2():
    return catalog_variety("BlP2")


@pytest.fixture
def P1xP1():
    return catalog_variety("P1xP1")
