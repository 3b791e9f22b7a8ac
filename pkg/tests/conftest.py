import pytest

from qvoa.sl2 import ModelConfig, make_catalog


@pytest.fixture(scope="session")
def cat1():
    return make_catalog(1)


@pytest.fixture(scope="session")
def cat2():
    return make_catalog(2)


@pytest.fixture(scope="session")
def cfg1():
    return ModelConfig(k=1, N=12)
