import pytest

from finsite import corpus


@pytest.fixture
def one():
    return corpus.one()


@pytest.fixture
def walk2():
    return corpus.walk2()


@pytest.fixture
def sier(walk2):
    return corpus.sier(walk2)


@pytest.fixture
def two_point(walk2):
    return corpus.two_point(walk2)


@pytest.fixture
def retract():
    return corpus.retract()
