import pytest

from qkernel.digraph import C2, C3, C4, DOMC3, SHARED_SINK, build


@pytest.fixture
def c2():
    return C2


@pytest.fixture
def c3():
    return C3


@pytest.fixture
def c4():
    return C4


@pytest.fixture
def shared_sink():
    return SHARED_SINK


@pytest.fixture
def domc3():
    return DOMC3


@pytest.fixture
def empty():
    return build(0, [])
