import numpy as np
import pytest

from qfrac.context import QContext


@pytest.fixture
def ctx05():
    return QContext(q=0.5)


@pytest.fixture
def ctx03():
    return QContext(q=0.3)


@pytest.fixture
def ctx07():
    return QContext(q=0.7)


@pytest.fixture(params=[0.3, 0.5, 0.7])
def ctx_all(request):
    return QContext(q=request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20250808)
