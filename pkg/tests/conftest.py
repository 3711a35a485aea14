import numpy as np
import pytest
from hypothesis import settings

from bottchain.chains import build_chain, make_clifford_system

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def cliff1():
    return make_clifford_system(1)


@pytest.fixture(scope="session")
def chains1(cliff1):
    return {kind: build_chain(kind, 1, cliff1) for kind in ("SO", "U", "Sp")}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
