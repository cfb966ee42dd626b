import numpy as np
import pytest

from ruledpolar.fixtures import FIXTURES, SUPPORTS, fixture, polar


@pytest.fixture(scope="session")
def specs():
    return {name: fixture(name) for name in FIXTURES}


@pytest.fixture(scope="session")
def fix_c(specs):
    return specs["FIX-C"]


@pytest.fixture(scope="session")
def cos_c(fix_c):
    return polar(fix_c, "cos(V)")


@pytest.fixture(scope="session")
def matrix(specs):
    """All fixture x support combinations."""
    return [(name, f, specs[name], polar(specs[name], f)) for name in FIXTURES for f in SUPPORTS]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
