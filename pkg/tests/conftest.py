import numpy as np
import pytest

from sepsaddle.problems import gen_lasso, make_lasso


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


@pytest.fixture(scope="session")
def tiny_lasso():
    """4x6 lasso instance shared by theorem-flavored tests."""
    A, b, lam = gen_lasso(4, 6, 2, seed=42)
    return make_lasso(A, b, lam)


@pytest.fixture(scope="session")
def small_lasso():
    """10x20 lasso instance for equivalence tests."""
    A, b, lam = gen_lasso(10, 20, 5, seed=123)
    return make_lasso(A, b, lam)
