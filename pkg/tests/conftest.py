import pytest

from src.moments.solver import solve_moments
from src.spectral.operator import eigenvalues


@pytest.fixture(scope="session")
def mobius_table():
    return solve_moments(64, 192, "mobius")


@pytest.fixture(scope="session")
def taylor_table():
    return solve_moments(64, 192, "taylor")


@pytest.fixture(scope="session")
def small_table():
    return solve_moments(32, 128, "mobius")


@pytest.fixture(scope="session")
def eigenpairs():
    return eigenvalues(64, 128, 4, "mobius")


@pytest.fixture(scope="session")
def wide_table():
    return solve_moments(192, 256, "mobius")
