import pytest

from qbouncer import build_basis, natural_units


@pytest.fixture(scope="session")
def units():
    return natural_units()


@pytest.fixture(scope="session")
def basis12(units):
    """Small basis used by most quantum unit tests."""
    return build_basis(12, units)


@pytest.fixture(scope="session")
def basis26(units):
    """Basis large enough for accurate packet observables at x0 = 10."""
    return build_basis(26, units)
