import pytest

from isoframes.fields import field_make
from isoframes.hermitian import HyperbolicSpace


@pytest.fixture(scope="session")
def F3():
    return field_make(3)


@pytest.fixture(scope="session")
def F5():
    return field_make(5)


@pytest.fixture(scope="session")
def F9():
    return field_make(3, 2, "frobenius-sqrt")


@pytest.fixture(scope="session")
def sp_f3_n1(F3):
    return HyperbolicSpace(F3, 1, eps=-1)


@pytest.fixture(scope="session")
def sp_f3_n2(F3):
    return HyperbolicSpace(F3, 2, eps=-1)


@pytest.fixture(scope="session")
def sp_f3_n3(F3):
    return HyperbolicSpace(F3, 3, eps=-1)


@pytest.fixture(scope="session")
def sp_f5_n2(F5):
    return HyperbolicSpace(F5, 2, eps=-1)


@pytest.fixture(scope="session")
def sp_f5_n3(F5):
    return HyperbolicSpace(F5, 3, eps=-1)


@pytest.fixture(scope="session")
def un_f9_n2(F9):
    return HyperbolicSpace(F9, 2, eps=1)
