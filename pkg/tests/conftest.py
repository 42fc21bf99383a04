import pytest

from dbaops.algebra import LatticeWindow
from dbaops.builders import CollocationConfig
from dbaops.modules import (AbelianDBAParams, make_genus1_basis, make_omega_basis,
                            make_schur_basis)


@pytest.fixture
def genus1_params():
    return AbelianDBAParams.genus1_default()


@pytest.fixture
def genus2_params():
    return AbelianDBAParams.genus2_default()


@pytest.fixture
def genus1_family(genus1_params):
    return make_genus1_basis(genus1_params)


@pytest.fixture
def schur_family():
    return make_schur_basis()


@pytest.fixture
def omega_family():
    return make_omega_basis()


@pytest.fixture
def cfg():
    return CollocationConfig()


@pytest.fixture
def line():
    return LatticeWindow((-2,), (2,))


@pytest.fixture
def square():
    return LatticeWindow((0, 0), (2, 2))
