from fractions import Fraction

import pytest

from dbaops import closed_forms
from dbaops.algebra import LatticeWindow
from dbaops.builders import build_collocation, build_omega_collocation, build_omega_pair, omega_templates
from dbaops.errors import ParameterError, ResidualTooLarge
from dbaops.modules import OmegaParams, eigenvalue_function, make_omega_basis
from dbaops.verification import check_commutator, check_eigen, check_gluing

WINDOW = LatticeWindow((0, 0), (2, 2))


@pytest.fixture(scope='module')
def operators():
    return build_omega_collocation(window=WINDOW)


def test_printed_lambda1_coefficients():
    lambda1, _ = closed_forms.omega_tables()
    assert lambda1.value('b1', (0, 0)) == 1
    assert lambda1.value('a2', (0, 0)) == 4
    assert lambda1.value('a', (0, 0)) == -9
    assert lambda1.value('d1', (1, 0)) == Fraction(1, 5)
    assert lambda1.value('one', (5, 5)) == 1


def test_printed_operator_shapes():
    D1, D2 = build_omega_pair()
    assert D1.arity == D2.arity == (2, 2)
    assert set(D1.support) == {(0, 0), (1, 0), (0, 1)}
    assert set(D2.support) == {(0, 0), (1, 0), (0, 1), (1, 1), (0, 2)}
    entries = closed_forms.entry_coefficients(closed_forms.OMEGA_LAMBDA1_SHAPE)
    assert entries['b1'] == (0, 1, (1, 0))


def test_printed_operators_only_for_printed_data():
    with pytest.raises(ParameterError):
        build_omega_pair(OmegaParams.generic())


def test_collocation_operators_are_exact(operators, omega_family):
    points = omega_family.sample(4, seed=2)
    for D, which in zip(operators, ('lambda1', 'lambda2')):
        result = check_eigen(D, omega_family, eigenvalue_function(omega_family, which), WINDOW, points)
        assert result.passed and result.exact_zero is True, D.name


def test_collocation_operators_commute_exactly(operators):
    result = check_commutator(*operators, LatticeWindow((0, 0), (1, 1)), samples=1)
    assert result.passed and result.exact_zero is True


def test_gluing_check(omega_family):
    result = check_gluing(omega_family, count=5, seed=4, eigenvalues=('lambda1', 'lambda2'))
    assert result.passed and result.exact_zero is True
    assert result.evaluated > 0


def test_collocation_supports(operators):
    D1, D2 = operators
    assert set(D1.support) <= {(0, 0), (1, 0), (0, 1)}
    assert set(D2.support) <= {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    assert D1.meta['method'] == 'collocation'


def test_family_uses_generic_data_by_default():
    assert make_omega_basis().params == OmegaParams.generic()


def test_generic_operators_exist_on_the_whole_default_window():
    window = LatticeWindow((0, 0), (6, 6))
    D1, D2 = build_omega_collocation(window=window)
    for D in (D1, D2):
        assert D.meta['stats']['solved'] == len(window) == 49
    family = make_omega_basis()
    points = family.sample(2, seed=9)
    for D, which in ((D1, 'lambda1'), (D2, 'lambda2')):
        result = check_eigen(D, family, eigenvalue_function(family, which), window, points)
        assert result.passed and result.exact_zero is True, D.name
    result = check_commutator(D1, D2, LatticeWindow((0, 0), (4, 4)), samples=1)
    assert result.passed and result.exact_zero is True


def test_generic_kappa_avoids_the_degenerate_values():
    family = make_omega_basis()
    assert family.kappa((0, 1)) == Fraction(-1, 3)
    c1, c2 = family.params.c
    products = {c1 * c1, c1 * c2, c2 * c2, c1, c2, 1}
    for n1 in range(-2, 9):
        for n2 in range(-2, 9):
            assert all(family.kappa((n1, n2)) * p != 1 for p in products)


def test_unit_gluing_constant_has_no_operator_where_kappa_is_minus_one():
    base = OmegaParams.generic()
    params = OmegaParams(base.gcoef, base.g1coef, base.g2coef, base.B, base.c, Lambda=1)
    family = make_omega_basis(params)
    assert family.kappa((0, 1)) == -1
    with pytest.raises(ResidualTooLarge):
        build_collocation(family, eigenvalue_function(family, 'lambda1'),
                          omega_templates()['lambda1'], LatticeWindow((0, 1), (0, 1)))
