import math
from fractions import Fraction

import numpy as np
import pytest

from dbaops.algebra import DifferenceOperator, LatticeFunction, LatticeWindow, ScalarField
from dbaops.builders import build_genus1_pair
from dbaops.errors import ParameterError
from dbaops.modules import eigenvalue_function, make_genus1_basis, make_gamma_basis
from dbaops.verification import (CheckResult, DuplicatedBasis, VerificationReport,
                                 check_commutator, check_continuum_limit, check_eigen,
                                 check_freeness, check_gluing, check_vanishing, control,
                                 corrupt_coefficient, fitted_order, jsonable,
                                 noncommuting_pair)


def test_report_verdict_and_skip_budget():
    report = VerificationReport('case')
    report.add(CheckResult('a', 0.0, 1e-8, True, evaluated=9))
    assert report.passed
    report.add(CheckResult('b', 0.0, 1e-8, True, evaluated=1, skipped=[((0,), 'pole')] * 3))
    # 3 of 13 evaluations skipped
    assert report.skipped_fraction == pytest.approx(3 / 13)
    assert not report.passed
    report.note('audit', agree=3)
    document = report.as_dict(timing=False)
    assert document['notes'] == [{'title': 'audit', 'agree': 3}]
    assert all('wall_time' not in check for check in document['checks'])


def test_jsonable():
    assert jsonable(Fraction(-3, 4)) == '-3/4'
    assert jsonable(1 + 2j) == [1.0, 2.0]
    assert jsonable(np.array([1, 2])) == [1, 2]
    assert jsonable(float('nan')) is None
    assert math.isfinite(jsonable(float('inf')))
    assert jsonable({(1, 2): np.float64(0.5)}) == {'(1, 2)': 0.5}


def test_corrupted_operator_fails_eigen_check(genus1_params, genus1_family, line):
    L1, _ = build_genus1_pair(genus1_params)
    lam = eigenvalue_function(genus1_family, 'lambda')
    points = genus1_family.sample(3, seed=5)
    faulty = check_eigen(corrupt_coefficient(L1), genus1_family, lam, line, points, tol=1e-8)
    assert not faulty.passed
    assert control('corrupt_coefficient', faulty).passed


def test_noncommuting_pair_fails_commutator():
    window = LatticeWindow((0, 0), (1, 1))
    T1, n1 = noncommuting_pair(2)
    result = check_commutator(T1, n1, window, samples=1)
    assert not result.passed and result.exact_zero is False
    assert control('noncommuting_pair', result).passed


def test_exact_commutator_of_commuting_shifts():
    window = LatticeWindow((0, 0), (1, 1))
    T1 = DifferenceOperator.shift((1, 0), ScalarField.EXACT_RATIONAL)
    T2 = DifferenceOperator.shift((0, 1), ScalarField.EXACT_RATIONAL)
    result = check_commutator(T1, T2, window, samples=2)
    assert result.passed and result.exact_zero is True


def test_freeness_and_duplicated_basis():
    family = make_gamma_basis()
    assert check_freeness(family, k_max=2).passed
    duplicated = check_freeness(DuplicatedBasis(family), k_max=1)
    assert not duplicated.passed and duplicated.exact_zero is False


def test_float_freeness_detects_duplicates(genus1_family):
    result = check_freeness(DuplicatedBasis(genus1_family), k_max=1)
    assert not result.passed
    assert check_freeness(genus1_family, k_max=2).passed


def test_continuum_order(genus1_params, genus1_family):
    P = genus1_family.sample(1, seed=9)[0]

    def factory(h):
        return make_genus1_basis(genus1_params.with_h([h]))

    good = check_continuum_limit(factory, (1,), P, 0.1, halvings=4)
    assert good.passed and good.details['order'] > 0.9
    overscaled = check_continuum_limit(factory, (1,), P, 0.1, halvings=4, power=2)
    assert not overscaled.passed
    with pytest.raises(ParameterError):
        check_continuum_limit(factory, (1,), P, 0.1, halvings=1)


def test_fitted_order_of_a_first_order_sequence():
    steps = np.array([0.1, 0.05, 0.025, 0.0125])
    assert fitted_order(steps, 3.0 + 2.0 * steps) == pytest.approx(1.0)


def test_gamma_gluing_check():
    result = check_gluing(make_gamma_basis(), count=4, eigenvalues=('lambda',))
    assert result.passed and result.exact_zero is True


def test_vanishing_is_relative():
    window = LatticeWindow((0,), (1,))
    big = LatticeFunction.constant(1.0, 1, ScalarField.COMPLEX_FLOAT)
    tiny = LatticeFunction.constant(1e-12, 1, ScalarField.COMPLEX_FLOAT)
    D = DifferenceOperator([((1,), big), ((0,), tiny)])
    assert check_vanishing(D, window, [(0, 0, (0,))], tol=1e-10).passed
    assert not check_vanishing(D, window, [(0, 0, (1,))], tol=1e-10).passed
