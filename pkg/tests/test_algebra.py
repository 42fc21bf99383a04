from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from dbaops.algebra import (CACHE_SIZE, DifferenceOperator, LatticeFunction, LatticeWindow, PoleSet,
                            ScalarField, apply, coefficient_header, coefficient_rows,
                            commutator, compose, is_zero_on_window)
from dbaops.errors import (ArityMismatch, EmptyWindow, FieldMismatch, ParameterError,
                           PoleHit)

Q = ScalarField.EXACT_RATIONAL
C = ScalarField.COMPLEX_FLOAT


def polynomial_in_shift(coefficients, field=Q):
    """sum_k c_k T^k with constant coefficients"""
    return DifferenceOperator([((k,), LatticeFunction.constant(c, 1, field))
                               for k, c in coefficients.items()])


def test_window_iteration_and_size():
    window = LatticeWindow((0, -1), (1, 1))
    points = list(window)
    assert len(window) == 6 == len(points)
    assert points[0] == (0, -1) and points[-1] == (1, 1)
    assert (1, 0) in window and (2, 0) not in window


def test_window_validation_and_dilation():
    with pytest.raises(ParameterError):
        LatticeWindow((1,), (0,))
    dilated = LatticeWindow((0, 0), (2, 2)).dilated([(1, 0), (0, 3), (-1, 0)])
    assert dilated.lo == (-1, 0) and dilated.hi == (3, 5)


def test_skew_composition():
    n = LatticeFunction(lambda m: m[0], 1, Q, name='n')
    T = DifferenceOperator.shift((1,), Q)
    left = compose(T, DifferenceOperator.multiplication(n))
    # T n = (n + 1) T
    assert left.support == [(1,)]
    assert left.coefficient((1,), (4,))[0, 0] == 5


def test_noncommuting_pair_commutator_is_shift():
    n = LatticeFunction(lambda m: m[0], 1, Q, name='n')
    T = DifferenceOperator.shift((1,), Q)
    bracket = commutator(T, DifferenceOperator.multiplication(n))
    window = LatticeWindow((-3,), (3,))
    for point in window:
        assert bracket.coefficient((1,), point)[0, 0] == 1
    assert not is_zero_on_window(bracket, window, 0).is_zero


def test_constant_coefficient_operators_commute_exactly():
    A = polynomial_in_shift({1: 2, 0: 3})
    B = polynomial_in_shift({2: 1, 1: -1, -1: Fraction(1, 2)})
    check = is_zero_on_window(commutator(A, B), LatticeWindow((-4,), (4,)), 0)
    assert check.is_zero and check.exact and check.evaluated == 9


def test_apply_shifts_the_argument():
    A = polynomial_in_shift({1: 2, 0: 3})
    table = apply(A, lambda n: [n[0] ** 2], LatticeWindow((0,), (2,)))
    # 2 (n+1)^2 + 3 n^2
    assert [table[(k,)][0] for k in range(3)] == [2, 11, 30]
    second = apply(A, table, LatticeWindow((0,), (1,)))
    assert second[(0,)][0] == 2 * 11 + 3 * 2


def test_poles_are_skipped_or_raised():
    f = LatticeFunction(lambda n: Fraction(1, n[0]), 1, Q, poles=PoleSet([(0,)]), name='1/n')
    D = DifferenceOperator.multiplication(f)
    window = LatticeWindow((-1,), (1,))
    with pytest.raises(PoleHit):
        apply(D, lambda n: [1], window)
    table = apply(D, lambda n: [1], window, skip_poles=True)
    assert len(table) == 2 and table.skipped[0][0] == (0,)


def test_pullback_moves_poles():
    poles = PoleSet([(0,)], rules=[lambda n: n[0] == 5]).pullback((2,))
    assert (-2,) in poles and (3,) in poles and (0,) not in poles


def test_field_and_arity_mismatch():
    exact = polynomial_in_shift({1: 1})
    inexact = polynomial_in_shift({1: 1.0}, C)
    with pytest.raises(FieldMismatch):
        exact + inexact
    with pytest.raises(FieldMismatch):
        Q.scalar(0.5)
    matrix = DifferenceOperator.identity(1, Q, (2, 2))
    with pytest.raises(ArityMismatch):
        compose(exact, matrix)


def test_zero_test_rules():
    A = polynomial_in_shift({1: 1})
    with pytest.raises(ParameterError):
        is_zero_on_window(A, LatticeWindow((0,), (1,)), 1e-12)
    everywhere = LatticeFunction(lambda n: 1, 1, Q, poles=PoleSet(rules=[lambda n: True]))
    with pytest.raises(EmptyWindow):
        is_zero_on_window(DifferenceOperator.multiplication(everywhere), LatticeWindow((0,), (1,)), 0)


def test_missing_shift_has_zero_coefficient():
    A = polynomial_in_shift({1: 2})
    assert A.coefficient((5,), (0,))[0, 0] == 0


def test_conversion_and_normalization():
    A = polynomial_in_shift({1: Fraction(1, 4), 0: -2})
    B = A.to_complex()
    assert B.field is C
    assert B.coefficient((1,), (0,))[0, 0] == 0.25
    normalized = A.normalized(LatticeWindow((0,), (1,)))
    assert normalized.coefficient((0,), (0,))[0, 0] == -1


def test_coefficient_table_rows():
    A = polynomial_in_shift({1: Fraction(1, 3)})
    window = LatticeWindow((0,), (1,))
    assert coefficient_header(A) == ['n1', 'row', 'col', 'k1', 'numerator', 'denominator']
    assert list(coefficient_rows(A, window)) == [[0, 0, 0, 1, '1', '3'], [1, 0, 0, 1, '1', '3']]
    rows = list(coefficient_rows(A.to_complex(), window))
    assert float(rows[0][4]) == pytest.approx(1 / 3, rel=1e-15)


def test_lattice_function_cache_is_bounded():
    calls = []
    f = LatticeFunction(lambda n: calls.append(n) or n[0], 1, Q, name='n')
    for k in range(CACHE_SIZE + 50):
        f((k,))
    assert f.cache_info().currsize == CACHE_SIZE
    f((CACHE_SIZE + 49,))
    assert len(calls) == CACHE_SIZE + 50


def test_lattice_function_is_consistent_across_threads():
    f = LatticeFunction(lambda n: Fraction(n[0] * n[1], 7), 2, Q, name='f')
    points = [(a, b) for a in range(-20, 21) for b in range(-20, 21)] * 3
    with ThreadPoolExecutor(8) as pool:
        values = list(pool.map(f, points))
    assert all(v[0, 0] == Fraction(a * b, 7) for v, (a, b) in zip(values, points))
