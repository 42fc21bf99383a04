from fractions import Fraction

import pytest

from dbaops.errors import AmbiguousSolution, ResidualTooLarge
from dbaops.exact import (bareiss_echelon, exact_nullspace, exact_rank, exact_solve,
                          reduced_row_echelon)


def test_rank_of_rational_matrices():
    assert exact_rank([[1, 2], [2, 4]]) == 1
    assert exact_rank([[Fraction(1, 2), Fraction(1, 3)], [Fraction(1, 4), Fraction(1, 5)]]) == 2
    assert exact_rank([[0, 0, 0]]) == 0


def test_echelon_pivots_skip_empty_columns():
    _, pivots = bareiss_echelon([[0, 1, 2], [0, 2, 5]])
    assert pivots == [1, 2]


def test_overdetermined_consistent_solve():
    solution = exact_solve([[1, 1], [1, -1], [2, 1]], [3, 1, 5])
    assert solution == [2, 1]


def test_solution_is_exact():
    solution = exact_solve([[3, 0], [0, 7], [3, 7]], [1, 2, 3])
    assert solution == [Fraction(1, 3), Fraction(2, 7)]


def test_inconsistent_system():
    with pytest.raises(ResidualTooLarge):
        exact_solve([[1, 1], [1, -1], [2, 1]], [3, 1, 6])


def test_ambiguous_system():
    with pytest.raises(AmbiguousSolution):
        exact_solve([[1, 1], [2, 2]], [1, 2])


def test_reduced_row_echelon():
    reduced, pivots = reduced_row_echelon([[2, 4], [1, 3]])
    assert pivots == [0, 1]
    assert reduced == [[1, 0], [0, 1]]


def test_nullspace_vectors():
    matrix = [[1, 1, 1], [1, 2, 3]]
    basis = exact_nullspace(matrix)
    assert len(basis) == 1
    vector = basis[0]
    assert max(abs(x) for x in vector) == 1
    for row in matrix:
        assert sum(a * x for a, x in zip(row, vector)) == 0


def test_nullspace_of_empty_system():
    basis = exact_nullspace([], ncols=2)
    assert basis == [[1, 0], [0, 1]]
