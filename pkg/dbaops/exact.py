"""
Exact linear algebra over the rationals

Rows of Fractions are scaled to integers and reduced with fraction-free
(Bareiss) elimination, so every intermediate entry is an integer minor.
"""
import math
from fractions import Fraction

from .errors import AmbiguousSolution, ParameterError, ResidualTooLarge


def _integer_rows(rows):
    """Scale each rational row by the lcm of its denominators."""
    result = []
    for row in rows:
        row = [Fraction(x) for x in row]
        scale = 1
        for x in row:
            scale = math.lcm(scale, x.denominator)
        result.append([int(x * scale) for x in row])
    return result


def bareiss_echelon(rows, ncols=None):
    """
    Fraction-free row echelon form of an integer (or rational) matrix

    Parameters
    ----------
    rows : list of lists
        Matrix entries, ints or Fractions

    ncols : int or None
        Number of leading columns eligible as pivots (defaults to all)

    Returns
    -------
    echelon : list of integer rows
    pivots : list of pivot column indices
    """
    matrix = _integer_rows(rows)
    if not matrix:
        return [], []
    width = len(matrix[0])
    ncols = width if ncols is None else ncols
    nrows = len(matrix)
    previous = 1
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if matrix[i][c] != 0), None)
        if p is None:
            continue
        matrix[r], matrix[p] = matrix[p], matrix[r]
        pivot = matrix[r][c]
        for i in range(r + 1, nrows):
            factor = matrix[i][c]
            row_i = matrix[i]
            row_r = matrix[r]
            for j in range(c + 1, width):
                row_i[j] = (pivot * row_i[j] - factor * row_r[j]) // previous
            row_i[c] = 0
        previous = pivot
        pivots.append(c)
        r += 1
    return matrix, pivots


def exact_rank(rows):
    """Rank of a rational matrix."""
    return len(bareiss_echelon(rows)[1])


def exact_solve(matrix, rhs):
    """
    Unique exact solution of an overdetermined consistent system

    Raises
    ------
    ResidualTooLarge
        The system is inconsistent (no exact solution).
    AmbiguousSolution
        The solution is not unique (column rank deficiency).
    """
    if len(matrix) != len(rhs):
        raise ParameterError(f'{len(matrix)} rows but {len(rhs)} right-hand sides')
    ncols = len(matrix[0])
    augmented = [list(row) + [b] for row, b in zip(matrix, rhs)]
    echelon, pivots = bareiss_echelon(augmented, ncols)
    rank = len(pivots)
    for row in echelon[rank:]:
        if row[ncols] != 0:
            raise ResidualTooLarge('inconsistent exact system: the template does not span the target')
    if rank < ncols:
        raise AmbiguousSolution(f'exact system has rank {rank} < {ncols} unknowns')
    solution = [Fraction(0)] * ncols
    for r in reversed(range(rank)):
        row = echelon[r]
        acc = Fraction(row[ncols])
        for j in range(r + 1, ncols):
            acc -= row[j] * solution[j]
        solution[r] = acc / row[r]
    return solution


def reduced_row_echelon(rows):
    """Reduced row echelon form over the rationals, with pivot columns."""
    echelon, pivots = bareiss_echelon(rows)
    reduced = [[Fraction(x) for x in row] for row in echelon[:len(pivots)]]
    for r, c in reversed(list(enumerate(pivots))):
        lead = reduced[r][c]
        reduced[r] = [x / lead for x in reduced[r]]
        for i in range(r):
            factor = reduced[i][c]
            if factor:
                reduced[i] = [x - factor * y for x, y in zip(reduced[i], reduced[r])]
    return reduced, pivots


def exact_nullspace(rows, ncols=None):
    """
    Basis of the right nullspace, one vector per free column

    Each vector is scaled so that its largest-magnitude entry equals 1.
    """
    if not rows:
        if ncols is None:
            raise ParameterError('empty matrix needs an explicit column count')
        width = ncols
        reduced, pivots = [], []
    else:
        width = len(rows[0])
        reduced, pivots = reduced_row_echelon(rows)
    free = [c for c in range(width) if c not in pivots]
    basis = []
    for f in free:
        vector = [Fraction(0)] * width
        vector[f] = Fraction(1)
        for r, c in enumerate(pivots):
            vector[c] = -reduced[r][f]
        largest = max(vector, key=abs)
        basis.append([x / largest for x in vector])
    return basis
