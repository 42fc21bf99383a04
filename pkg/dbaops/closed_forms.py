"""
Printed coefficient formulas of the Schur and Omega operators

Each coefficient is a rational function of (n1, n2) with declared
denominators; the integer zeros of a coefficient's denominators, and of the
denominators of every coefficient it reads, form its pole set.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .algebra import CACHE_SIZE, DifferenceOperator, LatticeFunction, PoleSet, ScalarField
from .errors import ParameterError, PoleHit

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Formula:
    """
    Parameters
    ----------
    expr : callable (a, b, c) -> Fraction
        a = n1, b = n2 as Fractions; c(name) reads another coefficient at the same n

    denominators : tuple of callables (a, b) -> Fraction

    needs : tuple of coefficient names read by `expr`
    """
    expr: object
    denominators: tuple = ()
    needs: tuple = ()


class FormulaTable:
    """
    Named coefficient formulas sharing a lattice point

    Parameters
    ----------
    name : string

    formulas : dict name -> Formula

    external : dict name -> callable n -> Fraction
        Coefficients supplied from elsewhere (e.g. a collocation solve)
    """
    def __init__(self, name, formulas, external=None):
        self.name = name
        self.formulas = dict(formulas)
        self.external = dict(external or {})
        self._cached = lru_cache(maxsize=CACHE_SIZE)(self._evaluate)

    def __contains__(self, key):
        return key in self.formulas or key in self.external

    def is_pole(self, key, n, _seen=None):
        if key in self.external:
            return False
        seen = _seen if _seen is not None else set()
        if key in seen:
            return False
        seen.add(key)
        formula = self.formulas[key]
        a, b = Fraction(n[0]), Fraction(n[1])
        if any(den(a, b) == 0 for den in formula.denominators):
            return True
        return any(self.is_pole(need, n, seen) for need in formula.needs)

    def value(self, key, n):
        n = (int(n[0]), int(n[1]))
        if key in self.external:
            return Fraction(self.external[key](n))
        return self._cached(key, n)

    def _evaluate(self, key, n):
        if key not in self.formulas:
            raise ParameterError(f'{self.name} has no coefficient {key!r}')
        if self.is_pole(key, n):
            raise PoleHit(f'{self.name}:{key} has a pole at n={n}')
        a, b = Fraction(n[0]), Fraction(n[1])
        return Fraction(self.formulas[key].expr(a, b, lambda other: self.value(other, n)))

    def lattice_function(self, key, sign=1):
        rule = lambda n, key=key: self.is_pole(key, n)
        return LatticeFunction(lambda n: sign * self.value(key, n), 2, ScalarField.EXACT_RATIONAL,
                               poles=PoleSet(rules=[rule]), name=f'{self.name}:{key}')

    def names(self):
        return list(self.formulas) + list(self.external)


def _constant(value):
    return LatticeFunction.constant(value, 2, ScalarField.EXACT_RATIONAL, name=str(value))


def _operator(entries, name):
    """
    entries : dict (row, col) -> list of (shift, coefficient LatticeFunction (1x1))
    """
    terms = []
    for (i, j), items in entries.items():
        for shift, scalar in items:
            terms.append((shift, _embed(scalar, i, j)))
    return DifferenceOperator(terms, name=name)


def _embed(scalar, i, j):
    """Place a scalar lattice function at entry (i, j) of a 2x2 matrix."""
    def evaluate(n):
        value = scalar(n)[0, 0]
        matrix = [[0, 0], [0, 0]]
        matrix[i][j] = value
        return matrix
    return LatticeFunction(evaluate, 2, ScalarField.EXACT_RATIONAL, (2, 2), scalar.poles,
                           name=f'{scalar.name}[{i}{j}]')


def _sign(b):
    return 1 if b.numerator % 2 == 0 else -1


###############################################################################
# Schur family, h = (1,1), x = 0, beta = (1, 1/3)
###############################################################################

def _cubic(a, b, k1, k2, k3):
    return a ** 3 + k1 * a ** 2 + k2 * a + k3


SCHUR_LAMBDA = {
    'u1': Formula(
        lambda a, b, c: (-2 * a ** 2 * (a + 1) * (a + 2) * (a * (a + 3) + 5)
                         + 6 * b * (2 * a * (a + 1) * (a + 2) - 3) - 18 * b ** 2)
        / ((a + 2) * (6 * b + a * (a * (a + 6) + 13) + 14)),
        (lambda a, b: a + 2, lambda a, b: 6 * b + a * (a * (a + 6) + 13) + 14)),
    'v20': Formula(lambda a, b, c: -c('u1') - a / (a + 2), (lambda a, b: a + 2,), ('u1',)),
    'v11': Formula(
        lambda a, b, c: ((a + 2) * (2 * a * (a + 1) - c('u1') * (a + 3)) - 6 * b)
        / (3 * (a + 2) * (a + 1)),
        (lambda a, b: a + 2, lambda a, b: a + 1), ('u1',)),
    'v1': Formula(lambda a, b, c: 2 - c('v11') - 2 / (a + 2), (lambda a, b: a + 2,), ('v11',)),
    'p1': Formula(
        lambda a, b, c: (2 * (a ** 6 + 9 * a ** 5 + 37 * a ** 4 + 48 + a ** 2 * (106 - 27 * b))
                         + 2 * (a * (88 - 21 * b) + a ** 3 * (83 - 6 * b) + 21 * b + 9 * b ** 2))
        / (3 * (a + 2) * (_cubic(a, b, 6, 13, 14) + 6 * b)),
        (lambda a, b: a + 2, lambda a, b: _cubic(a, b, 6, 13, 14) + 6 * b)),
    'q12': Formula(
        lambda a, b, c: (2 * (46 + 61 * a ** 4 + 12 * a ** 5 + a ** 6 + a * (161 - 66 * b))
                         + 2 * (a ** 3 * (163 - 6 * b) - 21 * b + 9 * b ** 2 - 4 * a ** 2 * (9 * b - 58)))
        / (9 * (a + 2) * _cubic(a, b, 6, 13, 20)),
        (lambda a, b: a + 2, lambda a, b: _cubic(a, b, 6, 13, 20))),
    'p11': Formula(
        lambda a, b, c: (2 * (5 + a * (11 + a * (a + 6)) - 3 * b) - 9 * (a + 1) * (a + 2) * c('q12'))
        / (3 * (a + 2) * (a + 3)),
        (lambda a, b: a + 2, lambda a, b: a + 3), ('q12',)),
    'p20': Formula(
        lambda a, b, c: (-2 * a ** 6 - 24 * a ** 5 - 123 * a ** 4 + 12 * a ** 3 * (b - 28)
                         + a ** 2 * (72 * b - 501) + 6 * a * (21 * b - 64) - 18 * (b ** 2 - 2 * b + 7))
        / ((a + 3) * (_cubic(a, b, 9, 28, 34) + 6 * b)),
        (lambda a, b: a + 3, lambda a, b: _cubic(a, b, 9, 28, 34) + 6 * b)),
    'q30': Formula(lambda a, b, c: 2 / (a + 3) - c('p20') - 1, (lambda a, b: a + 3,), ('p20',)),
    'q21': Formula(
        lambda a, b, c: (9 * (a * (a * (a + 3) + 3) - 3 * b - 5) * c('q12')
                         + ((a + 3) ** 3 - 3 * b) * c('q30'))
        / (3 * (5 + a * (a * (a + 6) + 12) - 3 * b)),
        (lambda a, b: 5 + a * (a * (a + 6) + 12) - 3 * b,), ('q12', 'q30')),
    'q11': Formula(lambda a, b, c: -c('q1') - c('q12'), (), ('q1', 'q12')),
    'q20': Formula(lambda a, b, c: 3 * (a + 1) * (c('q12') - c('q1')) / (a + 3) - c('q21'),
                   (lambda a, b: a + 3,), ('q12', 'q1', 'q21')),
}

# the printed q1 reads an undefined p12; this candidate reads p11 in its place
SCHUR_Q1_CANDIDATE = Formula(
    lambda a, b, c: (3 * c('p11') + 3 * c('p1') - 4 + a * (c('p11') + c('p1') - 2)) / (3 * (a + 1))
    + c('q12'),
    (lambda a, b: a + 1,), ('p11', 'p1', 'q12'))

SCHUR_MU = {
    'f11': Formula(lambda a, b, c: 18 * a / (a * (a * (a + 3) + 4) + 6 * (b + 2)),
                   (lambda a, b: a * (a * (a + 3) + 4) + 6 * (b + 2),)),
    'f02': Formula(lambda a, b, c: c('f11') * (a + 2) / (3 * a) - 1, (lambda a, b: a,), ('f11',)),
    'f2': Formula(lambda a, b, c: 1 - c('f02'), (), ('f02',)),
    'g2': Formula(lambda a, b, c: -c('f11'), (), ('f11',)),
    'r21': Formula(lambda a, b, c: 18 * (a + 1) / (_cubic(a, b, 6, 13, 20) + 6 * b),
                   (lambda a, b: _cubic(a, b, 6, 13, 20) + 6 * b,)),
    'r03': Formula(lambda a, b, c: 2 * (a + 2) / (_cubic(a, b, 3, 4, 0) + 6 * (b + 2)),
                   (lambda a, b: _cubic(a, b, 3, 4, 0) + 6 * (b + 2),)),
    'r12': Formula(
        lambda a, b, c: (9 * a * c('r03') + 9 * a ** 2 * c('r03') + 6 * c('r21') + 5 * a * c('r21')
                         + a ** 2 * c('r21')) / (3 * a ** 2 + 9 * a + 6),
        (lambda a, b: 3 * a ** 2 + 9 * a + 6,), ('r03', 'r21')),
    'r11': Formula(
        lambda a, b, c: (-a ** 3 * c('r12') - 6 * (b + 2) * c('r12')
                         + a ** 2 * (9 * c('r03') - 6 * c('r12') + c('r21'))
                         + a * (3 * c('r21') - 9 * c('r03') - 7 * c('r12')))
        / (_cubic(a, b, 3, 4, 0) + 6 * (b + 2)),
        (lambda a, b: _cubic(a, b, 3, 4, 0) + 6 * (b + 2),), ('r12', 'r03', 'r21')),
    'r02': Formula(
        lambda a, b, c: -2 * (_cubic(a, b, 3, 4, 15) + 6 * b) * c('r03')
        / (_cubic(a, b, 3, 4, 0) + 6 * (b + 2)),
        (lambda a, b: _cubic(a, b, 3, 4, 0) + 6 * (b + 2),), ('r03',)),
    'r2': Formula(lambda a, b, c: -c('r02') - c('r03'), (), ('r02', 'r03')),
    'j11': Formula(lambda a, b, c: -c('r21'), (), ('r21',)),
    'j02': Formula(lambda a, b, c: -(2 + a + 3 * a * c('r03')) / (a + 2), (lambda a, b: a + 2,), ('r03',)),
    'j2': Formula(
        lambda a, b, c: (a + 2 - c('j02') * (a + 2) - 3 * a * c('r02') - 6 * a * c('r03')) / (a + 2),
        (lambda a, b: a + 2,), ('j02', 'r02', 'r03')),
}

# the printed q12 drops 6 n2 from its cubic denominator and the printed r03 reads
# n2 + 2 for n2 + 3
SCHUR_CORRECTED_LAMBDA = {
    'q12': Formula(
        lambda a, b, c: (2 * (46 + 61 * a ** 4 + 12 * a ** 5 + a ** 6 + a * (161 - 66 * b))
                         + 2 * (a ** 3 * (163 - 6 * b) - 21 * b + 9 * b ** 2 - 4 * a ** 2 * (9 * b - 58)))
        / (9 * (a + 2) * (_cubic(a, b, 6, 13, 20) + 6 * b)),
        (lambda a, b: a + 2, lambda a, b: _cubic(a, b, 6, 13, 20) + 6 * b)),
}

SCHUR_CORRECTED_MU = {
    'r03': Formula(lambda a, b, c: 2 * (a + 2) / (_cubic(a, b, 3, 4, 0) + 6 * (b + 3)),
                   (lambda a, b: _cubic(a, b, 3, 4, 0) + 6 * (b + 3),)),
}

# (row, col) -> [(shift, coefficient name)]
SCHUR_LAMBDA_SHAPE = {
    (0, 0): [((2, 0), 'v20'), ((1, 1), 'v11'), ((1, 0), 'v1')],
    (0, 1): [((1, 0), 'u1')],
    (1, 0): [((3, 0), 'q30'), ((2, 1), 'q21'), ((1, 2), 'q12'), ((2, 0), 'q20'),
             ((1, 1), 'q11'), ((1, 0), 'q1')],
    (1, 1): [((2, 0), 'p20'), ((1, 1), 'p11'), ((1, 0), 'p1')],
}

SCHUR_MU_SHAPE = {
    (0, 0): [((1, 1), 'f11'), ((0, 2), 'f02'), ((0, 1), 'f2')],
    (0, 1): [((0, 1), 'g2')],
    (1, 0): [((2, 1), 'r21'), ((1, 2), 'r12'), ((0, 3), 'r03'), ((1, 1), 'r11'),
             ((0, 2), 'r02'), ((0, 1), 'r2')],
    (1, 1): [((1, 1), 'j11'), ((0, 2), 'j02'), ((0, 1), 'j2')],
}


def _schur_formulas(corrected):
    if not corrected:
        return SCHUR_LAMBDA, SCHUR_MU
    return {**SCHUR_LAMBDA, **SCHUR_CORRECTED_LAMBDA}, {**SCHUR_MU, **SCHUR_CORRECTED_MU}


def schur_tables(q1=None, corrected=True):
    """
    Formula tables of the Schur lambda and mu operators

    Parameters
    ----------
    q1 : callable n -> Fraction or None
        Source of the q1 coefficient; without it q1, q11 and q20 are unavailable

    corrected : bool
        Use the corrected q12 and r03; False keeps them as printed
    """
    lam, mu = _schur_formulas(corrected)
    external = {'q1': q1} if q1 is not None else {}
    suffix = '' if corrected else ':as-printed'
    return (FormulaTable('schur:lambda' + suffix, lam, external),
            FormulaTable('schur:mu' + suffix, mu))


def printed_q1_candidate(corrected=True):
    """Printed q1 with p12 read as p11"""
    formulas = dict(_schur_formulas(corrected)[0])
    formulas['q1'] = SCHUR_Q1_CANDIDATE
    return FormulaTable('schur:q1-candidate', formulas)


###############################################################################
# Omega family on the printed data g, g1, g2 (B = 1, c = (2, -1), Lambda = 1)
###############################################################################

def _s(a, b):
    """(-1)^{n2} 2^{n1}"""
    return _sign(b) * Fraction(2) ** int(a)


def _p2(k):
    return Fraction(2) ** int(k)


def _p4(k):
    return Fraction(4) ** int(k)


_D1 = lambda a, b: -1 + _p4(1 + a)
_ONE_PLUS_S = lambda a, b: 1 + _s(a, b)

OMEGA_LAMBDA1 = {
    'b1': Formula(lambda a, b, c: 3 / _D1(a, b), (_D1,)),
    'a2': Formula(lambda a, b, c: -1 + (-2 + _s(a, b) + 3 * _p2(1 + 2 * a)) * c('b1'), (), ('b1',)),
    'a': Formula(lambda a, b, c: -4 - c('a2') - c('b1'), (), ('a2', 'b1')),
    'b2': Formula(lambda a, b, c: 3 * (-1 + _sign(b) * _p2(1 + a)) / (_ONE_PLUS_S(a, b) * _D1(a, b)),
                  (_ONE_PLUS_S, _D1)),
    'b': Formula(lambda a, b, c: -4 * c('b1') - c('b2'), (), ('b1', 'b2')),
    'd1': Formula(lambda a, b, c: (-1 + _p4(a)) / _D1(a, b), (_D1,)),
    'c2': Formula(lambda a, b, c: HALF * (1 - _s(a, b)) + (-2 + _s(a, b) + 3 * _p2(1 + 2 * a)) * c('d1'),
                  (), ('d1',)),
    'c': Formula(lambda a, b, c: 1 - c('c2') - c('d1'), (), ('c2', 'd1')),
    'd2': Formula(lambda a, b, c: (-1 + _sign(b) * _p2(1 + a)) * c('d1') / _ONE_PLUS_S(a, b),
                  (_ONE_PLUS_S,), ('d1',)),
    'd': Formula(lambda a, b, c: -4 * c('d1') - c('d2'), (), ('d1', 'd2')),
}

_B2P = lambda a, b: -1 + _p4(a)

OMEGA_LAMBDA2 = {
    'b12p': Formula(lambda a, b, c: Fraction(3) / (2 * _D1(a, b)), (_D1,)),
    'b2p': Formula(lambda a, b, c: 3 / _B2P(a, b), (_B2P,)),
    'a22p': Formula(
        lambda a, b, c: HALF * (1 - 4 * (1 + _sign(b) * _p2(1 + 3 * a) - 3 * _p4(a)) * c('b12p')
                                + _s(a, b) * c('b2p') - _sign(b) * Fraction(8) ** int(a) * c('b2p')),
        (), ('b12p', 'b2p')),
    'a2p': Formula(lambda a, b, c: 2 - 2 * c('a22p') - c('b12p') - 2 * _s(a, b) * c('b12p'),
                   (), ('a22p', 'b12p')),
    'ap': Formula(lambda a, b, c: -c('a2p') - c('a22p'), (), ('a2p', 'a22p')),
    'b22p': Formula(
        lambda a, b, c: HALF * (-4 * (1 + _sign(b) * _p2(1 + a)) * c('b12p') - _ONE_PLUS_S(a, b) * c('b2p')),
        (), ('b12p', 'b2p')),
    'b1p': Formula(lambda a, b, c: -c('b12p'), (), ('b12p',)),
    'bp': Formula(lambda a, b, c: -c('b2p') - c('b22p'), (), ('b2p', 'b22p')),
    'd12p': Formula(lambda a, b, c: (-1 + _p4(a)) / (2 * _D1(a, b)), (_D1,)),
    'c22p': Formula(
        lambda a, b, c: -Fraction(1, 4) * (-1 + _s(a, b))
        * (-1 + (-8 - _sign(b) * _p2(3 + a) + _p4(2 + a)) * c('d12p')
           + _sign(b) * _p2(1 + a) * _ONE_PLUS_S(a, b)),
        (), ('d12p',)),
    'c2p': Formula(lambda a, b, c: -HALF - 2 * c('c22p') - (1 + _sign(b) * _p2(1 + a)) * c('d12p'),
                   (), ('c22p', 'd12p')),
    'cp': Formula(lambda a, b, c: -c('c2p') - c('c22p'), (), ('c2p', 'c22p')),
    'd1p': Formula(lambda a, b, c: -c('d12p'), (), ('d12p',)),
    'd22p': Formula(
        lambda a, b, c: HALF * (-4 * (1 + _sign(b) * _p2(1 + a)) * c('d12p') - _ONE_PLUS_S(a, b)),
        (), ('d12p',)),
    'dp': Formula(lambda a, b, c: -1 - c('d22p'), (), ('d22p',)),
    'm_half': Formula(lambda a, b, c: -HALF),
    'half': Formula(lambda a, b, c: HALF),
    'one': Formula(lambda a, b, c: Fraction(1)),
}

OMEGA_LAMBDA1_SHAPE = {
    (0, 0): [((1, 0), 'one'), ((0, 1), 'a2'), ((0, 0), 'a')],
    (0, 1): [((1, 0), 'b1'), ((0, 1), 'b2'), ((0, 0), 'b')],
    (1, 0): [((0, 1), 'c2'), ((0, 0), 'c')],
    (1, 1): [((1, 0), 'd1'), ((0, 1), 'd2'), ((0, 0), 'd')],
}

OMEGA_LAMBDA2_SHAPE = {
    (0, 0): [((1, 1), 'm_half'), ((0, 2), 'a22p'), ((1, 0), 'half'), ((0, 1), 'a2p'), ((0, 0), 'ap')],
    (0, 1): [((1, 1), 'b12p'), ((0, 2), 'b22p'), ((1, 0), 'b1p'), ((0, 1), 'b2p'), ((0, 0), 'bp')],
    (1, 0): [((0, 2), 'c22p'), ((0, 1), 'c2p'), ((0, 0), 'cp')],
    (1, 1): [((1, 1), 'd12p'), ((0, 2), 'd22p'), ((1, 0), 'd1p'), ((0, 1), 'one'), ((0, 0), 'dp')],
}


def omega_tables():
    lambda1 = dict(OMEGA_LAMBDA1)
    lambda1['one'] = Formula(lambda a, b, c: Fraction(1))
    return FormulaTable('omega:lambda1', lambda1), FormulaTable('omega:lambda2', OMEGA_LAMBDA2)


def operator_from_table(table, shape, name):
    """2x2 exact operator whose entry (i, j) carries the named coefficients of `shape`"""
    entries = {entry: [(shift, table.lattice_function(key)) for shift, key in items]
               for entry, items in shape.items()}
    return _operator(entries, name)


def entry_coefficients(shape):
    """Map coefficient name -> (row, col, shift)"""
    return {key: (i, j, shift) for (i, j), items in shape.items() for shift, key in items}
