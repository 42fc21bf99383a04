"""
Partial difference operators in g discrete variables

An operator is a finite sum  D = sum_k C_k(n) T^k  with matrix-valued lattice
functions C_k. Composition follows the skew rule  T^a f = f(. + a) T^a.
Coefficients are evaluators, never expressions.
"""
import enum
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType

import numpy as np

from .errors import (ArityMismatch, EmptyWindow, FieldMismatch, ParameterError,
                     PoleHit)

logger = logging.getLogger(__name__)

# values kept per lattice function
CACHE_SIZE = 4096


class ScalarField(enum.Enum):
    """Scalars carried by coefficient values"""
    COMPLEX_FLOAT = 'complex'
    EXACT_RATIONAL = 'rational'

    @property
    def exact(self):
        return self is ScalarField.EXACT_RATIONAL

    def zeros(self, shape):
        if self.exact:
            array = np.empty(shape, dtype=object)
            array.fill(Fraction(0))
            return array
        return np.zeros(shape, dtype=complex)

    def scalar(self, value):
        if self.exact:
            if isinstance(value, (float, complex, np.floating, np.complexfloating)):
                raise FieldMismatch(f'inexact value {value!r} in an exact-rational context')
            return Fraction(value)
        return complex(value)

    def matrix(self, value, shape):
        """Coerce `value` to a matrix of this field with the given shape."""
        if self.exact:
            array = np.empty(shape, dtype=object)
            flat = np.asarray(value, dtype=object).reshape(-1)
            if flat.size != array.size:
                raise ArityMismatch(f'value of size {flat.size} does not fit arity {shape}')
            array.reshape(-1)[:] = [self.scalar(x) for x in flat]
            return array
        array = np.asarray(value, dtype=complex)
        if array.size != shape[0] * shape[1]:
            raise ArityMismatch(f'value of size {array.size} does not fit arity {shape}')
        return array.reshape(shape)

    def magnitude(self, value):
        """Largest entry magnitude (a Fraction in the exact field)."""
        flat = np.asarray(value, dtype=object if self.exact else complex).reshape(-1)
        if flat.size == 0:
            return Fraction(0) if self.exact else 0.0
        if self.exact:
            return max(abs(x) for x in flat)
        return float(np.max(np.abs(flat)))


def _as_index(n):
    return tuple(int(k) for k in n)


def add_index(a, b):
    return tuple(x + y for x, y in zip(a, b))


@dataclass(frozen=True)
class LatticeWindow:
    """
    Box of lattice points lo <= n <= hi (componentwise, inclusive)
    """
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo, hi = _as_index(self.lo), _as_index(self.hi)
        if len(lo) != len(hi) or not lo:
            raise ParameterError(f'window bounds {lo} and {hi} differ in length')
        if any(l > h for l, h in zip(lo, hi)):
            raise ParameterError(f'window lower bound {lo} exceeds upper bound {hi}')
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @classmethod
    def cube(cls, g, lo, hi):
        return cls((lo,) * g, (hi,) * g)

    @property
    def genus(self):
        return len(self.lo)

    def __iter__(self):
        ranges = [range(l, h + 1) for l, h in zip(self.lo, self.hi)]
        return iter(itertools.product(*ranges))

    def __len__(self):
        size = 1
        for l, h in zip(self.lo, self.hi):
            size *= h - l + 1
        return size

    def __contains__(self, n):
        return all(l <= k <= h for l, k, h in zip(self.lo, n, self.hi))

    def dilated(self, shifts):
        """Smallest window containing n + k for n in self and k in `shifts`."""
        shifts = list(shifts) or [(0,) * self.genus]
        lo = tuple(l + min(0, *(k[i] for k in shifts)) for i, l in enumerate(self.lo))
        hi = tuple(h + max(0, *(k[i] for k in shifts)) for i, h in enumerate(self.hi))
        return LatticeWindow(lo, hi)


class PoleSet:
    """
    Lattice points where a coefficient is undefined

    Parameters
    ----------
    points : iterable of integer tuples
        Explicit pole points

    rules : iterable of callables
        Predicates n -> bool, e.g. the vanishing of a printed denominator
    """
    def __init__(self, points=(), rules=()):
        self.points = frozenset(_as_index(p) for p in points)
        self.rules = tuple(rules)

    def __contains__(self, n):
        n = _as_index(n)
        return n in self.points or any(rule(n) for rule in self.rules)

    def __bool__(self):
        return bool(self.points or self.rules)

    def union(self, other):
        return PoleSet(self.points | other.points, self.rules + other.rules)

    def pullback(self, a):
        """Pole set of n -> f(n + a)."""
        a = _as_index(a)
        points = {tuple(p - k for p, k in zip(point, a)) for point in self.points}
        rules = tuple(_ShiftedRule(rule, a) for rule in self.rules)
        return PoleSet(points, rules)


class _ShiftedRule:
    def __init__(self, rule, shift):
        self.rule = rule
        self.shift = shift

    def __call__(self, n):
        return self.rule(add_index(n, self.shift))


class LatticeFunction:
    """
    Matrix-valued function on Z^g with an explicit pole set

    Parameters
    ----------
    evaluator : callable
        Maps an integer tuple n to a scalar or a matrix of shape `arity`

    g : int
        Number of discrete variables

    field : ScalarField

    arity : tuple (rows, cols)

    poles : PoleSet or None

    name : string
        Used in error messages

    The last CACHE_SIZE values are memoized; evaluation at a pole raises PoleHit.
    """
    def __init__(self, evaluator, g, field, arity=(1, 1), poles=None, name='f'):
        self._evaluator = evaluator
        self.g = g
        self.field = field
        self.arity = tuple(arity)
        self.poles = poles if poles is not None else PoleSet()
        self.name = name
        self._cached = lru_cache(maxsize=CACHE_SIZE)(self._evaluate)

    def __call__(self, n):
        n = _as_index(n)
        if len(n) != self.g:
            raise ParameterError(f'{self.name} expects {self.g} lattice coordinates, got {n}')
        return self._cached(n)

    def cache_info(self):
        return self._cached.cache_info()

    def _evaluate(self, n):
        if n in self.poles:
            raise PoleHit(f'{self.name} has a pole at n={n}')
        try:
            raw = self._evaluator(n)
        except ZeroDivisionError as err:
            raise PoleHit(f'{self.name} divides by zero at n={n}') from err
        value = self.field.matrix(raw, self.arity)
        value.setflags(write=False)
        return value

    @classmethod
    def constant(cls, value, g, field, arity=(1, 1), name='const'):
        matrix = field.matrix(value, arity)
        return cls(lambda n: matrix, g, field, arity, name=name)

    def _check(self, other, shape_ok):
        if self.g != other.g:
            raise ArityMismatch(f'{self.name} has g={self.g}, {other.name} has g={other.g}')
        if self.field is not other.field:
            raise FieldMismatch(f'cannot mix {self.field.value} and {other.field.value} coefficients')
        if not shape_ok:
            raise ArityMismatch(f'incompatible arities {self.arity} and {other.arity}')

    def __add__(self, other):
        self._check(other, self.arity == other.arity)
        return LatticeFunction(lambda n: self(n) + other(n), self.g, self.field,
                               self.arity, self.poles.union(other.poles),
                               name=f'({self.name}+{other.name})')

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return LatticeFunction(lambda n: -self(n), self.g, self.field, self.arity,
                               self.poles, name=f'-{self.name}')

    def __matmul__(self, other):
        """Pointwise matrix product n -> f(n) g(n)."""
        self._check(other, self.arity[1] == other.arity[0])
        return LatticeFunction(lambda n: self(n) @ other(n), self.g, self.field,
                               (self.arity[0], other.arity[1]),
                               self.poles.union(other.poles),
                               name=f'{self.name}*{other.name}')

    def scale(self, factor):
        factor = self.field.scalar(factor)
        return LatticeFunction(lambda n: factor * self(n), self.g, self.field,
                               self.arity, self.poles, name=self.name)

    def shifted(self, a):
        """The function n -> f(n + a)."""
        a = _as_index(a)
        if not any(a):
            return self
        return LatticeFunction(lambda n: self(add_index(n, a)), self.g, self.field,
                               self.arity, self.poles.pullback(a),
                               name=f'{self.name}(n+{a})')

    def to_complex(self):
        if not self.field.exact:
            return self
        convert = np.vectorize(complex, otypes=[complex])
        return LatticeFunction(lambda n: convert(self(n)), self.g,
                               ScalarField.COMPLEX_FLOAT, self.arity, self.poles,
                               name=self.name)


class LatticeTable(dict):
    """
    Values tabulated on lattice points, usable wherever a lattice function is

    Main attributes
    ---------------
        skipped : list of (n, reason) for points that could not be evaluated
    """
    def __init__(self, values=(), skipped=()):
        super().__init__(values)
        self.skipped = list(skipped)

    def __call__(self, n):
        n = _as_index(n)
        try:
            return self[n]
        except KeyError:
            raise PoleHit(f'no tabulated value at n={n}') from None


class DifferenceOperator:
    """
    Finite sum of (coefficient, shift) terms with distinct shifts

    Parameters
    ----------
    terms : mapping or iterable of (shift, LatticeFunction)
        Terms with equal shifts are merged by addition

    g, field, arity : optional
        Required only when `terms` is empty

    name : string
        Label used in tables and messages

    meta : dict or None
        Free-form build diagnostics, exported in manifests
    """
    def __init__(self, terms, g=None, field=None, arity=None, name='D', meta=None):
        items = terms.items() if hasattr(terms, 'items') else terms
        merged = {}
        for shift, coefficient in items:
            shift = _as_index(shift)
            if g is None:
                g, field, arity = coefficient.g, coefficient.field, coefficient.arity
            if len(shift) != g or coefficient.g != g:
                raise ArityMismatch(f'shift {shift} does not match g={g}')
            if coefficient.field is not field:
                raise FieldMismatch(f'operator {name} mixes {field.value} and '
                                    f'{coefficient.field.value} coefficients')
            if coefficient.arity != tuple(arity):
                raise ArityMismatch(f'operator {name} mixes arities {arity} and {coefficient.arity}')
            merged[shift] = merged[shift] + coefficient if shift in merged else coefficient
        if g is None or field is None or arity is None:
            raise ParameterError('an operator without terms needs g, field and arity')
        self.g = g
        self.field = field
        self.arity = tuple(arity)
        self.name = name
        self.meta = dict(meta or {})
        self.terms = MappingProxyType(dict(sorted(merged.items())))

    @classmethod
    def identity(cls, g, field, arity=(1, 1), name='I'):
        eye = np.eye(arity[0], dtype=int)
        return cls({(0,) * g: LatticeFunction.constant(eye, g, field, arity, name='1')},
                   name=name)

    @classmethod
    def shift(cls, k, field, arity=(1, 1), name=None):
        k = _as_index(k)
        eye = np.eye(arity[0], dtype=int)
        return cls({k: LatticeFunction.constant(eye, len(k), field, arity, name='1')},
                   name=name or f'T^{k}')

    @classmethod
    def multiplication(cls, f, name=None):
        return cls({(0,) * f.g: f}, name=name or f.name)

    @classmethod
    def zero(cls, g, field, arity=(1, 1), name='0'):
        return cls({}, g=g, field=field, arity=arity, name=name)

    @property
    def support(self):
        return list(self.terms)

    def coefficient(self, shift, n):
        shift = _as_index(shift)
        if shift not in self.terms:
            return self.field.zeros(self.arity)
        return self.terms[shift](n)

    def __matmul__(self, other):
        return compose(self, other)

    def __add__(self, other):
        _check_pair(self, other, self.arity == other.arity)
        merged = list(self.terms.items()) + list(other.terms.items())
        return DifferenceOperator(merged, self.g, self.field, self.arity,
                                  name=f'({self.name}+{other.name})')

    def __neg__(self):
        return DifferenceOperator({k: -f for k, f in self.terms.items()}, self.g,
                                  self.field, self.arity, name=f'-{self.name}')

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor, name=None):
        return DifferenceOperator({k: f.scale(factor) for k, f in self.terms.items()},
                                  self.g, self.field, self.arity,
                                  name=name or self.name, meta=self.meta)

    def to_complex(self):
        """Explicit rational -> float conversion (the only direction allowed)."""
        return DifferenceOperator({k: f.to_complex() for k, f in self.terms.items()},
                                  self.g, ScalarField.COMPLEX_FLOAT, self.arity,
                                  name=self.name, meta=self.meta)

    def window_magnitude(self, window):
        """Largest coefficient magnitude over the non-pole window points."""
        largest = 0.0
        for n in window:
            for f in self.terms.values():
                try:
                    largest = max(largest, float(self.field.magnitude(f(n))))
                except PoleHit:
                    continue
        return largest

    def normalized(self, window):
        """Rescaled so the largest window coefficient has magnitude 1."""
        largest = self.window_magnitude(window)
        if largest == 0:
            return self
        factor = Fraction(1) / Fraction(largest) if self.field.exact else 1.0 / largest
        return self.scale(factor)

    def __repr__(self):
        return (f'DifferenceOperator({self.name}, g={self.g}, arity={self.arity}, '
                f'field={self.field.value}, support={self.support})')


def _check_pair(a, b, shape_ok):
    if a.g != b.g:
        raise ArityMismatch(f'{a.name} has g={a.g}, {b.name} has g={b.g}')
    if a.field is not b.field:
        raise FieldMismatch(f'cannot mix {a.field.value} and {b.field.value} operators')
    if not shape_ok:
        raise ArityMismatch(f'incompatible arities {a.arity} and {b.arity}')


def _vector(value, field, size):
    if field.exact:
        flat = np.asarray(value, dtype=object).reshape(-1)
        vector = np.array([field.scalar(x) for x in flat], dtype=object)
    else:
        vector = np.asarray(value, dtype=complex).reshape(-1)
    if vector.size != size:
        raise ArityMismatch(f'vector of length {vector.size}, expected {size}')
    return vector


def apply(D, psi, window, skip_poles=False):
    """
    Tabulate (D psi)(n) = sum_k C_k(n) psi(n + k) over `window`

    Parameters
    ----------
    D : DifferenceOperator

    psi : callable
        Lattice function valued in column vectors of length D.arity[1]

    window : LatticeWindow

    skip_poles : bool
        Record undefined points in `skipped` instead of raising PoleHit

    Returns
    -------
    LatticeTable of vectors of length D.arity[0]
    """
    if window.genus != D.g:
        raise ArityMismatch(f'window has {window.genus} coordinates, operator has g={D.g}')
    table = LatticeTable()
    for n in window:
        try:
            total = D.field.zeros(D.arity[0])
            for k, f in D.terms.items():
                total = total + f(n) @ _vector(psi(add_index(n, k)), D.field, D.arity[1])
            table[n] = total
        except PoleHit as err:
            if not skip_poles:
                raise
            table.skipped.append((n, str(err)))
    return table


def compose(A, B):
    """
    Skew product AB: each pair ((f, a), (g, b)) gives (n -> f(n) g(n+a), a+b)
    """
    _check_pair(A, B, A.arity[1] == B.arity[0])
    products = []
    for a, f in A.terms.items():
        for b, g in B.terms.items():
            products.append((add_index(a, b), f @ g.shifted(a)))
    return DifferenceOperator(products, A.g, A.field, (A.arity[0], B.arity[1]),
                              name=f'{A.name}{B.name}')


def commutator(A, B):
    """[A, B] = AB - BA for square operators of matching arity."""
    if A.arity != B.arity or A.arity[0] != A.arity[1]:
        raise ArityMismatch(f'commutator needs equal square arities, got {A.arity} and {B.arity}')
    result = compose(A, B) - compose(B, A)
    result.name = f'[{A.name},{B.name}]'
    return result


@dataclass
class ZeroCheck:
    """Outcome of `is_zero_on_window`"""
    is_zero: bool
    max_residual: float
    exact: bool
    evaluated: int
    skipped: list


def is_zero_on_window(D, window, tol):
    """
    True iff every coefficient at every non-pole window point has magnitude <= tol

    In the exact field `tol` must be 0 and the test is exact.
    """
    if D.field.exact and tol != 0:
        raise ParameterError('exact-rational zero tests require tol = 0')
    if len(window) == 0:
        raise EmptyWindow('window contains no lattice points')
    largest = Fraction(0) if D.field.exact else 0.0
    evaluated = 0
    skipped = []
    for n in window:
        try:
            values = [f(n) for f in D.terms.values()]
        except PoleHit as err:
            skipped.append((n, str(err)))
            continue
        evaluated += 1
        for value in values:
            largest = max(largest, D.field.magnitude(value))
    if evaluated == 0:
        raise EmptyWindow('every window point is a pole of the operator')
    return ZeroCheck(bool(largest <= tol), float(largest), D.field.exact, evaluated, skipped)


def coefficient_rows(D, window):
    """
    Rows of the CSV coefficient table: n_1..n_g, row, col, k_1..k_g, value(s)

    Float values are written with 17 significant digits; exact values as
    numerator/denominator strings. Pole points are omitted.
    """
    for n in window:
        for k, f in D.terms.items():
            try:
                value = f(n)
            except PoleHit:
                continue
            for (i, j), entry in np.ndenumerate(value):
                if D.field.exact:
                    yield [*n, i, j, *k, str(entry.numerator), str(entry.denominator)]
                else:
                    yield [*n, i, j, *k, f'{entry.real:.16e}', f'{entry.imag:.16e}']


def coefficient_header(D):
    n = [f'n{i + 1}' for i in range(D.g)]
    k = [f'k{i + 1}' for i in range(D.g)]
    values = ['numerator', 'denominator'] if D.field.exact else ['value_re', 'value_im']
    return n + ['row', 'col'] + k + values
