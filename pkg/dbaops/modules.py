"""
Discrete Baker-Akhiezer basis families and their eigenvalue functions

A family evaluates the basis vector Psi(n, P) = (psi_1, ..., psi_N)(n, P) for
lattice points n and spectral points P. Shifts act by n -> n + e_i; every
product formula below absorbs that action by construction.
"""
import dataclasses
import enum
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import linalg

from .algebra import ScalarField
from .errors import (DivisorProximity, ParameterError, PoleHit,
                     SamplingExhausted, UnexpectedNullspaceDimension)
from .exact import exact_nullspace, exact_rank
from .theta import (DEFAULT_FLOOR, DEFAULT_POLICY, SiegelPoint,
                    TruncationPolicy, below_floor, sigma_schur_eval,
                    theta_eval_detailed, validate_siegel)

logger = logging.getLogger(__name__)

# fixed Schur parameters: h = (1, 1), x = 0, beta = (1, 1/3)
SCHUR_BETA = (Fraction(1), Fraction(1, 3))
# psi values kept per rational family
MEMO_SIZE = 1 << 16


class FamilyTag(enum.Enum):
    GENUS1 = 'genus1'
    GENUS2 = 'genus2'
    SCHUR = 'schur'
    OMEGA = 'omega'
    GAMMA = 'gamma'


def is_rational(value):
    return isinstance(value, (int, Fraction, np.integer)) and not isinstance(value, bool)


def _field_for(values):
    if all(is_rational(v) for v in values):
        return ScalarField.EXACT_RATIONAL
    return ScalarField.COMPLEX_FLOAT


def _coerce(values, field):
    if field.exact:
        return tuple(Fraction(v) for v in values)
    return tuple(complex(v) for v in values)


###############################################################################
# Parameter records
###############################################################################

@dataclass(frozen=True, eq=False)
class AbelianDBAParams:
    """
    Data of the module over an abelian variety

    Parameters
    ----------
    sp : SiegelPoint
        Period matrix tau

    h : complex array (genus,)
        Step sizes, all nonzero

    x0 : complex array (genus,)
        Base point x

    c : complex array (genus,) or None
        Bundle parameter (zero by default)

    beta : complex array (genus,) or None
        Translation of the second basis function (genus 2)

    tp : TruncationPolicy
        Accuracy of every theta evaluation

    floor : float
        Divisor-proximity floor, relative to the largest theta term
    """
    sp: SiegelPoint
    h: np.ndarray
    x0: np.ndarray
    c: np.ndarray = None
    beta: np.ndarray = None
    tp: TruncationPolicy = DEFAULT_POLICY
    floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        g = self.sp.genus

        def vector(name, value):
            array = np.array(value, dtype=complex).reshape(-1)
            if array.size != g:
                raise ParameterError(f'{name} must have {g} components, got {array.size}')
            array.setflags(write=False)
            object.__setattr__(self, name, array)

        vector('h', self.h)
        vector('x0', self.x0)
        vector('c', np.zeros(g) if self.c is None else self.c)
        if self.beta is not None:
            vector('beta', self.beta)
        if np.any(self.h == 0):
            raise ParameterError(f'step sizes must be nonzero, got h={self.h.tolist()}')

    @property
    def genus(self):
        return self.sp.genus

    @property
    def shift(self):
        """c + x, the argument offset of every numerator theta"""
        return self.c + self.x0

    def unit(self, i):
        """h_i e_i"""
        step = np.zeros(self.genus, dtype=complex)
        step[i] = self.h[i]
        return step

    def with_h(self, h):
        return dataclasses.replace(self, h=h)

    @classmethod
    def genus1_default(cls, **kwargs):
        values = dict(sp=validate_siegel([[0.15 + 1.05j]]), h=[0.17], x0=[0.05], c=[0.0])
        values.update(kwargs)
        return cls(**values)

    @classmethod
    def genus2_default(cls, **kwargs):
        values = dict(sp=validate_siegel([[2j, 0.5], [0.5, 3j]]), h=[0.2, 0.3],
                      x0=[0.05, 0.03], c=[0.0, 0.0], beta=[0.11, 0.07 + 0.13j])
        values.update(kwargs)
        return cls(**values)


def _bilinear(coef, z1, z2, w1, w2):
    """alpha z1 w1 + beta z1 w2 + gamma z2 w1 + delta z2 w2"""
    alpha, beta, gamma, delta = coef
    return alpha * z1 * w1 + beta * z1 * w2 + gamma * z2 * w1 + delta * z2 * w2


def _test_parameters(count, dim, field, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        if field.exact:
            yield tuple(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 6)))
                        for _ in range(dim))
        else:
            yield tuple(complex(*rng.uniform(-1, 1, 2)) for _ in range(dim))


def _vanishes(value, field, scale=1.0):
    if field.exact:
        return value == 0
    return abs(value) <= 1e-12 * max(1.0, scale)


@dataclass(frozen=True)
class OmegaParams:
    """
    Data of the module over Omega = P^1 x P^1 / ([1,0],t) ~ (t,[0,1])

    Parameters
    ----------
    gcoef, g1coef, g2coef : 4-tuples
        Coefficients (alpha, beta, gamma, delta) of
        alpha z1 w1 + beta z1 w2 + gamma z2 w1 + delta z2 w2

    B : nonzero scalar
        g(1,0,t) = B g(t,0,1)

    c : pair of nonzero scalars
        g_i(1,0,t) = c_i g_i(t,0,1)

    Lambda : nonzero scalar
        Gluing constant of the module

    The field is exact when every entry is rational.
    """
    gcoef: tuple
    g1coef: tuple
    g2coef: tuple
    B: object = 1
    c: tuple = (2, -1)
    Lambda: object = 1

    def __post_init__(self):
        raw = [*self.gcoef, *self.g1coef, *self.g2coef, self.B, *self.c, self.Lambda]
        field = _field_for(raw)
        object.__setattr__(self, 'field', field)
        for name in ('gcoef', 'g1coef', 'g2coef', 'c'):
            object.__setattr__(self, name, _coerce(getattr(self, name), field))
        for name in ('B', 'Lambda'):
            object.__setattr__(self, name, _coerce([getattr(self, name)], field)[0])
        if any(len(coef) != 4 for coef in (self.gcoef, self.g1coef, self.g2coef)) \
                or len(self.c) != 2:
            raise ParameterError('Omega data needs three 4-coefficient forms and two c_i')
        if self.B == 0 or self.Lambda == 0 or 0 in self.c:
            raise ParameterError('B, c_i and Lambda must be nonzero')
        if _bilinear(self.gcoef, 0, 1, 0, 1) == 0:
            raise ParameterError('g(0,1,0,1) must be nonzero')
        constants = [(self.gcoef, self.B), (self.g1coef, self.c[0]), (self.g2coef, self.c[1])]
        for t1, t2 in _test_parameters(10, 2, field, seed=11):
            for coef, constant in constants:
                left = _bilinear(coef, 1, 0, t1, t2)
                residual = left - constant * _bilinear(coef, t1, t2, 0, 1)
                if not _vanishes(residual, field, abs(left)):
                    raise ParameterError(
                        f'form {coef} violates the gluing identity with constant {constant}')

    @classmethod
    def generic(cls):
        """
        General-position data: every form has a z2 w1 monomial

        k_n = +-2^{n1}/3 never equals 1/(c_i c_j); at such n the numerator of
        psi_2 falls onto the gluing class of g and D(lambda1), D(lambda2) do not exist.
        """
        return cls(gcoef=(1, 1, 1, 1), g1coef=(4, 2, 3, 1), g2coef=(1, -1, -2, 1),
                   B=1, c=(2, -1), Lambda=3)

    @classmethod
    def printed(cls):
        """g = z1w1+z1w2+z2w2, g1 = 4z1w1+2z1w2+z2w2, g2 = z1w1-z1w2+z2w2"""
        return cls(gcoef=(1, 1, 0, 1), g1coef=(4, 2, 0, 1), g2coef=(1, -1, 0, 1),
                   B=1, c=(2, -1), Lambda=1)


@dataclass(frozen=True)
class GammaParams:
    """
    Data of the module over Gamma = P^1 x P^{g-1} / ([a1,b1],t) ~ ([a2,b2],P t)

    Parameters
    ----------
    a1, b1, a2, b2 : scalars
        The two identified lines

    P : g x g matrix
        Nondegenerate with distinct eigenvalues

    A : nonzero scalar
        f(a1,b1,t) = A f(a2,b2,P t)

    cvec : g nonzero scalars
        f_i(a1,b1,t) = c_i f_i(a2,b2,P t)

    Lambda : nonzero scalar

    fcoef : 2 x g
        f = sum_i (fcoef[0][i] z1 + fcoef[1][i] z2) t_i

    ficoef : g x 2 x g
        f_i = sum_k (ficoef[i][0][k] z1 + ficoef[i][1][k] z2) t_k
    """
    a1: object
    b1: object
    a2: object
    b2: object
    P: tuple
    A: object
    cvec: tuple
    Lambda: object
    fcoef: tuple
    ficoef: tuple

    def __post_init__(self):
        g = len(self.P)
        raw = [self.a1, self.b1, self.a2, self.b2, self.A, self.Lambda, *self.cvec,
               *np.ravel(np.array(self.P, dtype=object)),
               *np.ravel(np.array(self.fcoef, dtype=object)),
               *np.ravel(np.array(self.ficoef, dtype=object))]
        field = _field_for(raw)
        object.__setattr__(self, 'field', field)
        for name in ('a1', 'b1', 'a2', 'b2', 'A', 'Lambda'):
            object.__setattr__(self, name, _coerce([getattr(self, name)], field)[0])
        object.__setattr__(self, 'cvec', _coerce(self.cvec, field))
        object.__setattr__(self, 'P', tuple(_coerce(row, field) for row in self.P))
        object.__setattr__(self, 'fcoef', tuple(_coerce(row, field) for row in self.fcoef))
        object.__setattr__(self, 'ficoef', tuple(tuple(_coerce(row, field) for row in fi)
                                                 for fi in self.ficoef))
        self._validate(g)

    def _validate(self, g):
        if any(len(row) != g for row in self.P) or len(self.cvec) != g:
            raise ParameterError(f'P must be {g}x{g} and cvec must have {g} entries')
        if len(self.fcoef) != 2 or any(len(row) != g for row in self.fcoef):
            raise ParameterError(f'fcoef must be 2 x {g}')
        if len(self.ficoef) != g or any(len(fi) != 2 or any(len(r) != g for r in fi)
                                        for fi in self.ficoef):
            raise ParameterError(f'ficoef must be {g} x 2 x {g}')
        if (self.a1, self.b1) == (0, 0) or (self.a2, self.b2) == (0, 0):
            raise ParameterError('(a_i, b_i) must not vanish')
        if self.a1 * self.b2 - self.a2 * self.b1 == 0:
            raise ParameterError('[a1,b1] and [a2,b2] must be distinct points of P^1')
        if self.A == 0 or self.Lambda == 0 or 0 in self.cvec:
            raise ParameterError('A, c_i and Lambda must be nonzero')

        matrix = np.array([[complex(x) for x in row] for row in self.P])
        eigenvalues, eigenvectors = np.linalg.eig(matrix)
        if np.min(np.abs(eigenvalues)) < 1e-12:
            raise ParameterError('P must be nondegenerate')
        gaps = np.abs(eigenvalues[:, None] - eigenvalues[None, :]) + np.eye(g)
        if np.min(gaps) < 1e-12:
            raise ParameterError('P must have distinct eigenvalues')
        for j in range(g):
            value = self.f(complex(self.a1), complex(self.b1), eigenvectors[:, j])
            if abs(value) < 1e-12:
                raise ParameterError(f'f(a1, b1, v_{j + 1}) vanishes')

        for t in _test_parameters(10, g, self.field, seed=13):
            pt = self.apply_P(t)
            checks = [(self.f, self.A)] + [
                (lambda z1, z2, tt, i=i: self.fi(i, z1, z2, tt), self.cvec[i]) for i in range(g)]
            for form, constant in checks:
                left = form(self.a1, self.b1, t)
                residual = left - constant * form(self.a2, self.b2, pt)
                if not _vanishes(residual, self.field, abs(left)):
                    raise ParameterError('f or f_i violates the gluing identity')

    @property
    def genus(self):
        return len(self.P)

    def apply_P(self, t):
        return tuple(sum(row[k] * t[k] for k in range(len(t))) for row in self.P)

    def f(self, z1, z2, t):
        return sum((self.fcoef[0][i] * z1 + self.fcoef[1][i] * z2) * t[i] for i in range(len(t)))

    def fi(self, i, z1, z2, t):
        coef = self.ficoef[i]
        return sum((coef[0][k] * z1 + coef[1][k] * z2) * t[k] for k in range(len(t)))

    @classmethod
    def default(cls):
        """Diagonal P = diag(2, 3) with (a1,b1) = (1,0), (a2,b2) = (0,1)"""
        return cls(a1=1, b1=0, a2=0, b2=1, P=((2, 0), (0, 3)), A=1, cvec=(2, 5), Lambda=1,
                   fcoef=((2, 3), (1, 1)),
                   ficoef=(((4, 12), (1, 2)), ((30, 15), (3, 1))))


###############################################################################
# Spectral functions
###############################################################################

class SpectralFunction:
    """
    Meromorphic function on the spectral variety

    Parameters
    ----------
    name : string

    evaluator : callable
        Maps one spectral point (or, when `batched`, an (S, dim) array) to values

    field : ScalarField

    batched : bool
        Whether the evaluator accepts a stack of points
    """
    def __init__(self, name, evaluator, field, batched=False):
        self.name = name
        self._evaluator = evaluator
        self.field = field
        self.batched = batched

    def __call__(self, P):
        try:
            if self.batched:
                return complex(self._evaluator(np.asarray([P], dtype=complex))[0])
            return self._evaluator(P)
        except ZeroDivisionError as err:
            raise PoleHit(f'{self.name} has a pole at P={P}') from err

    def values(self, points):
        if self.batched:
            return np.asarray(self._evaluator(np.asarray(points, dtype=complex)))
        return [self(P) for P in points]


def constant_one(field):
    one = Fraction(1) if field.exact else 1.0
    return SpectralFunction('one', lambda P: one, field)


###############################################################################
# Families
###############################################################################

class SpectralSample(list):
    """Sampled spectral points with the observed acceptance rate"""
    acceptance_rate = 1.0


class BasisFamily:
    """
    Vector Psi(n, P) of basis functions with a spectral-point sampler

    Main attributes
    ---------------
        tag, rank, g, field, point_dim

    Basis indices `j` are 0-based: j = 0 is psi_1.
    """
    tag = None

    def __init__(self, rank, g, field, point_dim):
        self.rank = rank
        self.g = g
        self.field = field
        self.point_dim = point_dim

    def values(self, j, n, shifts, points):
        """Array of psi_j(n + k, P) with rows indexed by `shifts`, columns by `points`."""
        raise NotImplementedError

    def draw(self, rng):
        raise NotImplementedError

    def denominator_magnitudes(self, P):
        """Magnitudes of every divisor function that appears in a denominator."""
        raise NotImplementedError

    def eval(self, j, n, P):
        return self.values(j, n, [(0,) * self.g], [P])[0, 0]

    def vector(self, n, P):
        return np.array([self.eval(j, n, P) for j in range(self.rank)],
                        dtype=object if self.field.exact else complex)

    def lattice_vector(self, P):
        """Psi(., P) as a lattice function valued in vectors."""
        return lambda n: self.vector(n, P)

    def sample(self, count, seed=42, floor=1e-3, max_attempts=None):
        """Deterministic rejection sampling away from the pole divisor."""
        if count < 1:
            raise ParameterError(f'count must be positive, got {count}')
        rng = np.random.default_rng(seed)
        attempts = max_attempts or 200 * count
        points = SpectralSample()
        tried = 0
        while len(points) < count:
            if tried >= attempts:
                raise SamplingExhausted(
                    f'{self.tag.value}: {len(points)} of {count} points after {tried} draws '
                    f'with floor {floor:.1e}')
            tried += 1
            P = self.draw(rng)
            try:
                magnitudes = self.denominator_magnitudes(P)
            except PoleHit:
                continue
            if min(magnitudes) >= floor:
                points.append(P)
        points.acceptance_rate = len(points) / tried
        logger.debug(f'{self.tag.value}: sampled {count} points, acceptance {points.acceptance_rate:.2f}')
        return points


def sample_spectral_points(family, count, seed=42, floor=1e-3):
    """Seeded spectral points with every divisor denominator at least `floor` in magnitude"""
    return family.sample(count, seed, floor)


class AbelianFamily(BasisFamily):
    """
    Theta-function basis on an abelian variety

        psi_1 = theta(z+c+x+nh)/theta(z) prod_j (theta(z-h_j e_j)/theta(z))^{n_j}
        psi_2 = theta(z+c+x+nh+beta) theta(z-beta)/theta(z)^2 prod_j (...)^{n_j}
    """
    def __init__(self, params, rank, tag):
        if rank == 2 and params.beta is None:
            raise ParameterError('the rank-2 abelian basis needs beta')
        super().__init__(rank, params.genus, ScalarField.COMPLEX_FLOAT, params.genus)
        self.params = params
        self.tag = tag

    def theta(self, z):
        p = self.params
        return theta_eval_detailed(z, p.sp, None, p.tp)

    def _checked(self, z, what):
        result = self.theta(z)
        small = below_floor(result, self.params.floor)
        if np.any(small):
            raise DivisorProximity(f'{what} is too close to zero at {int(np.sum(small))} point(s)')
        return result.value

    def values(self, j, n, shifts, points):
        p = self.params
        g = self.g
        points = np.asarray(points, dtype=complex).reshape(-1, g)
        lattice = np.asarray(n, dtype=int)[None, :] + np.asarray(shifts, dtype=int).reshape(-1, g)
        base = self._checked(points, 'theta(z)')

        offsets = p.shift + lattice * p.h
        if j == 1:
            offsets = offsets + p.beta
        arguments = points[None, :, :] + offsets[:, None, :]
        numerator = self.theta(arguments.reshape(-1, g)).value.reshape(len(lattice), len(points))
        result = numerator / base[None, :]
        if j == 1:
            result = result * (self.theta(points - p.beta).value / base)[None, :]

        for l in range(g):
            exponents = lattice[:, l]
            shifted = points - p.unit(l)
            if np.any(exponents < 0):
                ratio = self._checked(shifted, f'theta(z-h_{l + 1}e_{l + 1})') / base
            else:
                ratio = self.theta(shifted).value / base
            result = result * ratio[None, :] ** exponents[:, None]
        return result

    def draw(self, rng):
        # z = u + tau v in the centred fundamental parallelogram
        u = rng.random(self.g) - 0.5
        v = rng.random(self.g) - 0.5
        return u + self.params.sp.tau @ v

    def denominator_magnitudes(self, P):
        p = self.params
        points = [P] + [P - p.unit(l) for l in range(self.g)]
        if self.rank == 2:
            points.append(P - p.beta)
        return np.abs(self.theta(np.array(points)).value)


def make_genus1_basis(params):
    """Rank-1 family psi(n,z) = theta(z+x+nh)/theta(z) (theta(z-h)/theta(z))^n"""
    if params.genus != 1:
        raise ParameterError(f'genus-1 basis needs genus 1, got {params.genus}')
    return AbelianFamily(params, 1, FamilyTag.GENUS1)


def make_genus2_basis(params):
    """Rank-2 family psi_1, psi_2 on a genus-2 abelian surface"""
    if params.genus != 2:
        raise ParameterError(f'genus-2 basis needs genus 2, got {params.genus}')
    return AbelianFamily(params, 2, FamilyTag.GENUS2)


class _MemoFamily(BasisFamily):
    """Rational family evaluated point by point, the last MEMO_SIZE values memoized per (j, n, P)"""

    def __init__(self, rank, g, field, point_dim):
        super().__init__(rank, g, field, point_dim)
        self._cached = lru_cache(maxsize=MEMO_SIZE)(self._psi_at)

    def psi(self, j, n, P):
        raise NotImplementedError

    def cache_info(self):
        return self._cached.cache_info()

    def _psi_at(self, j, m, P):
        try:
            return self.psi(j, m, P)
        except ZeroDivisionError as err:
            raise PoleHit(f'psi_{j + 1} has a pole at n={m}, P={P}') from err

    def values(self, j, n, shifts, points):
        table = np.empty((len(shifts), len(points)), dtype=object if self.field.exact else complex)
        for a, k in enumerate(shifts):
            m = tuple(int(x) + int(y) for x, y in zip(n, k))
            for b, P in enumerate(points):
                table[a, b] = self._cached(j, m, tuple(P))
        return table

    def _rational(self, rng, low, high, max_denominator):
        if self.field.exact:
            return Fraction(int(rng.integers(low, high + 1)), int(rng.integers(1, max_denominator + 1)))
        return complex(rng.uniform(low, high) / max_denominator, rng.uniform(low, high) / max_denominator)


class SchurFamily(_MemoFamily):
    """
    Degenerate genus-2 family with sigma(z) = z1^3/3 - z2 replacing theta

    Fixed parameters h = (1, 1), x = 0, beta = (1, 1/3).
    """
    tag = FamilyTag.SCHUR

    def __init__(self, field=ScalarField.EXACT_RATIONAL):
        super().__init__(2, 2, field, 2)
        self.beta = SCHUR_BETA if field.exact else tuple(complex(b) for b in SCHUR_BETA)

    def _point(self, P):
        return tuple(self.field.scalar(x) for x in P)

    def psi(self, j, n, P):
        z1, z2 = self._point(P)
        sigma = sigma_schur_eval((z1, z2))
        if sigma == 0:
            raise PoleHit(f'sigma vanishes at P={P}')
        numerator = sigma_schur_eval((z1 + n[0], z2 + n[1]))
        if j == 0:
            value = numerator / sigma
        else:
            b1, b2 = self.beta
            value = sigma_schur_eval((z1 + n[0] + b1, z2 + n[1] + b2)) \
                * sigma_schur_eval((z1 - b1, z2 - b2)) / sigma ** 2
        return value * (sigma_schur_eval((z1 - 1, z2)) / sigma) ** n[0] \
            * (sigma_schur_eval((z1, z2 - 1)) / sigma) ** n[1]

    def draw(self, rng):
        return (self._rational(rng, -30, 30, 7), self._rational(rng, -30, 30, 7))

    def denominator_magnitudes(self, P):
        z1, z2 = self._point(P)
        b1, b2 = self.beta
        return [abs(sigma_schur_eval(z)) for z in
                ((z1, z2), (z1 - 1, z2), (z1, z2 - 1), (z1 - b1, z2 - b2))]


def make_schur_basis(field=ScalarField.EXACT_RATIONAL):
    """psi_1, psi_2 with sigma(z) = z1^3/3 - z2, h = (1,1), x = 0, beta = (1,1/3)"""
    return SchurFamily(field)


class OmegaFamily(_MemoFamily):
    """
    Rank-2 family on Omega, P = (z1, z2, w1, w2)

        psi_1 = z2 w1/g (g1/g)^{n1} (g2/g)^{n2}
        psi_2 = (z1 w1 + k_n z1 w2 + k_n^2 z2 w2)/g (g1/g)^{n1} (g2/g)^{n2}

    with k_n = prod_j (c_j/B)^{n_j} / (B Lambda).
    """
    tag = FamilyTag.OMEGA

    def __init__(self, params):
        super().__init__(2, 2, params.field, 4)
        self.params = params

    def kappa(self, n):
        p = self.params
        return (p.c[0] / p.B) ** n[0] * (p.c[1] / p.B) ** n[1] / (p.B * p.Lambda)

    def forms(self, P):
        p = self.params
        return (_bilinear(p.gcoef, *P), _bilinear(p.g1coef, *P), _bilinear(p.g2coef, *P))

    def psi(self, j, n, P):
        P = tuple(self.field.scalar(x) for x in P)
        z1, z2, w1, w2 = P
        g, g1, g2 = self.forms(P)
        if g == 0:
            raise PoleHit(f'g vanishes at P={P}')
        if j == 0:
            numerator = z2 * w1
        else:
            kappa = self.kappa(n)
            numerator = z1 * w1 + kappa * z1 * w2 + kappa ** 2 * z2 * w2
        return numerator / g * (g1 / g) ** n[0] * (g2 / g) ** n[1]

    def draw(self, rng):
        return tuple(self._rational(rng, -9, 9, 5) for _ in range(4))

    def denominator_magnitudes(self, P):
        P = tuple(self.field.scalar(x) for x in P)
        return [abs(value) for value in self.forms(P)]

    def glued_points(self, t):
        return (1, 0, t[0], t[1]), (t[0], t[1], 0, 1)

    def gluing_residual(self, j, n, t):
        """psi_j(n, [1,0], t) - Lambda psi_j(n, t, [0,1])"""
        first, second = self.glued_points(t)
        return self.psi(j, n, first) - self.params.Lambda * self.psi(j, n, second)


def make_omega_basis(params=None):
    return OmegaFamily(params or OmegaParams.generic())


def _compositions(total, parts):
    """Multi-indices alpha with |alpha| = total, lexicographically descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _expand_power(linear_forms, alpha):
    """Coefficients of prod_i (linear_forms[i] . t)^{alpha_i} as a dict exponent -> value."""
    g = len(alpha)
    polynomial = {(0,) * g: 1}
    for form, power in zip(linear_forms, alpha):
        for _ in range(power):
            product = {}
            for exponent, value in polynomial.items():
                for k in range(g):
                    if form[k] == 0:
                        continue
                    key = tuple(e + (1 if i == k else 0) for i, e in enumerate(exponent))
                    product[key] = product.get(key, 0) + value * form[k]
            polynomial = product
    return polynomial


def _float_reduced_nullspace(matrix):
    null = linalg.null_space(np.asarray(matrix, dtype=complex))
    if null.shape[1] == 0:
        return []
    # pin one coordinate per vector so the basis is reproducible
    _, _, pivots = linalg.qr(null.T, pivoting=True)
    rows = np.sort(pivots[:null.shape[1]])
    basis = null @ np.linalg.inv(null[rows, :])
    vectors = []
    for column in basis.T:
        largest = column[np.argmax(np.abs(column))]
        vectors.append(list(column / largest))
    return vectors


class GammaFamily(_MemoFamily):
    """
    Family on Gamma, P = (z1, z2, t_1, ..., t_g)

        psi(n, P) = h(n, P)/f(P)^k prod_j (f_j(P)/f(P))^{n_j}

    where h runs over a basis of the solutions of the gluing system on the
    coefficients h_{j alpha} of z1^j z2^{k-j} t^alpha.
    """
    tag = FamilyTag.GAMMA

    def __init__(self, params, k=1):
        g = params.genus
        self.params = params
        self.level = k
        self.monomials = [(j, alpha) for j in range(k + 1) for alpha in _compositions(k, g)]
        self.equations = list(_compositions(k, g))
        self.expected_dimension = len(self.monomials) - len(self.equations)
        self._bases = {}
        super().__init__(self.expected_dimension, g, params.field, g + 2)

    def gluing_matrix(self, n):
        """Linear system on h_{j alpha} expressing the gluing identity at level n"""
        p = self.params
        k = self.level
        factor = p.A ** -k
        for j, c in enumerate(p.cvec):
            factor = factor * (c / p.A) ** n[j]
        images = [_expand_power(p.P, alpha) for _, alpha in self.monomials]
        matrix = []
        for target in self.equations:
            row = []
            for (j, alpha), image in zip(self.monomials, images):
                entry = factor * p.a1 ** j * p.b1 ** (k - j) if alpha == target else 0
                entry = entry - p.Lambda * p.a2 ** j * p.b2 ** (k - j) * image.get(target, 0)
                row.append(entry)
            matrix.append(row)
        return matrix

    def basis_at(self, n):
        n = tuple(int(x) for x in n)
        basis = self._bases.get(n)
        if basis is None:
            matrix = self.gluing_matrix(n)
            if self.field.exact:
                basis = exact_nullspace(matrix)
            else:
                basis = _float_reduced_nullspace(matrix)
            if len(basis) != self.expected_dimension:
                raise UnexpectedNullspaceDimension(
                    f'gluing system at n={n} has nullspace dimension {len(basis)}, '
                    f'expected {self.expected_dimension}')
            self._bases[n] = basis
        return basis

    @property
    def nullspace_dimension(self):
        return len(self.basis_at((0,) * self.g))

    def h(self, vector, P):
        z1, z2, *t = P
        total = 0
        for coefficient, (j, alpha) in zip(vector, self.monomials):
            if coefficient == 0:
                continue
            term = coefficient * z1 ** j * z2 ** (self.level - j)
            for ti, ai in zip(t, alpha):
                term = term * ti ** ai
            total = total + term
        return total

    def psi(self, j, n, P):
        p = self.params
        P = tuple(self.field.scalar(x) for x in P)
        z1, z2, *t = P
        f = p.f(z1, z2, t)
        if f == 0:
            raise PoleHit(f'f vanishes at P={P}')
        value = self.h(self.basis_at(n)[j], P) / f ** self.level
        for i in range(self.g):
            value = value * (p.fi(i, z1, z2, t) / f) ** n[i]
        return value

    def draw(self, rng):
        return tuple(self._rational(rng, -9, 9, 5) for _ in range(self.point_dim))

    def denominator_magnitudes(self, P):
        p = self.params
        z1, z2, *t = tuple(self.field.scalar(x) for x in P)
        return [abs(p.f(z1, z2, t))] + [abs(p.fi(i, z1, z2, t)) for i in range(self.g)]

    def glued_points(self, t):
        p = self.params
        return (p.a1, p.b1, *t), (p.a2, p.b2, *p.apply_P(t))

    def gluing_residual(self, j, n, t):
        """psi_j(n, a1, b1, t) - Lambda psi_j(n, a2, b2, P t)"""
        first, second = self.glued_points(t)
        return self.psi(j, n, first) - self.params.Lambda * self.psi(j, n, second)


def make_gamma_basis(params=None, k=1):
    """Basis of the level-k gluing solutions; rank g at k = 1"""
    family = GammaFamily(params or GammaParams.default(), k)
    family.basis_at((0,) * family.g)
    return family


###############################################################################
# Eigenvalue functions
###############################################################################

def _gamma_linear_form(params):
    """First gluing-compatible linear form l(z, t) not proportional to f"""
    g = params.genus
    # unknowns: z1-coefficients gamma_1..gamma_g, then z2-coefficients delta_1..delta_g
    matrix = []
    for m in range(g):
        row = []
        for part, (own, other) in enumerate(((params.a1, params.a2), (params.b1, params.b2))):
            for i in range(g):
                entry = own if i == m else 0
                entry = entry - params.A * other * params.P[i][m]
                row.append(entry)
        matrix.append(row)
    target = list(params.fcoef[0]) + list(params.fcoef[1])
    if params.field.exact:
        candidates = exact_nullspace(matrix)
        proportional = [exact_rank([vector, target]) < 2 for vector in candidates]
    else:
        candidates = _float_reduced_nullspace(matrix)
        proportional = [np.linalg.matrix_rank(np.array([vector, target], dtype=complex),
                                              tol=1e-10) < 2 for vector in candidates]
    for vector, same in zip(candidates, proportional):
        if not same:
            return vector[:g], vector[g:]
    raise UnexpectedNullspaceDimension('no eigenvalue form independent of f')


def eigenvalue_function(family, which='lambda'):
    """
    Eigenvalue function of a family

    Parameters
    ----------
    family : BasisFamily

    which : string
        'one' for every family; 'lambda' or 'mu' for the abelian and Schur
        families; 'lambda1' or 'lambda2' for Omega; 'lambda' for Gamma
    """
    if which == 'one':
        return constant_one(family.field)
    tag = family.tag

    if tag in (FamilyTag.GENUS1, FamilyTag.GENUS2):
        p = family.params
        theta = family.theta
        if which not in ('lambda', 'mu'):
            raise ParameterError(f'unknown eigenvalue {which!r} for {tag.value}')

        if tag is FamilyTag.GENUS1 and which == 'mu':
            def evaluate(points):
                h = p.unit(0)
                base = family._checked(points, 'theta(z)')
                return theta(points - h).value * theta(points + h / 2).value ** 2 / base ** 3
        else:
            step = p.unit(0 if which == 'lambda' else 1)

            def evaluate(points):
                base = family._checked(points, 'theta(z)')
                return theta(points - step).value * theta(points + step).value / base ** 2
        return SpectralFunction(f'{tag.value}:{which}', evaluate, family.field, batched=True)

    if tag is FamilyTag.SCHUR:
        if which not in ('lambda', 'mu'):
            raise ParameterError(f'unknown eigenvalue {which!r} for schur')
        step = (1, 0) if which == 'lambda' else (0, 1)

        def evaluate(P):
            z1, z2 = family._point(P)
            sigma = sigma_schur_eval((z1, z2))
            return sigma_schur_eval((z1 - step[0], z2 - step[1])) \
                * sigma_schur_eval((z1 + step[0], z2 + step[1])) / sigma ** 2
        return SpectralFunction(f'schur:{which}', evaluate, family.field)

    if tag is FamilyTag.OMEGA:
        def evaluate(P):
            z1, z2, w1, w2 = (family.field.scalar(x) for x in P)
            g = family.forms((z1, z2, w1, w2))[0]
            if which == 'lambda1':
                return z2 * w1 / g
            return z1 * z2 * w1 * w2 / g ** 2
        if which not in ('lambda1', 'lambda2'):
            raise ParameterError(f'unknown eigenvalue {which!r} for omega')
        return SpectralFunction(f'omega:{which}', evaluate, family.field)

    if tag is FamilyTag.GAMMA:
        if which != 'lambda':
            raise ParameterError(f'unknown eigenvalue {which!r} for gamma')
        gammas, deltas = _gamma_linear_form(family.params)

        def evaluate(P):
            z1, z2, *t = (family.field.scalar(x) for x in P)
            ell = sum((gammas[i] * z1 + deltas[i] * z2) * t[i] for i in range(len(t)))
            return ell / family.params.f(z1, z2, t)
        return SpectralFunction('gamma:lambda', evaluate, family.field)

    raise ParameterError(f'unknown family {tag}')
