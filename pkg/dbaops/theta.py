"""
Riemann theta functions with characteristics, evaluated as truncated lattice sums

    theta_{a,b}(z, tau) = sum_n exp(pi i (n+a)^T tau (n+a) + 2 pi i (n+a)^T (z+b))

with an a-priori Gaussian tail bound deciding the truncation radius.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import (DivisorProximity, ImaginaryPartNotPositiveDefinite,
                     NotSymmetric, ParameterError, RadiusCapExceeded)

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-14
DEFAULT_TARGET_ERROR = 1e-14
DEFAULT_MAX_RADIUS = 40
DEFAULT_FLOOR = 1e-8

# number of shells summed by the tail bound; terms beyond are below 1e-300
_TAIL_SHELLS = 64


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    """
    A point of the Siegel upper half space

    Parameters
    ----------
    tau : complex array (genus x genus)
        Period matrix. Must be symmetric to within 1e-14 and have a positive
        definite imaginary part. It is stored symmetrized and read-only.

    Main attributes
    ---------------
        genus, y_min, y_max : genus and extreme eigenvalues of Im(tau)
    """
    tau: np.ndarray

    def __post_init__(self):
        tau = np.array(self.tau, dtype=complex)
        if tau.ndim != 2 or tau.shape[0] != tau.shape[1] or tau.shape[0] < 1:
            raise ParameterError(f'tau must be a square matrix, got shape {tau.shape}')
        asymmetry = np.max(np.abs(tau - tau.T))
        if asymmetry > SYMMETRY_TOL:
            raise NotSymmetric(f'tau is not symmetric (max |tau - tau^T| = {asymmetry:.3e})')
        tau = 0.5 * (tau + tau.T)
        eigenvalues = np.linalg.eigvalsh(tau.imag)
        if eigenvalues[0] <= 0:
            raise ImaginaryPartNotPositiveDefinite(
                f'Im(tau) has eigenvalue {eigenvalues[0]:.3e} <= 0')
        tau.setflags(write=False)
        object.__setattr__(self, 'tau', tau)
        object.__setattr__(self, 'y_min', float(eigenvalues[0]))
        object.__setattr__(self, 'y_max', float(eigenvalues[-1]))

    @property
    def genus(self):
        return self.tau.shape[0]

    def scaled(self, m):
        """Siegel point m*tau, used by the level-m basis sections"""
        return SiegelPoint(m * self.tau)


@dataclass(frozen=True, eq=False)
class ThetaCharacteristic:
    """
    Characteristic (a, b) of a theta function

    Parameters
    ----------
    a, b : real arrays of length genus
    """
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        b = np.array(self.b, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise ParameterError(f'characteristic parts differ in length: {a.shape} vs {b.shape}')
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ParameterError('characteristic entries must be finite')
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)

    @classmethod
    def zero(cls, genus):
        return cls(np.zeros(genus), np.zeros(genus))


@dataclass(frozen=True)
class TruncationPolicy:
    """
    Accuracy request for a theta evaluation

    Parameters
    ----------
    target_error : float
        Bound on the discarded tail, relative to the largest retained term

    max_radius : int
        Evaluation refuses when the bound needs a larger cube radius
    """
    target_error: float = DEFAULT_TARGET_ERROR
    max_radius: int = DEFAULT_MAX_RADIUS

    def __post_init__(self):
        if not self.target_error > 0:
            raise ParameterError(f'target_error must be positive, got {self.target_error}')
        if self.max_radius < 1:
            raise ParameterError(f'max_radius must be a positive integer, got {self.max_radius}')


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class ThetaValue:
    """
    Theta value(s) with the largest retained term and the tail estimate

    `value` and `max_term` may overflow to inf far from the fundamental
    domain; `log_abs_value` and `log_max_term` stay finite.
    """
    value: object
    max_term: object
    radius: int
    error_estimate: object
    log_max_term: object = None
    log_abs_value: object = None


def validate_siegel(tau):
    """Return a validated `SiegelPoint` for the matrix `tau`."""
    return SiegelPoint(np.atleast_2d(np.asarray(tau, dtype=complex)))


@lru_cache(maxsize=128)
def _lattice(genus, radius):
    # shells of growing infinity-norm, lexicographic inside a shell
    points = itertools.product(range(-radius, radius + 1), repeat=genus)
    ordered = sorted(points, key=lambda n: (max(abs(k) for k in n), n))
    lattice = np.array(ordered, dtype=float).reshape(-1, genus)
    lattice.setflags(write=False)
    return lattice


def _as_points(z, sp):
    z = np.asarray(z, dtype=complex)
    single = z.ndim <= 1
    points = z.reshape(1, -1) if single else z
    if points.ndim != 2 or points.shape[1] != sp.genus:
        raise ParameterError(f'z must have {sp.genus} components, got shape {z.shape}')
    return points, single


def _center_offsets(sp, points, ch):
    # the Gaussian peaks at n + a = -Im(tau)^{-1} Im(z)
    centers = np.linalg.solve(sp.tau.imag, points.imag.T)
    offsets = np.max(np.abs(centers), axis=0) if centers.size else np.zeros(len(points))
    if ch is not None and ch.a.size:
        offsets = offsets + float(np.max(np.abs(ch.a)))
    return offsets


def _tail_bound(sp, radius, offset):
    start = np.asarray(np.maximum(np.asarray(radius) + 1 - np.asarray(offset), 0.0))
    shells = start[..., None] + np.arange(_TAIL_SHELLS)
    counts = 2 * sp.genus * (2 * shells + 3) ** (sp.genus - 1)
    tail = np.sum(counts * np.exp(-np.pi * sp.y_min * shells ** 2), axis=-1)
    # the largest retained term may sit half a cell away from the peak
    return tail * np.exp(np.pi * sp.y_max * sp.genus / 4)


def _radii(sp, offsets, target_error, max_radius):
    radii = np.full(len(offsets), -1)
    for radius in range(max_radius + 1):
        open_rows = radii < 0
        if not np.any(open_rows):
            break
        fits = _tail_bound(sp, radius, offsets[open_rows]) < target_error
        radii[np.flatnonzero(open_rows)[fits]] = radius
    if np.any(radii < 0):
        raise RadiusCapExceeded(
            f'target error {target_error:.3e} needs a lattice radius above {max_radius}')
    return radii


def truncation_radius(sp, z, target_error, max_radius=DEFAULT_MAX_RADIUS, ch=None):
    """
    Smallest cube radius R whose Gaussian tail bound is below `target_error`

    Parameters
    ----------
    sp : SiegelPoint

    z : complex array (genus,) or (M, genus)
        For a batch the radius covers every point

    target_error : float
        Tail bound relative to the largest retained term

    max_radius : int
        Cap on the radius

    ch : ThetaCharacteristic or None
        Its `a` part shifts the summation index and the peak
    """
    points, _ = _as_points(z, sp)
    offset = np.max(_center_offsets(sp, points, ch), initial=0.0)
    return int(_radii(sp, np.array([offset]), target_error, max_radius)[0])


def reduce_points(points, sp):
    """
    Split z = z0 + k + tau m with integer vectors k, m and z0 in the centred
    fundamental domain

    Returns z0, k, m as arrays shaped like `points` (M, genus).
    """
    v = np.linalg.solve(sp.tau.imag, points.imag.T).T
    m = np.floor(v + 0.5)
    shifted = points - m @ sp.tau.T
    u = shifted.real - (v - m) @ sp.tau.real.T
    k = np.floor(u + 0.5)
    return shifted - k, k, m


def _log_multiplier(reduced, k, m, sp, ch):
    # theta_{a,b}(z0 + k + tau m) = exp(2 pi i a.k - pi i m.tau.m - 2 pi i m.(z0 + b)) theta_{a,b}(z0)
    quadratic = np.einsum('pi,ij,pj->p', m, sp.tau, m)
    return 2j * np.pi * (k @ ch.a) - 1j * np.pi * quadratic \
        - 2j * np.pi * np.sum(m * (reduced + ch.b), axis=1)


def _sum_lattice(points, sp, ch, radius):
    """log of the largest term and the normalized sum, per point"""
    shifted = _lattice(sp.genus, radius) + ch.a
    quadratic = np.einsum('ki,ij,kj->k', shifted, sp.tau, shifted)
    exponent = 1j * np.pi * quadratic[None, :] + 2j * np.pi * (points + ch.b) @ shifted.T
    peak = exponent.real.max(axis=1)
    return peak, np.exp(exponent - peak[:, None]).sum(axis=1)


def theta_eval_detailed(z, sp, ch=None, tp=None):
    """
    Evaluate theta_{a,b}(z, tau) for one point or a batch of points

    Each point is first reduced into the fundamental domain and the lattice
    sum is truncated at the radius its own offset needs; the quasi-periodic
    multiplier is carried in log space.

    Returns
    -------
    ThetaValue with scalar fields for a single point (z of shape (genus,))
    and arrays for a batch (z of shape (M, genus)). `radius` is the largest
    radius used.
    """
    tp = tp or DEFAULT_POLICY
    ch = ch or ThetaCharacteristic.zero(sp.genus)
    if ch.a.size != sp.genus:
        raise ParameterError(f'characteristic has length {ch.a.size}, genus is {sp.genus}')
    points, single = _as_points(z, sp)
    if not np.all(np.isfinite(points)):
        raise ParameterError('theta needs finite arguments')

    reduced, k, m = reduce_points(points, sp)
    log_factor = _log_multiplier(reduced, k, m, sp, ch)
    offsets = _center_offsets(sp, reduced, ch)
    radii = _radii(sp, offsets, tp.target_error, tp.max_radius)

    peak = np.empty(len(points))
    total = np.empty(len(points), dtype=complex)
    for radius in np.unique(radii):
        rows = radii == radius
        peak[rows], total[rows] = _sum_lattice(reduced[rows], sp, ch, int(radius))

    tail = _tail_bound(sp, radii, offsets)
    log_max_term = peak + log_factor.real
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        log_total = np.log(total)
        value = np.exp(log_factor + peak + log_total)
        log_abs_value = log_max_term + log_total.real
        max_term = np.exp(log_max_term)
        error = tail * max_term

    if single:
        return ThetaValue(complex(value[0]), float(max_term[0]), int(radii[0]), float(error[0]),
                          float(log_max_term[0]), float(log_abs_value[0]))
    return ThetaValue(value, max_term, int(radii.max(initial=0)), error, log_max_term,
                      log_abs_value)


def theta_eval(z, sp, ch=None, tp=None):
    """Value of theta_{a,b}(z, tau); see `theta_eval_detailed`."""
    return theta_eval_detailed(z, sp, ch, tp).value


def below_floor(result, floor):
    """Mask of |theta| < floor * (largest retained term), compared in log space"""
    return result.log_abs_value < np.log(floor) + result.log_max_term


def theta_with_floor(z, sp, tp=None, floor=DEFAULT_FLOOR):
    """
    theta(z) for use as a denominator

    Raises DivisorProximity when |theta| < floor * (largest retained term)
    at any of the points.
    """
    result = theta_eval_detailed(z, sp, None, tp)
    small = below_floor(result, floor)
    if np.any(small):
        raise DivisorProximity(
            f'|theta(z)| below {floor:.1e} x max term at {int(np.sum(small))} point(s)')
    return result.value


def basis_section(m, a, z, c, sp, tp=None, floor=DEFAULT_FLOOR):
    """
    Level-m section F_{m,a}(z, c) = theta_{a/m,0}(m z + c, m tau) / theta(z)^m

    Parameters
    ----------
    m : int
        Level, m >= 1

    a : integer array (genus,)
        Characteristic numerator, taken mod m

    z, c : complex arrays (genus,)
        Point and bundle parameter
    """
    if int(m) != m or m < 1:
        raise ParameterError(f'level m must be a positive integer, got {m}')
    a = np.mod(np.asarray(a, dtype=int).reshape(-1), m)
    z = np.asarray(z, dtype=complex)
    c = np.asarray(c, dtype=complex)
    ch = ThetaCharacteristic(a / m, np.zeros(sp.genus))
    numerator = theta_eval(m * z + c, sp.scaled(m), ch, tp)
    denominator = theta_with_floor(z, sp, tp, floor)
    return numerator / denominator ** m


def sigma_schur_eval(z):
    """Schur polynomial sigma(z1, z2) = z1^3/3 - z2, exact for rational input"""
    z1, z2 = z
    if isinstance(z1, int):
        z1 = Fraction(z1)
    return z1 ** 3 / 3 - z2


def lattice_coordinates(z, sp):
    """
    Real coordinates (u, v) with z = u + tau v

    Used to compare points modulo the period lattice.
    """
    points, _ = _as_points(z, sp)
    v = np.linalg.solve(sp.tau.imag, points.imag.T).T
    u = points.real - v @ sp.tau.real.T
    return u, v
