"""
Construction of the difference operators D(lambda)

Three routes: the genus-1 closed forms, the genus-2 special-point solves and
a collocation solve that needs nothing but a basis family and lambda. The
collocation route also serves as the oracle for the other two and for the
printed Schur and Omega coefficients.
"""
import itertools
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import closed_forms
from .algebra import DifferenceOperator, LatticeFunction, LatticeWindow, ScalarField
from .divisors import (NewtonConfig, find_divisor_intersection, reduce_to_domain,
                       sample_divisor_curve)
from .errors import (AmbiguousSolution, ParameterError, PoleHit, ResidualTooLarge,
                     SingularSolve)
from .exact import exact_solve
from .modules import (FamilyTag, OmegaParams, eigenvalue_function, make_omega_basis,
                      make_schur_basis)
from .theta import theta_eval, theta_with_floor

logger = logging.getLogger(__name__)

# condition number above which a 2x2 special-point system counts as singular
SINGULAR_CONDITION = 1e12


@dataclass(frozen=True)
class SupportTemplate:
    """
    Candidate shifts of one matrix entry

    Parameters
    ----------
    shifts : tuple of integer tuples
        Nonempty and distinct
    """
    shifts: tuple

    def __post_init__(self):
        shifts = tuple(tuple(int(x) for x in k) for k in self.shifts)
        if not shifts:
            raise ParameterError('a support template needs at least one shift')
        if len(set(shifts)) != len(shifts):
            raise ParameterError(f'support template has repeated shifts: {shifts}')
        if len({len(k) for k in shifts}) != 1:
            raise ParameterError('template shifts differ in length')
        object.__setattr__(self, 'shifts', tuple(sorted(shifts)))

    @classmethod
    def ball(cls, g, degree):
        """All m >= 0 with m_1 + ... + m_g <= degree"""
        return cls(tuple(m for m in itertools.product(range(degree + 1), repeat=g)
                         if sum(m) <= degree))

    def __len__(self):
        return len(self.shifts)


@dataclass(frozen=True)
class CollocationConfig:
    """
    Parameters
    ----------
    samples_per_unknown : int
        Float solves use this many spectral points per unknown

    rank_tol : float
        Smallest accepted singular value ratio

    residual_tol : float
        Largest accepted relative least-squares residual

    seed : int

    floor : float
        Rejection floor on every divisor denominator while sampling

    exact_check_samples : int
        Exact solves use #unknowns plus this many points

    prune : float
        Float coefficients below prune x (largest at that n) become zero

    jobs : int
        Threads for eager solving over a window
    """
    samples_per_unknown: int = 3
    rank_tol: float = 1e-9
    residual_tol: float = 1e-7
    seed: int = 42
    floor: float = 1e-3
    exact_check_samples: int = 6
    prune: float = 1e-10
    jobs: int = 1

    def __post_init__(self):
        if self.samples_per_unknown < 2:
            raise ParameterError(f'samples_per_unknown must be >= 2, got {self.samples_per_unknown}')
        if not (self.rank_tol > 0 and self.residual_tol > 0 and self.floor > 0 and self.prune >= 0):
            raise ParameterError('collocation tolerances must be positive')
        if self.exact_check_samples < 1 or self.jobs < 1:
            raise ParameterError('exact_check_samples and jobs must be positive')


@dataclass
class SpecialPoints:
    """Named points on the spectral variety with their divisor residuals"""
    points: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    def add(self, name, values, residual):
        self.points[name] = [complex(x) for x in np.ravel(values)] if np.ndim(values) <= 1 \
            else [[complex(x) for x in point] for point in values]
        self.residuals[name] = float(residual)

    def as_dict(self):
        return {'points': self.points, 'residuals': self.residuals}


###############################################################################
# Shared least-squares machinery
###############################################################################

def least_squares(matrix, rhs, cfg, context):
    """
    Equilibrated least squares with rank and residual acceptance

    Returns
    -------
    solution : complex array
    residual : float, relative to |rhs| after row scaling
    """
    matrix = np.asarray(matrix, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    rows, unknowns = matrix.shape
    if rows < unknowns:
        raise AmbiguousSolution(f'{context}: {rows} equations for {unknowns} unknowns')
    row_scale = np.maximum(np.max(np.abs(matrix), axis=1), np.abs(rhs))
    row_scale[row_scale == 0] = 1.0
    matrix = matrix / row_scale[:, None]
    rhs = rhs / row_scale
    column_scale = np.max(np.abs(matrix), axis=0)
    if np.any(column_scale == 0):
        raise AmbiguousSolution(f'{context}: an unknown does not enter any equation')
    matrix = matrix / column_scale[None, :]

    singular = linalg.svdvals(matrix)
    if singular[-1] <= cfg.rank_tol * singular[0]:
        raise AmbiguousSolution(f'{context}: singular value ratio {singular[-1] / singular[0]:.2e} '
                                f'below {cfg.rank_tol:.1e}')
    solution, *_ = linalg.lstsq(matrix, rhs)
    residual = float(np.linalg.norm(matrix @ solution - rhs) / max(np.linalg.norm(rhs), 1e-300))
    if residual > cfg.residual_tol:
        raise ResidualTooLarge(f'{context}: relative residual {residual:.2e} above {cfg.residual_tol:.1e}')
    return solution / column_scale, residual


def _prune(values, threshold):
    largest = max((abs(v) for v in values.values()), default=0.0)
    return {key: (0j if abs(v) < threshold * largest else v) for key, v in values.items()}


def _assemble(solve, keys, g, field, rank, name, meta):
    """
    Operator whose coefficient at shift k reads solve(n)[(i, j, k)]
    """
    shifts = sorted({k for _, _, k in keys})

    def coefficient(k):
        def evaluate(n):
            solution = solve(n)
            matrix = field.zeros((rank, rank))
            for (i, j, kk), value in solution.items():
                if kk == k:
                    matrix[i, j] = value
            return matrix
        return LatticeFunction(evaluate, g, field, (rank, rank), name=f'{name}@{k}')

    return DifferenceOperator([(k, coefficient(k)) for k in shifts], g, field, (rank, rank),
                              name=name, meta=meta)


###############################################################################
# Collocation
###############################################################################

class _Collocation:
    """Per-n solver for sum_j sum_k C_k^{ij}(n) psi_j(n+k, P) = lambda(P) psi_i(n, P)"""

    def __init__(self, family, lam, templates, cfg):
        self.family = family
        self.lam = lam
        self.cfg = cfg
        rank = family.rank
        self.rows = [[(j, k) for j in range(rank) for k in templates[(i, j)].shifts]
                     for i in range(rank)]
        unknowns = max(len(row) for row in self.rows)
        if family.field.exact:
            count = unknowns + cfg.exact_check_samples
        else:
            count = cfg.samples_per_unknown * unknowns
        self.points = family.sample(count, cfg.seed, cfg.floor)
        self.lam_values = list(lam.values(self.points))
        self.stats = {'samples': count, 'seed': cfg.seed,
                      'acceptance_rate': self.points.acceptance_rate,
                      'max_residual': 0.0, 'solved': 0, 'dropped_samples': 0}
        self._cache = {}
        self._lock = threading.Lock()

    def _block(self, j, n, shifts, points):
        return np.asarray(self.family.values(j, n, shifts, points))

    def _system(self, i, n):
        row = self.rows[i]
        zero = (0,) * self.family.g
        by_column = {}
        for j, k in row:
            by_column.setdefault(j, []).append(k)

        def build(points, lam_values):
            blocks = [self._block(j, n, shifts, points) for j, shifts in by_column.items()]
            target = self._block(i, n, [zero], points)[0]
            matrix = np.concatenate(blocks, axis=0).T
            rhs = np.array([lam * psi for lam, psi in zip(lam_values, target)],
                           dtype=object if self.family.field.exact else complex)
            return matrix, rhs

        unknowns = [(j, k) for j, shifts in by_column.items() for k in shifts]
        try:
            matrix, rhs = build(self.points, self.lam_values)
        except PoleHit:
            # keep the sample points where every needed value exists
            rows, targets = [], []
            for P, lam in zip(self.points, self.lam_values):
                try:
                    m, r = build([P], [lam])
                except PoleHit as err:
                    logger.debug(f'collocation n={n}: dropped sample ({err})')
                    continue
                rows.append(m[0])
                targets.append(r[0])
            with self._lock:
                self.stats['dropped_samples'] += len(self.points) - len(rows)
            if not rows:
                raise AmbiguousSolution(f'collocation n={n}, row {i}: every sample hits a pole')
            matrix = np.array(rows, dtype=matrix_dtype(self.family.field))
            rhs = np.array(targets, dtype=matrix_dtype(self.family.field))
        return unknowns, matrix, rhs

    def _solve_row(self, i, n):
        unknowns, matrix, rhs = self._system(i, n)
        context = f'{self.lam.name} n={n} row {i + 1}'
        if self.family.field.exact:
            try:
                solution = exact_solve(matrix.tolist(), list(rhs))
            except (ResidualTooLarge, AmbiguousSolution) as err:
                raise type(err)(f'{context}: {err}') from err
            residual = 0.0
        else:
            solution, residual = least_squares(matrix, rhs, self.cfg, context)
        return {(i, j, k): value for (j, k), value in zip(unknowns, solution)}, residual

    def solve(self, n):
        n = tuple(int(x) for x in n)
        cached = self._cache.get(n)
        if cached is not None:
            return cached
        solution = {}
        worst = 0.0
        for i in range(self.family.rank):
            part, residual = self._solve_row(i, n)
            solution.update(part)
            worst = max(worst, residual)
        if not self.family.field.exact:
            solution = _prune(solution, self.cfg.prune)
        with self._lock:
            self._cache[n] = solution
            self.stats['solved'] += 1
            self.stats['max_residual'] = max(self.stats['max_residual'], worst)
        return solution


def matrix_dtype(field):
    return object if field.exact else complex


def _as_templates(templates, rank):
    if isinstance(templates, SupportTemplate):
        return {(i, j): templates for i in range(rank) for j in range(rank)}
    missing = [(i, j) for i in range(rank) for j in range(rank) if (i, j) not in templates]
    if missing:
        raise ParameterError(f'no support template for entries {missing}')
    return dict(templates)


def build_collocation(family, lam, templates, window=None, cfg=None, name=None):
    """
    Operator D with D Psi = lambda Psi, solved independently at each lattice point

    Parameters
    ----------
    family : BasisFamily

    lam : SpectralFunction

    templates : SupportTemplate or dict (row, col) -> SupportTemplate

    window : LatticeWindow or None
        Solve eagerly on this window; other points are solved on first use

    cfg : CollocationConfig

    Raises
    ------
    ResidualTooLarge
        The template does not reach lambda Psi
    AmbiguousSolution
        The solution is not unique over the template
    """
    cfg = cfg or CollocationConfig()
    templates = _as_templates(templates, family.rank)
    solver = _Collocation(family, lam, templates, cfg)
    keys = [(i, j, k) for i, row in enumerate(solver.rows) for j, k in row]
    name = name or f'D({lam.name})'
    meta = {'method': 'collocation', 'stats': solver.stats,
            'templates': {f'{i}{j}': [list(k) for k in t.shifts] for (i, j), t in templates.items()}}
    operator = _assemble(solver.solve, keys, family.g, family.field, family.rank, name, meta)

    if window is not None:
        if window.genus != family.g:
            raise ParameterError(f'window has {window.genus} coordinates, family has g={family.g}')
        logger.info(f'*** COLLOCATION {name} on {len(window)} lattice points')
        if cfg.jobs > 1:
            with ThreadPoolExecutor(cfg.jobs) as pool:
                list(pool.map(solver.solve, window))
        else:
            for n in window:
                solver.solve(n)
    return operator


###############################################################################
# Genus 1
###############################################################################

def genus1_special_points(params):
    """p = 1/2 + tau/2 + h, q = 1/2 + tau/2, r = q - h/2"""
    tau = params.sp.tau[0, 0]
    h = params.h[0]
    q = 0.5 + 0.5 * tau
    points = {'p': q + h, 'q': q, 'r': q - h / 2}
    special = SpecialPoints()
    residual = abs(theta_eval(np.array([q]), params.sp, None, params.tp))
    for key, value in points.items():
        special.add(key, [value], residual if key == 'q' else 0.0)
    return points, special


def build_genus1_pair(params):
    """
    Closed-form operators L1 = v2 T^2 + v1 T and L2 = u3 T^3 + u2 T^2 + u1 T

    L1 belongs to lambda = theta(z-h)theta(z+h)/theta^2 and L2 to
    mu = theta(z-h)theta^2(z+h/2)/theta^3.
    """
    if params.genus != 1:
        raise ParameterError(f'closed-form genus-1 operators need genus 1, got {params.genus}')
    points, special = genus1_special_points(params)
    p, q, r = points['p'], points['q'], points['r']
    h = params.h[0]

    def theta(*args):
        return theta_eval(np.array(args, dtype=complex)[:, None], params.sp, None, params.tp)

    def denominator(*args):
        return theta_with_floor(np.array(args, dtype=complex)[:, None], params.sp, params.tp,
                                params.floor)

    # values independent of n
    th_p_h, th_p_half, th_q_h, th_q_half = theta(p + h, p + h / 2, q + h, q + h / 2)
    th_p, th_q_mh, th_r, th_r_mh = denominator(p, q - h, r, r - h)

    def shift(n):
        return params.shift[0] + n[0] * h

    def v1(n):
        s = shift(n)
        num = theta(p + s)[0] * th_p_h
        return num / (denominator(p + s + h)[0] * th_p)

    def v2(n):
        s = shift(n)
        return theta(q + s)[0] * th_q_h / (denominator(q + s + 2 * h)[0] * th_q_mh)

    def u1(n):
        s = shift(n)
        return theta(p + s)[0] * th_p_half ** 2 / (denominator(p + s + h)[0] * th_p ** 2)

    def u3(n):
        s = shift(n)
        return theta(q + s)[0] * th_q_half ** 2 / (denominator(q + s + 3 * h)[0] * th_q_mh ** 2)

    def u2(n):
        s = shift(n)
        at_r = theta(r + s + 3 * h, r + s + h)
        below = denominator(r + s + 2 * h)[0]
        return -u3(n) * at_r[0] * th_r_mh / (below * th_r) - u1(n) * at_r[1] * th_r / (below * th_r_mh)

    field = ScalarField.COMPLEX_FLOAT

    def lattice(fn, label):
        return LatticeFunction(fn, 1, field, name=label)

    meta = {'method': 'closed-form', 'special_points': special.as_dict()}
    L1 = DifferenceOperator([((2,), lattice(v2, 'v2')), ((1,), lattice(v1, 'v1'))],
                            name='L1', meta=meta)
    L2 = DifferenceOperator([((3,), lattice(u3, 'u3')), ((2,), lattice(u2, 'u2')),
                             ((1,), lattice(u1, 'u1'))], name='L2', meta=meta)
    return L1, L2


def genus1_templates():
    return {'lambda': SupportTemplate(((0,), (1,), (2,))),
            'mu': SupportTemplate(((0,), (1,), (2,), (3,)))}


###############################################################################
# Genus 2
###############################################################################

def genus2_templates():
    """Row 1: L11 |m| <= 2, L12 |m| <= 1; row 2: L21 |m| <= 3, L22 |m| <= 2"""
    return {(0, 0): SupportTemplate.ball(2, 2), (0, 1): SupportTemplate.ball(2, 1),
            (1, 0): SupportTemplate.ball(2, 3), (1, 1): SupportTemplate.ball(2, 2)}


def _max_theta(points, shift, params):
    return float(np.max(np.abs(theta_eval(np.asarray(points) - shift, params.sp, None, params.tp))))


def genus2_special_points(params, direction=1, newton=None):
    """
    p: Theta_{h1e1} and Theta_{h2e2}; q: Theta_{h_k e_k} and Theta; r: Theta and Theta_beta

    Theta_s denotes the curve theta(z - s) = 0 and k is `direction`.
    """
    if params.genus != 2 or params.beta is None:
        raise ParameterError('genus-2 special points need genus 2 and beta')
    k = direction - 1
    zero = np.zeros(2, dtype=complex)
    plan = {'p': [params.unit(0), params.unit(1)],
            'q': [params.unit(k), zero],
            'r': [zero, params.beta]}
    special = SpecialPoints()
    found = {}
    for name, conditions in plan.items():
        logger.info(f'*** NEWTON {name}')
        roots = find_divisor_intersection(conditions, params.sp, count=2, tp=params.tp, cfg=newton)
        residual = max(_max_theta(roots, shift, params) for shift in conditions)
        found[name] = np.array(roots)
        special.add(name, roots, residual)
    return found, special


class _Genus2Special:
    """Coefficient solves of the special-point construction in direction k"""

    def __init__(self, params, direction, cfg, newton, per_curve):
        self.params = params
        self.cfg = cfg
        self.k = direction - 1
        self.l = 1 - self.k
        self.found, self.special = genus2_special_points(params, direction, newton)
        H = [params.unit(0), params.unit(1)]
        self.Hk, self.Hl = H[self.k], H[self.l]
        beta = params.beta

        p = self.found['p']
        self.p_const = (self.theta(p), self.theta(p - beta), self.theta(p + self.Hk))
        r = self.found['r']
        self.r_const = (self.theta(r - self.Hk), self.theta(r - self.Hl), self.theta(r + self.Hk))

        curves = [np.zeros(2, dtype=complex), H[0], H[1], beta, -self.Hk]
        samples = [sample_divisor_curve(shift, params.sp, per_curve, cfg.seed + i, params.tp)
                   for i, shift in enumerate(curves)]
        z = reduce_to_domain(np.concatenate(samples), params.sp)[0]
        self.curve_points = z
        self.curve_const = {
            'theta': self.theta(z), 'theta1': self.theta(z - H[0]), 'theta2': self.theta(z - H[1]),
            'beta': self.theta(z - beta), 'plus': self.theta(z + self.Hk)}
        self.a_shifts = SupportTemplate.ball(2, 3).shifts
        self.b_shifts = SupportTemplate.ball(2, 2).shifts
        self._cache = {}
        self._lock = threading.Lock()
        self.stats = {'max_residual': 0.0, 'solved': 0, 'curve_points': len(z)}

    def theta(self, z):
        return theta_eval(np.asarray(z, dtype=complex), self.params.sp, None, self.params.tp)

    def offset(self, n):
        return self.params.shift + np.asarray(n) * self.params.h

    def _solve2(self, matrix, rhs, what, n):
        condition = np.linalg.cond(matrix)
        if not np.isfinite(condition) or condition > SINGULAR_CONDITION:
            raise SingularSolve(f'{what} at n={n} has condition number {condition:.2e}')
        return linalg.solve(matrix, rhs)

    def row1(self, n):
        s = self.offset(n)
        beta = self.params.beta
        p = self.found['p']
        th_p, th_p_beta, th_p_plus = self.p_const
        a1 = np.column_stack([self.theta(p + s + self.Hk) * th_p,
                              self.theta(p + s + self.Hk + beta) * th_p_beta])
        v_k, u_k = self._solve2(a1, self.theta(p + s) * th_p_plus, 'system at p', n)

        r = self.found['r']
        th_r_k, th_r_l, th_r_plus = self.r_const
        a2 = np.column_stack([self.theta(r + s + 2 * self.Hk) * th_r_k,
                              self.theta(r + s + self.Hk + self.Hl) * th_r_l])
        v_kk, v_11 = self._solve2(a2, self.theta(r + s) * th_r_plus, 'system at r', n)

        e_k = tuple(1 if i == self.k else 0 for i in range(2))
        e_kk = tuple(2 if i == self.k else 0 for i in range(2))
        return {(0, 0, e_kk): v_kk, (0, 0, (1, 1)): v_11, (0, 0, e_k): v_k, (0, 1, e_k): u_k}

    def row2(self, n):
        """Cleared identity sum a_m ... + sum b_m ... = theta_k theta(z+H_k) theta(z+s+beta) theta(z-beta)"""
        z = self.curve_points
        c = self.curve_const
        s = self.offset(n)
        h = self.params.h
        beta = self.params.beta
        columns = []
        for m in self.a_shifts:
            columns.append(self.theta(z + s + np.multiply(m, h)) * c['theta1'] ** m[0]
                           * c['theta2'] ** m[1] * c['theta'] ** (3 - sum(m)))
        for m in self.b_shifts:
            columns.append(self.theta(z + s + np.multiply(m, h) + beta) * c['beta']
                           * c['theta1'] ** m[0] * c['theta2'] ** m[1] * c['theta'] ** (2 - sum(m)))
        theta_k = c['theta1'] if self.k == 0 else c['theta2']
        rhs = theta_k * c['plus'] * self.theta(z + s + beta) * c['beta']
        solution, residual = least_squares(np.column_stack(columns), rhs, self.cfg,
                                           f'genus-2 row 2 n={n}')
        keys = [(1, 0, m) for m in self.a_shifts] + [(1, 1, m) for m in self.b_shifts]
        return dict(zip(keys, solution)), residual

    def solve(self, n):
        n = tuple(int(x) for x in n)
        cached = self._cache.get(n)
        if cached is not None:
            return cached
        solution = self.row1(n)
        lower, residual = self.row2(n)
        solution.update(_prune(lower, self.cfg.prune))
        with self._lock:
            self._cache[n] = solution
            self.stats['solved'] += 1
            self.stats['max_residual'] = max(self.stats['max_residual'], residual)
        return solution

    def vanishing_determinants(self, n=(0, 0)):
        """|det| of the systems forcing v0 = u0 = 0 (at p) and the l-direction pair (at q)"""
        s = self.offset(n)
        beta = self.params.beta
        p, q = self.found['p'], self.found['q']
        th_p = self.p_const[0]
        at_p = np.column_stack([self.theta(p + s) * th_p ** 2,
                                self.theta(p + s + beta) * self.p_const[1] * th_p])
        th_q_l = self.theta(q - self.Hl)
        at_q = np.column_stack([self.theta(q + s + 2 * self.Hl) * th_q_l,
                                self.theta(q + s + self.Hl + beta) * self.theta(q - beta)])
        return {'p': float(abs(np.linalg.det(at_p))), 'q': float(abs(np.linalg.det(at_q)))}


def build_genus2_special(params, direction=1, cfg=None, newton=None, per_curve=10, window=None):
    """
    2x2 operator for theta(z-h_k e_k)theta(z+h_k e_k)/theta^2(z), k = `direction`

    Row 1 is L11 = v_kk T_k^2 + v11 T1 T2 + v_k T_k, L12 = u_k T_k with
    (v_k, u_k) from the two points p and (v_kk, v11) from the two points r.
    Row 2 solves the cleared second-row identity at points on the curves
    Theta, Theta_{h1e1}, Theta_{h2e2}, Theta_beta and Theta_{-h_k e_k}.

    Raises
    ------
    SingularSolve, NewtonDivergence, TooFewIntersections, ResidualTooLarge, AmbiguousSolution
    """
    if direction not in (1, 2):
        raise ParameterError(f'direction must be 1 or 2, got {direction}')
    cfg = cfg or CollocationConfig()
    logger.info(f'*** SPECIAL POINTS genus2 direction {direction}')
    solver = _Genus2Special(params, direction, cfg, newton, per_curve)
    e_k = tuple(1 if i == direction - 1 else 0 for i in range(2))
    e_kk = tuple(2 * x for x in e_k)
    keys = [(0, 0, e_kk), (0, 0, (1, 1)), (0, 0, e_k), (0, 1, e_k)] \
        + [(1, 0, m) for m in solver.a_shifts] + [(1, 1, m) for m in solver.b_shifts]
    meta = {'method': 'special-points', 'direction': direction,
            'special_points': solver.special.as_dict(),
            'vanishing_determinants': solver.vanishing_determinants(), 'stats': solver.stats}
    name = 'L_lambda' if direction == 1 else 'L_mu'
    operator = _assemble(solver.solve, keys, 2, ScalarField.COMPLEX_FLOAT, 2, name, meta)
    if window is not None:
        for n in window:
            solver.solve(n)
    return operator


###############################################################################
# Schur and Omega
###############################################################################

def schur_templates():
    return genus2_templates()


def build_schur_collocation(cfg=None, window=None):
    """Exact collocation operators (L(lambda), L(mu)) of the Schur family"""
    cfg = cfg or CollocationConfig()
    family = make_schur_basis()
    templates = schur_templates()
    operators = []
    for which in ('lambda', 'mu'):
        operators.append(build_collocation(family, eigenvalue_function(family, which), templates,
                                           window, cfg, name=f'L_{which}'))
    return tuple(operators)


def build_schur_pair(cfg=None, reference=None):
    """
    Printed Schur operators with q1 supplied by exact collocation

    Parameters
    ----------
    reference : DifferenceOperator or None
        Collocation L(lambda) providing q1; built when omitted
    """
    if reference is None:
        reference = build_schur_collocation(cfg)[0]

    def q1(n):
        return reference.coefficient((1, 0), n)[1, 0]

    lam_table, mu_table = closed_forms.schur_tables(q1)
    L_lambda = closed_forms.operator_from_table(lam_table, closed_forms.SCHUR_LAMBDA_SHAPE, 'L_lambda')
    L_mu = closed_forms.operator_from_table(mu_table, closed_forms.SCHUR_MU_SHAPE, 'L_mu')
    L_lambda.meta.update(method='printed', q1_source='collocation')
    L_mu.meta.update(method='printed')
    return L_lambda, L_mu


def omega_templates():
    return {'lambda1': SupportTemplate.ball(2, 1), 'lambda2': SupportTemplate.ball(2, 2)}


def build_omega_collocation(params=None, cfg=None, window=None):
    """Exact collocation operators (D(lambda1), D(lambda2)) on Omega"""
    cfg = cfg or CollocationConfig()
    family = make_omega_basis(params)
    templates = omega_templates()
    return tuple(build_collocation(family, eigenvalue_function(family, which), templates[which],
                                   window, cfg, name=f'D_{which}')
                 for which in ('lambda1', 'lambda2'))


def build_omega_pair(params=None):
    """Printed operators D(lambda1), D(lambda2) for the printed Omega data"""
    params = params or OmegaParams.printed()
    if params != OmegaParams.printed():
        raise ParameterError('the printed Omega operators exist only for the printed data')
    first, second = closed_forms.omega_tables()
    D1 = closed_forms.operator_from_table(first, closed_forms.OMEGA_LAMBDA1_SHAPE, 'D_lambda1')
    D2 = closed_forms.operator_from_table(second, closed_forms.OMEGA_LAMBDA2_SHAPE, 'D_lambda2')
    for operator in (D1, D2):
        operator.meta.update(method='printed')
    return D1, D2


def gamma_templates():
    return SupportTemplate.ball(2, 1)


def family_templates(tag):
    """Default templates per eigenvalue name for a family tag"""
    if tag is FamilyTag.GENUS1:
        return genus1_templates()
    if tag in (FamilyTag.GENUS2, FamilyTag.SCHUR):
        return {'lambda': genus2_templates(), 'mu': genus2_templates()}
    if tag is FamilyTag.OMEGA:
        return omega_templates()
    if tag is FamilyTag.GAMMA:
        return {'lambda': gamma_templates()}
    raise ParameterError(f'no templates for {tag}')
