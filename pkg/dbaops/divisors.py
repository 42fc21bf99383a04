"""
Points on theta divisors by batched damped Newton iteration

A condition is a shift s; it stands for the equation theta(z - s) = 0.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .errors import NewtonDivergence, ParameterError, RadiusCapExceeded, TooFewIntersections
from .theta import DEFAULT_POLICY, lattice_coordinates, theta_eval

logger = logging.getLogger(__name__)

NEWTON_STEP = 1e-6
MAX_ITERATIONS = 50
CONVERGED = 1e-12
ACCEPTED = 1e-10
DEDUP_DISTANCE = 1e-6
MAX_STEP = 0.25
BACKTRACKS = 10
# smallest singular value ratio of the Jacobian at an isolated root
ISOLATION_RATIO = 1e-8


@dataclass(frozen=True)
class NewtonConfig:
    """
    Parameters
    ----------
    grid : int
        Seeds per real coordinate of the fundamental domain

    max_iterations : int

    tol : float
        Convergence threshold on max |theta|

    accept : float
        Roots with a larger residual are discarded

    max_step : float
        Largest Newton step per complex coordinate
    """
    grid: int = 8
    max_iterations: int = MAX_ITERATIONS
    tol: float = CONVERGED
    accept: float = ACCEPTED
    max_step: float = MAX_STEP

    def __post_init__(self):
        if self.grid < 1 or self.max_iterations < 1:
            raise ParameterError('Newton grid and iteration count must be positive')
        if not 0 < self.tol <= self.accept:
            raise ParameterError(f'need 0 < tol <= accept, got {self.tol}, {self.accept}')
        if not self.max_step > 0:
            raise ParameterError(f'max_step must be positive, got {self.max_step}')


def _system(shifts, sp, tp):
    shifts = np.asarray(shifts, dtype=complex)

    def residual(z, rows):
        stack = (z[:, None, :] - shifts[None, :, :]).reshape(-1, sp.genus)
        return theta_eval(stack, sp, None, tp).reshape(len(z), len(shifts))
    return residual


def _evaluate(residual, z, rows):
    """
    F at every row; rows whose evaluation fails or is not finite come back as NaN

    A failing batch is retried row by row so that one bad seed only loses itself.
    """
    try:
        values = np.array(residual(z, rows), dtype=complex).reshape(len(z), -1)
    except RadiusCapExceeded:
        if len(z) == 1:
            return np.full((1, z.shape[1]), np.nan, dtype=complex)
        values = np.vstack([_evaluate(residual, z[i:i + 1], rows[i:i + 1]) for i in range(len(z))])
    values[~np.all(np.isfinite(values), axis=1)] = np.nan
    return values


def _size(values):
    size = np.max(np.abs(values), axis=1)
    return np.where(np.isnan(size), np.inf, size)


def _jacobian(residual, z, rows):
    """Central differences; theta is holomorphic so one complex step per variable suffices."""
    count, dim = z.shape
    columns = []
    for j in range(dim):
        step = np.zeros(dim, dtype=complex)
        step[j] = NEWTON_STEP
        forward = _evaluate(residual, z + step, rows)
        backward = _evaluate(residual, z - step, rows)
        columns.append((forward - backward) / (2 * NEWTON_STEP))
    return np.stack(columns, axis=-1)


def newton_batch(residual, seeds, cfg=None, reduce=None):
    """
    Damped Newton on a stack of seeds

    Steps are capped at `cfg.max_step` per coordinate and halved while the
    residual grows. A seed whose evaluation fails, or that cannot decrease its
    residual, is dropped with its last norm.

    Parameters
    ----------
    residual : callable (z, rows) -> F
        z has shape (M, d) and F shape (M, d); `rows` indexes the seeds
        still active, for residuals that carry per-seed data

    seeds : complex array (M, d)

    reduce : callable z -> z or None
        Maps seeds and accepted iterates back to a fundamental domain, for
        residuals whose zero set is periodic

    Returns
    -------
    roots : complex array (M, d)
    norms : float array (M,), final max |F|
    """
    cfg = cfg or NewtonConfig()
    reduce = reduce or (lambda z: z)
    z = reduce(np.array(seeds, dtype=complex))
    norms = np.full(len(z), np.inf)
    active = np.arange(len(z))
    for iteration in range(cfg.max_iterations):
        if active.size == 0:
            break
        current = z[active]
        values = _evaluate(residual, current, active)
        size = _size(values)
        norms[active] = size
        going = np.isfinite(size) & (size >= cfg.tol)
        active, current, values, size = active[going], current[going], values[going], size[going]
        if active.size == 0:
            break

        jacobian = _jacobian(residual, current, active)
        usable = np.all(np.isfinite(jacobian), axis=(1, 2))
        active, current, values, size = \
            active[usable], current[usable], values[usable], size[usable]
        jacobian = jacobian[usable]
        if active.size == 0:
            break
        step = -(np.linalg.pinv(jacobian) @ values[..., None])[..., 0]
        length = np.max(np.abs(step), axis=1)
        step *= np.minimum(1.0, cfg.max_step / np.where(length > 0, length, 1.0))[:, None]

        trial = current + step
        trial_size = _size(_evaluate(residual, trial, active))
        # halve the step while the residual grows
        for _ in range(BACKTRACKS):
            worse = trial_size > size
            if not np.any(worse):
                break
            step[worse] /= 2
            trial[worse] = current[worse] + step[worse]
            trial_size[worse] = _size(_evaluate(residual, trial[worse], active[worse]))

        improved = trial_size <= size
        z[active[improved]] = reduce(trial[improved])
        norms[active[improved]] = trial_size[improved]
        active = active[improved]
    # norms of the reduced roots
    done = np.flatnonzero(np.isfinite(norms))
    if done.size:
        norms[done] = _size(_evaluate(residual, z[done], done))
    logger.debug(f'Newton: {int(np.sum(norms < cfg.accept))} of {len(z)} seeds converged')
    return z, norms


def seed_grid(sp, grid):
    """z = u + tau v with (u, v) on a centred grid of the fundamental domain"""
    g = sp.genus
    ticks = (np.arange(grid) + 0.5) / grid - 0.5
    mesh = np.stack(np.meshgrid(*([ticks] * (2 * g)), indexing='ij'), axis=-1).reshape(-1, 2 * g)
    u, v = mesh[:, :g], mesh[:, g:]
    return u + v @ sp.tau.T


def reduce_to_domain(z, sp):
    """Representative with lattice coordinates in [-1/2, 1/2)"""
    u, v = lattice_coordinates(z, sp)
    u = u - np.floor(u + 0.5)
    v = v - np.floor(v + 0.5)
    return u + v @ sp.tau.T, np.hstack([u, v])


def _torus_distance(a, b):
    delta = a - b
    delta = delta - np.round(delta)
    return float(np.max(np.abs(delta)))


def find_divisor_intersection(conditions, sp, count=None, tp=None, cfg=None):
    """
    Distinct common zeros of theta(z - s) for the shifts s in `conditions`

    Parameters
    ----------
    conditions : list of complex arrays (genus,)
        One shift per equation; as many equations as the genus

    sp : SiegelPoint

    count : int or None
        Exact number of distinct roots required

    Returns
    -------
    list of complex arrays (genus,), sorted by lattice coordinates

    Raises
    ------
    NewtonDivergence
        No seed converged to an isolated root
    TooFewIntersections
        Fewer distinct roots than `count`
    """
    cfg = cfg or NewtonConfig()
    tp = tp or DEFAULT_POLICY
    conditions = np.atleast_2d(np.asarray(conditions, dtype=complex))
    if conditions.shape != (sp.genus, sp.genus):
        raise ParameterError(f'need {sp.genus} conditions of length {sp.genus}, '
                             f'got shape {conditions.shape}')
    residual = _system(conditions, sp, tp)

    def periodic(z):
        return reduce_to_domain(z, sp)[0]

    roots, norms = newton_batch(residual, seed_grid(sp, cfg.grid), cfg, periodic)
    good = norms < cfg.accept
    if not np.any(good):
        raise NewtonDivergence(f'no Newton seed converged for shifts {conditions.tolist()}')

    reduced, coords = reduce_to_domain(roots[good], sp)
    # polish after the lattice shift changes the theta scale
    reduced, polished = newton_batch(residual, reduced, cfg, periodic)
    keep = polished < cfg.accept
    if np.any(keep):
        jacobian = _jacobian(residual, reduced[keep], np.arange(int(np.sum(keep))))
        isolated = np.all(np.isfinite(jacobian), axis=(1, 2))
        singular = np.linalg.svd(np.where(isolated[:, None, None], jacobian, 0), compute_uv=False)
        isolated &= singular[:, -1] > ISOLATION_RATIO * singular[:, 0]
        keep[np.flatnonzero(keep)[~isolated]] = False
    if not np.any(keep):
        raise NewtonDivergence(f'no isolated root for shifts {conditions.tolist()}')
    reduced, coords = reduce_to_domain(reduced[keep], sp)

    order = np.lexsort(np.round(coords, 8).T[::-1])
    distinct = []
    distinct_coords = []
    for index in order:
        if all(_torus_distance(coords[index], other) >= DEDUP_DISTANCE for other in distinct_coords):
            distinct.append(reduced[index])
            distinct_coords.append(coords[index])
    logger.info(f'found {len(distinct)} distinct root(s) for shifts {np.round(conditions, 6).tolist()}')
    if count is not None and len(distinct) < count:
        raise TooFewIntersections(f'found {len(distinct)} distinct roots, need {count}')
    if count is not None and len(distinct) > count:
        logger.warning(f'{len(distinct)} distinct roots, expected {count}; keeping the first {count}')
        distinct = distinct[:count]
    return distinct


def _real_period(z1):
    # theta(z + e_1) = theta(z)
    return z1 - np.floor(z1.real + 0.5)


def sample_divisor_curve(shift, sp, count, seed=42, tp=None, cfg=None):
    """
    Points on the genus-2 curve theta(z - shift) = 0

    z2 is drawn from the fundamental domain and z1 solved for by Newton
    from a small seed row; draws without a root are discarded.
    """
    if sp.genus != 2:
        raise ParameterError(f'curve sampling needs genus 2, got {sp.genus}')
    cfg = cfg or NewtonConfig(grid=4)
    tp = tp or DEFAULT_POLICY
    shift = np.asarray(shift, dtype=complex)
    rng = np.random.default_rng(seed)
    ticks = (np.arange(cfg.grid) + 0.5) / cfg.grid - 0.5
    seeds1 = (ticks[:, None] + sp.tau[0, 0] * ticks[None, :]).reshape(-1)

    points = []
    for _ in range(20):
        need = count - len(points)
        if need <= 0:
            break
        uv = rng.random((need, 2)) - 0.5
        z2 = uv[:, 0] + sp.tau[1, 1] * uv[:, 1]
        fixed = np.repeat(z2, seeds1.size)
        start = np.tile(seeds1, need)[:, None]

        def residual(z1, rows):
            z = np.column_stack([z1[:, 0], fixed[rows]])
            return theta_eval(z - shift, sp, None, tp)[:, None]

        roots, norms = newton_batch(residual, start, cfg, _real_period)
        for i in range(need):
            block = slice(i * seeds1.size, (i + 1) * seeds1.size)
            found = np.flatnonzero(norms[block] < cfg.accept)
            if found.size:
                points.append(np.array([roots[block][found[0], 0], z2[i]]))
    if len(points) < count:
        raise TooFewIntersections(f'only {len(points)} of {count} curve points found')
    return np.array(points[:count])
