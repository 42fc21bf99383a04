import numpy as np
import pytest

from dbaops.algebra import LatticeWindow
from dbaops.builders import (build_collocation, build_genus2_special, genus2_special_points,
                             genus2_templates)
from dbaops.divisors import (NewtonConfig, find_divisor_intersection, newton_batch,
                             reduce_to_domain, sample_divisor_curve)
from dbaops.errors import NewtonDivergence, ParameterError, RadiusCapExceeded
from dbaops.config import decode_config
from dbaops.modules import AbelianDBAParams, eigenvalue_function, make_genus2_basis
from dbaops.suites import run_suite
from dbaops.theta import theta_eval, validate_siegel
from dbaops.verification import check_agreement, check_commutator, check_eigen

WINDOW = LatticeWindow((0, 0), (1, 1))


@pytest.fixture(scope='module')
def params():
    return AbelianDBAParams.genus2_default()


@pytest.fixture(scope='module')
def operators(params):
    return tuple(build_genus2_special(params, direction, window=WINDOW) for direction in (1, 2))


def test_genus1_divisor_root_is_half_period():
    sp = validate_siegel([[0.15 + 1.05j]])
    roots = find_divisor_intersection([[0]], sp, count=1)
    assert len(roots) == 1
    assert abs(theta_eval(roots[0], sp)) < 1e-10
    _, coords = reduce_to_domain(np.array([0.5 + 0.5 * sp.tau[0, 0]]), sp)
    _, found = reduce_to_domain(np.array([roots[0]]), sp)
    assert np.allclose(np.abs(found), np.abs(coords), atol=1e-8)


def test_newton_drops_only_the_failing_seed():
    sp = validate_siegel([[0.15 + 1.05j]])
    half = 0.5 + 0.5 * sp.tau[0, 0]

    def residual(z, rows):
        if np.any(np.abs(z) > 5):
            raise RadiusCapExceeded('outside the test region')
        return theta_eval(z, sp)

    roots, norms = newton_batch(residual, np.array([[half - 0.05], [100.0 + 0j]]))
    assert abs(roots[0, 0] - half) < 1e-8
    assert norms[0] < 1e-10
    assert norms[1] == np.inf


def test_newton_from_far_seed_reaches_the_divisor(params):
    sp = params.sp
    shifts = np.array([params.unit(0), np.zeros(2)])

    def residual(z, rows):
        stack = (z[:, None, :] - shifts[None, :, :]).reshape(-1, 2)
        return theta_eval(stack, sp).reshape(len(z), 2)

    def periodic(z):
        return reduce_to_domain(z, sp)[0]

    near = find_divisor_intersection(shifts, sp, count=2)
    seeds = np.array(near) + 0.02 + 30 * sp.tau[0] - 17 * sp.tau[1]
    roots, norms = newton_batch(residual, seeds, NewtonConfig(max_iterations=80), periodic)
    assert np.all(norms < 1e-10)
    _, found = reduce_to_domain(roots, sp)
    _, expected = reduce_to_domain(np.array(near), sp)
    delta = found - expected
    assert np.max(np.abs(delta - np.round(delta))) < 1e-7


def test_newton_config_validation():
    with pytest.raises(ParameterError):
        NewtonConfig(max_step=0)
    with pytest.raises(ParameterError):
        NewtonConfig(tol=1e-8, accept=1e-10)


def test_curve_points_lie_on_the_divisor(params):
    shift = params.unit(0)
    points = sample_divisor_curve(shift, params.sp, 4, seed=5)
    assert points.shape == (4, 2)
    assert np.max(np.abs(theta_eval(points - shift, params.sp))) < 1e-9


def test_special_points_solve_their_equations(params):
    found, special = genus2_special_points(params)
    assert set(found) == {'p', 'q', 'r'}
    assert all(len(roots) == 2 for roots in found.values())
    assert max(special.residuals.values()) < 1e-10


def test_special_operators_satisfy_eigen_relations(params, operators):
    family = make_genus2_basis(params)
    points = family.sample(6, seed=11)
    for L, which in zip(operators, ('lambda', 'mu')):
        result = check_eigen(L, family, eigenvalue_function(family, which), WINDOW, points, tol=1e-7)
        assert result.passed, (L.name, result.max_residual)


def test_special_operators_commute(operators):
    result = check_commutator(*operators, LatticeWindow((0, 0), (0, 0)), samples=1, tol=1e-6)
    assert result.passed, result.details


def test_special_agrees_with_collocation(params, operators):
    family = make_genus2_basis(params)
    origin = LatticeWindow((0, 0), (0, 0))
    C = build_collocation(family, eigenvalue_function(family, 'lambda'), genus2_templates(),
                          origin, name='C_lambda')
    result = check_agreement(operators[0], C, origin, tol=1e-6)
    assert result.passed, result.max_residual


def test_operator_metadata(operators):
    L_lambda, L_mu = operators
    assert (L_lambda.name, L_mu.name) == ('L_lambda', 'L_mu')
    assert L_lambda.meta['direction'] == 1 and L_mu.meta['direction'] == 2
    assert set(L_lambda.meta['vanishing_determinants']) == {'p', 'q'}
    assert (2, 0) in L_lambda.support and (0, 2) in L_mu.support


def test_vanishing_beta_has_no_isolated_intersection():
    params = AbelianDBAParams.genus2_default(beta=[0, 0])
    with pytest.raises(NewtonDivergence):
        genus2_special_points(params)


def test_direction_must_be_one_or_two(params):
    with pytest.raises(ParameterError):
        build_genus2_special(params, direction=3)


def test_default_genus2_verify_passes():
    run = decode_config({'family': 'genus2'})
    report = run_suite(run)
    failing = {c.name: c.max_residual for c in report.checks if not c.passed}
    assert report.passed, failing
    names = {c.name for c in report.checks}
    assert {'special_points', 'eigen:L_lambda', 'eigen:L_mu', 'commutator:L_lambda,L_mu',
            'vanishing:lambda', 'vanishing:mu', 'freeness:genus2', 'continuum'} <= names
    assert report.skipped_fraction < 0.5
