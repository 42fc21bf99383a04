import numpy as np
import pytest

from dbaops.algebra import LatticeWindow
from dbaops.builders import (build_collocation, build_genus1_pair, genus1_special_points,
                             genus1_templates)
from dbaops.config import GENUS1_EIGEN_POINTS, decode_config
from dbaops.modules import eigenvalue_function
from dbaops.suites import run_suite
from dbaops.theta import theta_eval
from dbaops.verification import check_agreement, check_commutator, check_eigen


def test_genus1_checks_fifty_points_by_default():
    run = decode_config({'family': 'genus1'})
    assert GENUS1_EIGEN_POINTS >= 50
    assert run.tolerances.eigen_points == GENUS1_EIGEN_POINTS
    assert run.tolerances.eigen == 1e-9
    assert decode_config({'family': 'genus1', 'tolerances': {'eigen_points': 7}}) \
        .tolerances.eigen_points == 7
    assert decode_config({'family': 'schur'}).tolerances.eigen_points == 20


def test_default_genus1_verify_samples_every_point():
    run = decode_config({'family': 'genus1'})
    report = run_suite(run)
    assert report.passed, [c.name for c in report.checks if not c.passed]
    for name in ('eigen:L1', 'eigen:L2'):
        check = next(c for c in report.checks if c.name == name)
        assert check.evaluated + len(check.skipped) == len(run.window) * GENUS1_EIGEN_POINTS


def test_genus1_special_points(genus1_params):
    points, special = genus1_special_points(genus1_params)
    assert abs(theta_eval(np.array([points['q']]), genus1_params.sp)) < 1e-12
    assert points['p'] - points['q'] == pytest.approx(genus1_params.h[0])
    assert special.as_dict()['residuals']['q'] < 1e-12


def test_genus1_operators_satisfy_eigen_relations(genus1_params, genus1_family, line):
    L1, L2 = build_genus1_pair(genus1_params)
    assert L1.support == [(1,), (2,)]
    assert L2.support == [(1,), (2,), (3,)]
    points = genus1_family.sample(5, seed=3)
    for L, which in ((L1, 'lambda'), (L2, 'mu')):
        result = check_eigen(L, genus1_family, eigenvalue_function(genus1_family, which),
                             line, points, tol=1e-8)
        assert result.passed, result.max_residual
        assert result.evaluated == len(line) * len(points)


def test_genus1_operators_commute(genus1_params, line):
    L1, L2 = build_genus1_pair(genus1_params)
    result = check_commutator(L1, L2, line, samples=2, tol=1e-6)
    assert result.passed, result.details


def test_collocation_reproduces_closed_form(genus1_params, genus1_family):
    window = LatticeWindow((-1,), (1,))
    L1, _ = build_genus1_pair(genus1_params)
    C = build_collocation(genus1_family, eigenvalue_function(genus1_family, 'lambda'),
                          genus1_templates()['lambda'], window, name='C_lambda')
    assert C.meta['method'] == 'collocation'
    assert C.meta['stats']['solved'] == len(window)
    result = check_agreement(L1, C, window, tol=1e-7)
    assert result.passed, result.max_residual
