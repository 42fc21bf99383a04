from fractions import Fraction

import numpy as np
import pytest

from dbaops.errors import ParameterError, PoleHit
from dbaops.modules import (AbelianDBAParams, FamilyTag, GammaParams, MEMO_SIZE, OmegaParams,
                            eigenvalue_function, make_gamma_basis, make_genus2_basis,
                            make_omega_basis)
from dbaops.theta import theta_eval

T = (Fraction(2, 3), Fraction(-1, 5))


def test_abelian_params_validation(genus1_params):
    with pytest.raises(ParameterError):
        genus1_params.with_h([0.0])
    with pytest.raises(ParameterError):
        AbelianDBAParams.genus2_default(h=[0.2])
    with pytest.raises(ParameterError):
        make_genus2_basis(genus1_params)


def test_genus1_basis_at_origin(genus1_family, genus1_params):
    z = np.array([0.21 + 0.13j])
    sp = genus1_params.sp
    expected = theta_eval(z + genus1_params.x0, sp) / theta_eval(z, sp)
    assert abs(genus1_family.eval(0, (0,), z) - expected) < 1e-12 * abs(expected)


def test_genus1_basis_shift_factor(genus1_family, genus1_params):
    z = np.array([0.21 + 0.13j])
    sp = genus1_params.sp
    h = genus1_params.h
    ratio = theta_eval(z - h, sp) / theta_eval(z, sp)
    expected = theta_eval(z + genus1_params.x0 + 2 * h, sp) / theta_eval(z, sp) * ratio ** 2
    assert abs(genus1_family.eval(0, (2,), z) - expected) < 1e-11 * abs(expected)


def test_spectral_sampling_is_seeded(genus1_family, schur_family):
    first = genus1_family.sample(4, seed=7)
    again = genus1_family.sample(4, seed=7)
    assert np.allclose(np.array(first), np.array(again))
    assert list(schur_family.sample(3, seed=1)) == list(schur_family.sample(3, seed=1))


def test_schur_basis_and_lambda_at_a_rational_point(schur_family):
    value = schur_family.eval(0, (1, 0), (3, 1))
    assert value == Fraction(305, 576)
    assert eigenvalue_function(schur_family, 'lambda')((3, 1)) == Fraction(305, 576)
    assert schur_family.eval(0, (0, 0), (3, 1)) == 1


def test_schur_pole_on_sigma_divisor(schur_family):
    with pytest.raises(PoleHit):
        schur_family.eval(0, (0, 0), (1, Fraction(1, 3)))


def test_omega_presets():
    generic = OmegaParams.generic()
    printed = OmegaParams.printed()
    assert generic.field.exact and printed.field.exact
    assert generic != printed
    assert printed == OmegaParams.printed()


def test_omega_rejects_broken_gluing():
    with pytest.raises(ParameterError):
        OmegaParams(gcoef=(1, 1, 1, 1), g1coef=(1, 0, 0, 0), g2coef=(1, -1, -2, 1))


@pytest.mark.parametrize('params', [OmegaParams.generic(), OmegaParams.printed()])
def test_omega_gluing_is_exact(params):
    family = make_omega_basis(params)
    for j in range(2):
        for n in [(0, 0), (1, 0), (2, -1), (-1, 3)]:
            assert family.gluing_residual(j, n, T) == 0
    for which in ('lambda1', 'lambda2'):
        lam = eigenvalue_function(family, which)
        first, second = family.glued_points(T)
        assert lam(first) == lam(second)


def test_omega_kappa_of_printed_data():
    family = make_omega_basis(OmegaParams.printed())
    assert family.kappa((1, 0)) == 2
    assert family.kappa((1, 1)) == -2
    assert family.kappa((3, 2)) == 8


def test_gamma_default_nullspace():
    family = make_gamma_basis()
    assert family.tag is FamilyTag.GAMMA
    assert family.nullspace_dimension == 2 == family.expected_dimension
    assert family.rank == 2


def test_gamma_gluing_is_exact():
    family = make_gamma_basis()
    for j in range(family.rank):
        for n in [(0, 0), (1, 0), (0, 1), (2, -1)]:
            assert family.gluing_residual(j, n, T) == 0
    lam = eigenvalue_function(family, 'lambda')
    first, second = family.glued_points(T)
    assert lam(first) == lam(second)


def test_gamma_rejects_repeated_eigenvalues():
    base = GammaParams.default()
    with pytest.raises(ParameterError):
        GammaParams(a1=1, b1=0, a2=0, b2=1, P=((2, 0), (0, 2)), A=1, cvec=base.cvec,
                    Lambda=1, fcoef=base.fcoef, ficoef=base.ficoef)


def test_unknown_eigenvalue_name(schur_family, omega_family):
    with pytest.raises(ParameterError):
        eigenvalue_function(schur_family, 'lambda1')
    with pytest.raises(ParameterError):
        eigenvalue_function(omega_family, 'mu')
    assert eigenvalue_function(omega_family, 'one')((1, 2, 3, 4)) == 1


def test_rational_family_memo_is_bounded(schur_family):
    points = schur_family.sample(2, seed=4)
    first = schur_family.values(0, (1, 1), [(0, 0), (1, 0)], points)
    again = schur_family.values(0, (1, 1), [(0, 0), (1, 0)], points)
    assert (first == again).all()
    info = schur_family.cache_info()
    assert info.maxsize == MEMO_SIZE
    assert info.hits >= 4 and 4 <= info.currsize <= MEMO_SIZE
