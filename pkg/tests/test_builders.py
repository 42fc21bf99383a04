import numpy as np
import pytest

from dbaops.algebra import LatticeWindow
from dbaops.builders import CollocationConfig, SupportTemplate, build_collocation, least_squares
from dbaops.errors import AmbiguousSolution, ParameterError, ResidualTooLarge
from dbaops.modules import eigenvalue_function


def test_support_templates():
    ball = SupportTemplate.ball(2, 2)
    assert len(ball) == 6
    assert (1, 1) in ball.shifts and (2, 1) not in ball.shifts
    with pytest.raises(ParameterError):
        SupportTemplate(((0,), (0,)))
    with pytest.raises(ParameterError):
        SupportTemplate(())


def test_collocation_config_validation():
    with pytest.raises(ParameterError):
        CollocationConfig(samples_per_unknown=1)
    with pytest.raises(ParameterError):
        CollocationConfig(jobs=0)


def test_least_squares_acceptance(cfg):
    matrix = np.array([[1, 0], [0, 1], [1, 1]], dtype=complex)
    solution, residual = least_squares(matrix, matrix @ np.array([2, -1]), cfg, 'test')
    assert np.allclose(solution, [2, -1]) and residual < 1e-12
    with pytest.raises(AmbiguousSolution):
        least_squares(matrix[:1], np.array([1.0]), cfg, 'test')
    with pytest.raises(ResidualTooLarge):
        least_squares(matrix, np.array([1.0, 1.0, 0.0]), cfg, 'test')



def test_collocation_template_without_lambda_fails(genus1_family):
    # T^0 alone cannot reproduce lambda psi
    with pytest.raises(ResidualTooLarge):
        build_collocation(genus1_family, eigenvalue_function(genus1_family, 'lambda'),
                          SupportTemplate(((0,),)), LatticeWindow((0,), (0,)))
