from fractions import Fraction

import pytest

from dbaops import closed_forms
from dbaops.algebra import LatticeWindow
from dbaops.builders import build_schur_collocation, build_schur_pair
from dbaops.config import decode_config
from dbaops.errors import PoleHit
from dbaops.modules import eigenvalue_function
from dbaops.suites import run_suite
from dbaops.verification import (audit_coefficients, check_agreement, check_commutator,
                                 check_eigen)

WINDOW = LatticeWindow((0, 0), (2, 2))


@pytest.fixture(scope='module')
def operators():
    return build_schur_collocation(window=WINDOW)


def test_printed_mu_coefficients():
    _, mu = closed_forms.schur_tables()
    assert mu.value('f11', (1, 0)) == Fraction(9, 10)
    assert mu.value('f02', (1, 0)) == Fraction(-1, 10)
    assert mu.value('f2', (1, 0)) == Fraction(11, 10)
    assert mu.value('g2', (1, 0)) == Fraction(-9, 10)
    assert mu.value('j11', (1, 0)) == -mu.value('r21', (1, 0))


def test_printed_poles_propagate():
    _, mu = closed_forms.schur_tables()
    # f02 divides by n1, f2 reads f02
    assert mu.is_pole('f02', (0, 3)) and mu.is_pole('f2', (0, 3))
    assert not mu.is_pole('f11', (0, 3))
    with pytest.raises(PoleHit):
        mu.value('f2', (0, 0))


def test_q1_needs_a_source():
    lam, _ = closed_forms.schur_tables()
    assert 'q1' not in lam
    lam, _ = closed_forms.schur_tables(lambda n: Fraction(n[0], 7))
    assert lam.value('q1', (3, 1)) == Fraction(3, 7)


def test_collocation_operators_are_exact(operators, schur_family):
    points = schur_family.sample(4, seed=2)
    for L, which in zip(operators, ('lambda', 'mu')):
        assert L.field.exact
        result = check_eigen(L, schur_family, eigenvalue_function(schur_family, which), WINDOW, points)
        assert result.passed and result.exact_zero is True


def test_collocation_operators_commute_exactly(operators):
    result = check_commutator(*operators, LatticeWindow((0, 0), (1, 1)), samples=1)
    assert result.passed and result.exact_zero is True
    assert result.max_residual == 0


def test_every_printed_formula_agrees_once_corrected(operators):
    L_lambda, L_mu = operators
    lam, mu = closed_forms.schur_tables(lambda n: L_lambda.coefficient((1, 0), n)[1, 0])
    lam_entries = closed_forms.entry_coefficients(closed_forms.SCHUR_LAMBDA_SHAPE)
    mu_entries = closed_forms.entry_coefficients(closed_forms.SCHUR_MU_SHAPE)
    audit = audit_coefficients(lam, L_lambda, WINDOW, lam_entries,
                               [key for key in lam_entries if key != 'q1'])
    audit.update(audit_coefficients(mu, L_mu, WINDOW, mu_entries))
    audit.update(audit_coefficients(closed_forms.printed_q1_candidate(), L_lambda, WINDOW,
                                    lam_entries, ['q1']))
    assert len(audit) == len(lam_entries) + len(mu_entries)
    for key, row in audit.items():
        assert row['compared'] > 0, key
        assert row['agree'] == row['compared'], (key, row)


def test_misprinted_q12_and_r03_disagree_with_collocation(operators):
    L_lambda, L_mu = operators
    printed_lam, printed_mu = closed_forms.schur_tables(corrected=False)
    lam, mu = closed_forms.schur_tables()
    assert printed_lam.value('q12', (0, 1)) == Fraction(17, 90)
    assert lam.value('q12', (0, 1)) == Fraction(17, 117)
    assert L_lambda.coefficient((1, 2), (0, 1))[1, 0] == Fraction(17, 117)
    assert printed_mu.value('r03', (0, 0)) == Fraction(1, 3)
    assert mu.value('r03', (0, 0)) == Fraction(2, 9)
    assert L_mu.coefficient((0, 3), (0, 0))[1, 0] == Fraction(2, 9)
    # the misprint reaches every coefficient that reads q12 or r03
    def q1(n):
        return L_lambda.coefficient((1, 0), n)[1, 0]

    printed_lam, _ = closed_forms.schur_tables(q1, corrected=False)
    lam_entries = closed_forms.entry_coefficients(closed_forms.SCHUR_LAMBDA_SHAPE)
    mu_entries = closed_forms.entry_coefficients(closed_forms.SCHUR_MU_SHAPE)
    audit = audit_coefficients(printed_lam, L_lambda, WINDOW, lam_entries,
                               [key for key in lam_entries if key != 'q1'])
    audit.update(audit_coefficients(printed_mu, L_mu, WINDOW, mu_entries))
    disagreeing = {key for key, row in audit.items() if row['agree'] != row['compared']}
    assert disagreeing == {'q12', 'p11', 'q21', 'q11', 'q20',
                           'r03', 'r12', 'r11', 'r02', 'r2', 'j02', 'j2'}


def test_corrected_values_at_one_one():
    _, mu = closed_forms.schur_tables()
    expected = {'r03': Fraction(3, 16), 'r12': Fraction(261, 368), 'r11': Fraction(-225, 299),
                'r02': Fraction(-87, 208), 'r2': Fraction(3, 13), 'j02': Fraction(-19, 16),
                'j2': Fraction(29, 13), 'r21': Fraction(18, 23)}
    assert {key: mu.value(key, (1, 1)) for key in expected} == expected
    lam, _ = closed_forms.schur_tables(lambda n: Fraction(139, 135))
    assert lam.value('q12', (1, 1)) == Fraction(556, 621)
    assert lam.value('p11', (1, 1)) == Fraction(-16, 69)
    assert lam.value('q21', (1, 1)) == Fraction(26827, 8073)
    assert lam.value('q20', (1, 1)) == Fraction(-12371, 3510)


def test_printed_pair_takes_q1_from_collocation(operators):
    L_lambda, _ = operators
    printed, _ = build_schur_pair(reference=L_lambda)
    assert printed.meta['q1_source'] == 'collocation'
    n = (2, 1)
    assert printed.coefficient((1, 0), n)[1, 0] == L_lambda.coefficient((1, 0), n)[1, 0]
    agreement = check_agreement(printed, L_lambda, WINDOW)
    assert agreement.passed and agreement.evaluated > 0


def test_q1_candidate_is_reported():
    candidate = closed_forms.printed_q1_candidate()
    assert 'q1' in candidate
    assert isinstance(candidate.value('q1', (1, 1)), Fraction)


def test_schur_verify_enforces_every_printed_coefficient():
    run = decode_config({'family': 'schur', 'window': {'lo': [0, 0], 'hi': [2, 2]},
                         'tolerances': {'eigen_points': 4, 'commutator_samples': 1, 'freeness_k': 1,
                                        'audit_min_points': 6}})
    report = run_suite(run)
    checks = {check.name: check for check in report.checks}
    for name in ('printed:lambda', 'printed:mu'):
        assert checks[name].passed, checks[name].details
    assert len(checks['printed:lambda'].details['coefficients']) == 13
    assert len(checks['printed:mu'].details['coefficients']) == 13
    notes = {note['title']: note for note in report.notes}
    assert notes['q1 with p12 read as p11']['discrepancy'] is False
    assert notes['printed coefficients as printed']['corrected'] == ['q12', 'r03']
    assert 'mu:r03' in notes['printed coefficients as printed']['disagreeing']
    assert report.passed
