import json

import pytest

from dbaops.cli import main


def write_config(tmp_path, document, name='run.json'):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def run(tmp_path, document, *flags, out='out'):
    config = write_config(tmp_path, document)
    return main(['--config', config, '--out', str(tmp_path / out), *flags])


SCHUR = {'family': 'schur', 'window': {'lo': [0, 0], 'hi': [1, 1]},
         'tolerances': {'eigen_points': 4, 'commutator_samples': 1, 'freeness_k': 1,
                        'audit_min_points': 1}}


def test_malformed_json_writes_nothing(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"family": "schur",')
    assert main(['--config', str(path), '--out', str(tmp_path / 'out')]) == 2
    assert not (tmp_path / 'out').exists()


def test_schema_violation(tmp_path):
    assert run(tmp_path, {'family': 'schur', 'colour': 'blue'}) == 2
    assert run(tmp_path, {'family': 'genus3'}) == 2


def test_zero_step_is_a_config_error(tmp_path):
    assert run(tmp_path, {'family': 'genus1', 'params': {'h': [0]}}) == 2
    assert not (tmp_path / 'out').exists()


def test_params_of_another_family(tmp_path):
    assert run(tmp_path, {'family': 'schur', 'params': {'beta': [1, 1]}}) == 2


def test_schur_build_writes_tables(tmp_path):
    assert run(tmp_path, dict(SCHUR, mode='build')) == 0
    out = tmp_path / 'out'
    for name in ('L_lambda.csv', 'L_mu.csv', 'manifest.json', 'summary.txt'):
        assert (out / name).exists(), name
    header = (out / 'L_lambda.csv').read_text().splitlines()[0]
    assert header == 'n1,n2,row,col,k1,k2,numerator,denominator'
    manifest = json.loads((out / 'manifest.json').read_text())
    assert manifest['family'] == 'schur'
    assert manifest['operators']['L_mu']['field'] == 'rational'


def test_injected_fault_fails_the_report(tmp_path):
    assert run(tmp_path, SCHUR, '--inject-fault', 'corrupt_coefficient', '--no-timing') == 1
    report = json.loads((tmp_path / 'out' / 'report.json').read_text())
    assert not report['passed']
    eigen = next(c for c in report['checks'] if c['name'] == 'eigen:L_lambda')
    assert not eigen['passed'] and 'wall_time' not in eigen
    assert any(c['name'].startswith('control:') for c in report['checks'])


def test_continuum_fault_needs_an_abelian_family(tmp_path):
    assert run(tmp_path, SCHUR, '--inject-fault', 'continuum_overscaled') == 2


def test_fault_outside_verify_mode(tmp_path):
    assert run(tmp_path, dict(SCHUR, mode='build'), '--inject-fault', 'duplicate_basis') == 2


def test_theta_eval(tmp_path):
    document = {'family': 'genus1', 'mode': 'theta-eval',
                'theta': {'tau': [[[0, 1]]], 'z': [[0], [[0.5, 0.5]]]}}
    assert run(tmp_path, document) == 0
    values = json.loads((tmp_path / 'out' / 'theta.json').read_text())['values']
    assert values[0]['value'][0] == pytest.approx(1.0864348112133080, abs=1e-12)
    assert abs(complex(*values[1]['value'])) < 1e-12


def test_theta_eval_reports_radius_cap_per_point(tmp_path):
    document = {'family': 'genus1', 'mode': 'theta-eval',
                'theta': {'tau': [[[0, 0.05]]], 'z': [[0]], 'max_radius': 1}}
    assert run(tmp_path, document) == 0
    values = json.loads((tmp_path / 'out' / 'theta.json').read_text())['values']
    assert 'error' in values[0] and 'value' not in values[0]


def test_theta_eval_needs_points(tmp_path):
    assert run(tmp_path, {'family': 'genus1', 'mode': 'theta-eval'}) == 2


def test_genus1_sweep_is_deterministic(tmp_path):
    document = {'family': 'genus1', 'mode': 'sweep', 'window': {'lo': [-1], 'hi': [1]},
                'tolerances': {'eigen_points': 4, 'commutator_samples': 1},
                'sweep': {'h': [[0.17], [0]]}}
    config = write_config(tmp_path, document)
    codes = [main(['--config', config, '--out', str(tmp_path / out)]) for out in ('a', 'b')]
    first = (tmp_path / 'a' / 'sweep.json').read_text()
    assert first == (tmp_path / 'b' / 'sweep.json').read_text()
    aggregate = json.loads(first)
    statuses = [point['status'] for point in aggregate['points']]
    assert statuses == ['pass', 'config_error']
    assert codes == [0, 0]
    assert aggregate['status_counts'] == {'pass': 1, 'config_error': 1}
    assert aggregate['pass_rate'] == 0.5


def test_sweep_only_for_abelian_families(tmp_path):
    assert run(tmp_path, dict(SCHUR, mode='sweep', sweep={'h': [[1, 1]]})) == 2
