"""
Family check suites, the build step behind them and parameter sweeps
"""
import copy
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import builders, closed_forms
from .algebra import LatticeWindow
from .config import SWEEP_AXES, decode_config
from .errors import ConfigError, DBAError, UnexpectedNullspaceDimension
from .modules import (FamilyTag, OmegaParams, SCHUR_BETA, eigenvalue_function,
                      make_gamma_basis, make_genus1_basis, make_genus2_basis,
                      make_omega_basis, make_schur_basis)
from .verification import (CONTROLS, CheckResult, DuplicatedBasis, VerificationReport,
                           audit_check, audit_coefficients, check_agreement,
                           check_commutator, check_continuum_limit, check_eigen,
                           check_freeness, check_gluing, check_vanishing, control,
                           corrupt_coefficient, jsonable, noncommuting_pair)

logger = logging.getLogger(__name__)

SPECIAL_POINT_RESIDUAL = 1e-10
CONTROL_SAMPLES = 5

# coefficients forced to vanish by the divisor conditions, per direction
VANISHING_ENTRIES = {
    'lambda': [(0, 0, (0, 0)), (0, 1, (0, 0)), (0, 0, (0, 2)), (0, 0, (0, 1)), (0, 1, (0, 1))],
    'mu': [(0, 0, (0, 0)), (0, 1, (0, 0)), (0, 0, (2, 0)), (0, 0, (1, 0)), (0, 1, (1, 0))],
}

# printed Schur coefficients whose formula disagrees with exact collocation
SCHUR_MISPRINTED = ('q12', 'r03')


@dataclass
class BuildResult:
    """Operators of one family with the manifest describing them"""
    family: object
    operators: dict
    window: LatticeWindow
    manifest: dict = field(default_factory=dict)


###############################################################################
# Building
###############################################################################

def make_family(run):
    tag = run.family
    if tag is FamilyTag.GENUS1:
        return make_genus1_basis(run.params)
    if tag is FamilyTag.GENUS2:
        return make_genus2_basis(run.params)
    if tag is FamilyTag.SCHUR:
        return make_schur_basis()
    if tag is FamilyTag.OMEGA:
        return make_omega_basis(run.params)
    return make_gamma_basis(run.params, run.gamma_level)


def params_record(tag, params):
    """JSON description of a parameter record"""
    if tag in (FamilyTag.GENUS1, FamilyTag.GENUS2):
        record = {'tau': params.sp.tau, 'h': params.h, 'x0': params.x0, 'c': params.c,
                  'floor': params.floor, 'target_error': params.tp.target_error,
                  'max_radius': params.tp.max_radius}
        if params.beta is not None:
            record['beta'] = params.beta
        return jsonable(record)
    if tag is FamilyTag.SCHUR:
        return jsonable({'h': [1, 1], 'x0': [0, 0], 'beta': list(SCHUR_BETA)})
    if tag is FamilyTag.OMEGA:
        return jsonable({'gcoef': params.gcoef, 'g1coef': params.g1coef, 'g2coef': params.g2coef,
                         'B': params.B, 'c': params.c, 'Lambda': params.Lambda,
                         'preset': 'printed' if params == OmegaParams.printed() else 'custom'})
    return jsonable({name: getattr(params, name) for name in
                     ('a1', 'b1', 'a2', 'b2', 'P', 'A', 'cvec', 'Lambda', 'fcoef', 'ficoef')})


def _operator_entry(operator):
    meta = {key: value for key, value in operator.meta.items()
            if key not in ('method', 'special_points')}
    return {'file': f'{operator.name}.csv', 'field': operator.field.value,
            'arity': list(operator.arity), 'support': [list(k) for k in operator.support],
            'method': operator.meta.get('method', 'collocation'), 'meta': jsonable(meta)}


def build_family(run):
    """
    Operators of the configured family

    genus1: closed forms; genus2: special points; schur: exact collocation;
    omega: exact collocation, or the printed operators for the printed data;
    gamma: exact collocation.
    """
    tag = run.family
    cfg = run.collocation
    logger.info(f'*** BUILD {tag.value}')
    family = make_family(run)
    special = None
    if tag is FamilyTag.GENUS1:
        L1, L2 = builders.build_genus1_pair(run.params)
        operators = [L1, L2]
        special = L1.meta['special_points']
    elif tag is FamilyTag.GENUS2:
        operators = [builders.build_genus2_special(run.params, direction, cfg, run.newton,
                                                   window=run.window)
                     for direction in (1, 2)]
        special = {op.name: op.meta['special_points'] for op in operators}
    elif tag is FamilyTag.SCHUR:
        operators = list(builders.build_schur_collocation(cfg, run.window))
    elif tag is FamilyTag.OMEGA:
        if run.params == OmegaParams.printed():
            operators = list(builders.build_omega_pair(run.params))
        else:
            operators = list(builders.build_omega_collocation(run.params, cfg, run.window))
    else:
        lam = eigenvalue_function(family, 'lambda')
        operators = [builders.build_collocation(family, lam, builders.gamma_templates(),
                                                run.window, cfg, name='D_lambda')]

    manifest = {'family': tag.value, 'seed': run.seed,
                'params': params_record(tag, run.params),
                'window': {'lo': list(run.window.lo), 'hi': list(run.window.hi)},
                'operators': {op.name: _operator_entry(op) for op in operators}}
    if special is not None:
        manifest['special_points'] = jsonable(special)
    return BuildResult(family, {op.name: op for op in operators}, run.window, manifest)


###############################################################################
# Shared pieces of the suites
###############################################################################

class _Faults:
    """Substitutes the faulty input named by --inject-fault into the real checks"""

    def __init__(self, name):
        self.name = name

    def operator(self, D):
        return corrupt_coefficient(D) if self.name == 'corrupt_coefficient' else D

    def family(self, family):
        return DuplicatedBasis(family) if self.name == 'duplicate_basis' else family

    def pair(self, A, B):
        if self.name == 'noncommuting_pair':
            return noncommuting_pair(A.g, A.field)
        return A, B

    @property
    def power(self):
        return 2 if self.name == 'continuum_overscaled' else 1


def _control_window(window):
    """The first few lattice points of `window`, enough for a control to fail"""
    hi = tuple(min(h, l + 2) for l, h in zip(window.lo, window.hi))
    return LatticeWindow(window.lo, hi)


def _points(run, family, offset=1):
    return family.sample(run.tolerances.eigen_points, run.seed + offset, run.collocation.floor)


def _eigen(report, run, family, D, which, points, faults):
    lam = eigenvalue_function(family, which)
    report.add(check_eigen(faults.operator(D), family, lam, run.window, points,
                           run.tolerances.eigen, name=f'eigen:{D.name}'))


def _commutator(report, run, A, B, faults):
    tol = run.tolerances
    name = f'commutator:{A.name},{B.name}'
    A, B = faults.pair(A, B)
    report.add(check_commutator(A, B, run.window, tol.commutator_samples, tol.commutator, run.seed,
                                name=name))


def _freeness(report, run, family, faults):
    tol = run.tolerances
    report.add(check_freeness(faults.family(family), tol.freeness_k, tol.freeness, run.seed,
                              floor=run.collocation.floor, name=f'freeness:{family.tag.value}'))


def _continuum(run, family, power=1, name='continuum'):
    """Difference quotient of psi_1 along e_1 as h_1 halves"""
    params = run.params
    tol = run.tolerances
    make = make_genus1_basis if params.genus == 1 else make_genus2_basis

    def factory(h):
        step = np.array(params.h)
        step[0] = h
        return make(params.with_h(step))

    P = family.sample(1, run.seed + 7, run.collocation.floor)[0]
    n = (1,) + (0,) * (params.genus - 1)
    return check_continuum_limit(factory, n, P, tol.continuum_h, tol.halvings, 0, power,
                                 tol.continuum_order, name)


def _controls(report, run, family, D, which, points, continuum=False):
    """Negative controls: each passes iff its faulty check fails"""
    tol = run.tolerances
    window = _control_window(run.window)
    lam = eigenvalue_function(family, which)
    report.add(control('corrupt_coefficient',
                       check_eigen(corrupt_coefficient(D), family, lam, window,
                                   points[:CONTROL_SAMPLES], tol.eigen)))
    report.add(control('duplicate_basis',
                       check_freeness(DuplicatedBasis(family), tol.freeness_k, tol.freeness,
                                      run.seed, floor=run.collocation.floor)))
    T1, n1 = noncommuting_pair(family.g, D.field)
    report.add(control('noncommuting_pair',
                       check_commutator(T1, n1, window, 1, tol.commutator, run.seed)))
    if continuum:
        report.add(control('continuum_overscaled',
                           _continuum(run, family, power=2, name='continuum:overscaled')))


def _special_points_check(operators):
    residuals = {}
    for op in operators:
        for key, value in op.meta['special_points']['residuals'].items():
            residuals[f'{op.name}:{key}'] = value
    worst = max(residuals.values(), default=0.0)
    return CheckResult('special_points', worst, SPECIAL_POINT_RESIDUAL,
                       bool(residuals) and worst < SPECIAL_POINT_RESIDUAL, None, 0.0,
                       len(residuals), [], {'residuals': residuals})


###############################################################################
# Suites
###############################################################################

def _genus1_suite(run, report, faults):
    tol = run.tolerances
    built = build_family(run)
    family = built.family
    L1, L2 = built.operators['L1'], built.operators['L2']
    points = _points(run, family)

    report.add(_special_points_check([L1]))
    _eigen(report, run, family, L1, 'lambda', points, faults)
    _eigen(report, run, family, L2, 'mu', points, faults)
    _commutator(report, run, L1, L2, faults)

    templates = builders.genus1_templates()
    for which, L in (('lambda', L1), ('mu', L2)):
        C = builders.build_collocation(family, eigenvalue_function(family, which), templates[which],
                                       run.window, run.collocation, name=f'C_{which}')
        report.add(check_agreement(L, C, run.window, tol.agreement))
        report.add(check_vanishing(C, run.window, [(0, 0, (0,))], tol.vanishing,
                                   name=f'vanishing:C_{which}'))

    _freeness(report, run, family, faults)
    report.add(_continuum(run, family, faults.power))
    plain = _continuum(run, family, power=0, name='continuum:unnormalized')
    report.note('continuum without the 1/h factor', order=plain.details['order'],
                min_order=tol.continuum_order)
    _controls(report, run, family, L1, 'lambda', points, continuum=True)


def _genus2_suite(run, report, faults):
    tol = run.tolerances
    built = build_family(run)
    family = built.family
    L_lambda, L_mu = built.operators['L_lambda'], built.operators['L_mu']
    report.add(_special_points_check([L_lambda, L_mu]))

    templates = builders.genus2_templates()
    for which, L in (('lambda', L_lambda), ('mu', L_mu)):
        C = builders.build_collocation(family, eigenvalue_function(family, which), templates,
                                       run.window, run.collocation, name=f'C_{which}')
        report.add(check_agreement(L, C, run.window, tol.agreement))
        report.add(check_vanishing(C, run.window, VANISHING_ENTRIES[which], tol.vanishing,
                                   name=f'vanishing:{which}'))
    report.note('divisor determinants at n = 0',
                **{op.name: op.meta['vanishing_determinants'] for op in (L_lambda, L_mu)})

    points = _points(run, family)
    _eigen(report, run, family, L_lambda, 'lambda', points, faults)
    _eigen(report, run, family, L_mu, 'mu', points, faults)
    _commutator(report, run, L_lambda, L_mu, faults)
    _freeness(report, run, family, faults)
    report.add(_continuum(run, family, faults.power))
    _controls(report, run, family, L_lambda, 'lambda', points, continuum=True)


def _schur_audits(report, run, L_lambda, L_mu):
    """Every printed Schur coefficient against the exact collocation operators"""
    tol = run.tolerances
    lam_entries = closed_forms.entry_coefficients(closed_forms.SCHUR_LAMBDA_SHAPE)
    mu_entries = closed_forms.entry_coefficients(closed_forms.SCHUR_MU_SHAPE)
    lam_names = [key for key in lam_entries if key != 'q1']

    def audit(corrected):
        lam_table, mu_table = closed_forms.schur_tables(
            lambda n: L_lambda.coefficient((1, 0), n)[1, 0], corrected=corrected)
        return (audit_coefficients(lam_table, L_lambda, run.window, lam_entries, lam_names),
                audit_coefficients(mu_table, L_mu, run.window, mu_entries))

    lam_audit, mu_audit = audit(corrected=True)
    candidate = audit_coefficients(closed_forms.printed_q1_candidate(), L_lambda, run.window,
                                   lam_entries, ['q1'])['q1']
    report.add(audit_check('printed:lambda', dict(lam_audit, q1=candidate), tol.audit_min_points))
    report.add(audit_check('printed:mu', mu_audit, tol.audit_min_points))

    discrepancy = candidate['agree'] != candidate['compared']
    if discrepancy:
        logger.warning(f'printed q1 with p12 read as p11 disagrees with collocation at '
                       f'n={candidate["first_disagreement"]}')
    report.note('q1 with p12 read as p11', discrepancy=discrepancy, **candidate)

    lam_printed, mu_printed = audit(corrected=False)
    misprinted = {f'{which}:{key}': row
                  for which, rows in (('lambda', lam_printed), ('mu', mu_printed))
                  for key, row in rows.items() if row['agree'] != row['compared']}
    report.note('printed coefficients as printed', corrected=list(SCHUR_MISPRINTED),
                disagreeing=sorted(misprinted), **misprinted)


def _schur_suite(run, report, faults):
    built = build_family(run)
    family = built.family
    L_lambda, L_mu = built.operators['L_lambda'], built.operators['L_mu']
    points = _points(run, family)
    _eigen(report, run, family, L_lambda, 'lambda', points, faults)
    _eigen(report, run, family, L_mu, 'mu', points, faults)
    _commutator(report, run, L_lambda, L_mu, faults)
    _freeness(report, run, family, faults)
    _schur_audits(report, run, L_lambda, L_mu)
    _controls(report, run, family, L_lambda, 'lambda', points)


def _printed_omega_note(report, run):
    """Printed Omega operators against the printed data, for the record"""
    printed = OmegaParams.printed()
    family = make_omega_basis(printed)
    window = _control_window(run.window)
    points = family.sample(CONTROL_SAMPLES, run.seed + 3, run.collocation.floor)
    D1, D2 = builders.build_omega_pair(printed)
    content = {}
    for D, which in ((D1, 'lambda1'), (D2, 'lambda2')):
        result = check_eigen(D, family, eigenvalue_function(family, which), window, points)
        content[f'eigen:{which}'] = {'passed': result.passed, 'max_residual': result.max_residual,
                                     'skipped': len(result.skipped)}
    result = check_commutator(D1, D2, window, samples=1)
    content['commutator'] = {'passed': result.passed, 'max_residual': result.max_residual}
    try:
        builders.build_omega_collocation(printed, run.collocation, window)
        content['collocation'] = 'solved'
    except DBAError as err:
        content['collocation'] = f'{type(err).__name__}: {err}'
    report.note('printed operators on the printed data', **content)


def _omega_suite(run, report, faults):
    built = build_family(run)
    family = built.family
    D1, D2 = built.operators['D_lambda1'], built.operators['D_lambda2']
    points = _points(run, family)
    _eigen(report, run, family, D1, 'lambda1', points, faults)
    _eigen(report, run, family, D2, 'lambda2', points, faults)
    _commutator(report, run, D1, D2, faults)
    report.add(check_gluing(family, 20, run.seed, ('lambda1', 'lambda2')))
    _freeness(report, run, family, faults)
    if run.params != OmegaParams.printed():
        _printed_omega_note(report, run)
    _controls(report, run, family, D1, 'lambda1', points)


def _nullspace_check(family, window):
    dimensions = {}
    skipped = []
    for n in window:
        try:
            dimensions[n] = len(family.basis_at(n))
        except UnexpectedNullspaceDimension as err:
            skipped.append((n, str(err)))
    expected = family.expected_dimension
    wrong = [n for n, d in dimensions.items() if d != expected]
    return CheckResult('nullspace', float(len(wrong) + len(skipped)), 0,
                       not wrong and not skipped, not wrong and not skipped, 0.0,
                       len(dimensions), [], {'expected': expected, 'failures': skipped})


def _gamma_suite(run, report, faults):
    built = build_family(run)
    family = built.family
    D = built.operators['D_lambda']
    report.add(_nullspace_check(family, run.window))
    report.add(check_gluing(family, 20, run.seed, ('lambda',)))
    _freeness(report, run, family, faults)
    points = _points(run, family)
    _eigen(report, run, family, D, 'lambda', points, faults)
    _controls(report, run, family, D, 'lambda', points)


SUITES = {
    FamilyTag.GENUS1: _genus1_suite,
    FamilyTag.GENUS2: _genus2_suite,
    FamilyTag.SCHUR: _schur_suite,
    FamilyTag.OMEGA: _omega_suite,
    FamilyTag.GAMMA: _gamma_suite,
}


def run_suite(run, inject_fault=None):
    """
    Full check suite of the configured family

    Parameters
    ----------
    run : RunConfig

    inject_fault : one of CONTROLS or None
        Feed the corresponding faulty input to the real check

    Raises
    ------
    ConfigError
        Unknown fault, or a fault the family has no check for
    BuildError and other DBAError
        The operators could not be built
    """
    if inject_fault is not None:
        if inject_fault not in CONTROLS:
            raise ConfigError(f'unknown fault {inject_fault!r}; choose from {", ".join(CONTROLS)}')
        if inject_fault == 'continuum_overscaled' and \
                run.family not in (FamilyTag.GENUS1, FamilyTag.GENUS2):
            raise ConfigError(f'family {run.family.value} has no continuum-limit check')
    report = VerificationReport(run.case_id)
    logger.info(f'*** VERIFY {run.family.value}')
    SUITES[run.family](run, report, _Faults(inject_fault))
    logger.info(f'{run.case_id}: {"PASS" if report.passed else "FAIL"}')
    return report


###############################################################################
# Sweeps
###############################################################################

def sweep_grid(run):
    """(index, {axis: value}) over the cartesian product of the sweep axes"""
    axes = [axis for axis in SWEEP_AXES if axis in run.sweep]
    for index, combo in enumerate(itertools.product(*(run.sweep[axis] for axis in axes))):
        yield index, dict(zip(axes, combo))


def _sweep_point(task):
    document, index, values = task
    entry = {'index': index, 'values': values, 'status': 'pass', 'passed': False,
             'failing': [], 'residuals': {}, 'message': None}
    try:
        run = decode_config(document)
        report = run_suite(run)
    except ConfigError as err:
        entry.update(status='config_error', message=str(err))
        return entry
    except DBAError as err:
        entry.update(status='build_error', message=f'{type(err).__name__}: {err}')
        return entry
    entry['passed'] = report.passed
    entry['status'] = 'pass' if report.passed else 'fail'
    entry['failing'] = [c.name for c in report.checks if not c.passed]
    entry['residuals'] = {c.name: jsonable(float(c.max_residual)) for c in report.checks
                          if not c.name.startswith('control:') and np.isfinite(c.max_residual)}
    return entry


def _point_document(run, values):
    document = copy.deepcopy(run.raw)
    document['params'] = {**document.get('params', {}), **copy.deepcopy(values)}
    document.update(mode='verify', seed=run.seed, jobs=1)
    document.pop('sweep', None)
    return document


def run_sweep(run):
    """
    Verify every sweep grid point and aggregate the outcomes

    Points that fail to decode or build are recorded with their status;
    timings are left out so the aggregate is reproducible.
    """
    tasks = [(_point_document(run, values), index, values) for index, values in sweep_grid(run)]
    logger.info(f'*** SWEEP {len(tasks)} point(s) on {run.jobs} job(s)')
    if run.jobs > 1:
        with ProcessPoolExecutor(run.jobs) as pool:
            entries = list(pool.map(_sweep_point, tasks))
    else:
        entries = [_sweep_point(task) for task in tasks]

    counts = {}
    worst = {}
    for entry in entries:
        counts[entry['status']] = counts.get(entry['status'], 0) + 1
        for name, value in entry['residuals'].items():
            worst[name] = max(worst.get(name, value), value)
    return {'family': run.family.value, 'seed': run.seed,
            'axes': [axis for axis in SWEEP_AXES if axis in run.sweep],
            'points': entries,
            'pass_rate': counts.get('pass', 0) / len(entries) if entries else 0.0,
            'status_counts': counts, 'worst_residuals': worst}
