"""
Checks of constructed operators: eigen relations, commutators, freeness,
the continuum limit of the shift action, gluing identities and printed
coefficient audits, plus the fault-injection controls that keep them honest
"""
import logging
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import linalg

from .algebra import (DifferenceOperator, LatticeFunction, ScalarField,
                      add_index, apply, commutator, is_zero_on_window)
from .errors import ParameterError, PoleHit
from .exact import exact_rank
from .modules import BasisFamily, eigenvalue_function

logger = logging.getLogger(__name__)

# a report fails once this share of its evaluations is skipped
MAX_SKIPPED_FRACTION = 0.2
CORRUPTION = 1e-3
CONTINUUM_MIN_ORDER = 0.9

CONTROLS = ('corrupt_coefficient', 'duplicate_basis', 'noncommuting_pair', 'continuum_overscaled')


@dataclass
class CheckResult:
    """
    One verification entry

    Main attributes
    ---------------
        max_residual : largest (normalized) residual seen
        exact_zero : True/False for exact checks, None for float checks
        evaluated, skipped : evaluation count and (point, reason) pairs
    """
    name: str
    max_residual: float
    threshold: float
    passed: bool
    exact_zero: object = None
    wall_time: float = 0.0
    evaluated: int = 0
    skipped: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def as_dict(self, timing=True):
        entry = {
            'name': self.name,
            'max_residual': jsonable(float(self.max_residual)),
            'exact_zero': self.exact_zero,
            'threshold': float(self.threshold),
            'passed': bool(self.passed),
            'evaluated': int(self.evaluated),
            'skipped': [{'point': jsonable(point), 'reason': reason} for point, reason in self.skipped],
            'details': jsonable(self.details),
        }
        if timing:
            entry['wall_time'] = float(self.wall_time)
        return entry


@dataclass
class VerificationReport:
    """
    Outcome of a check suite

    Passes iff every check passes and fewer than 20% of the evaluations
    were skipped. Notes are informational and never decide the verdict.
    """
    case_id: str
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, check):
        self.checks.append(check)
        level = logging.INFO if check.passed else logging.WARNING
        logger.log(level, f'{self.case_id}: {check.name} '
                          f'{"pass" if check.passed else "FAIL"} (residual {check.max_residual:.3e})')
        return check

    def note(self, title, **content):
        self.notes.append({'title': title, **jsonable(content)})

    @property
    def skipped_fraction(self):
        skipped = sum(len(c.skipped) for c in self.checks)
        total = skipped + sum(c.evaluated for c in self.checks)
        return skipped / total if total else 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks) and self.skipped_fraction < MAX_SKIPPED_FRACTION

    def as_dict(self, timing=True):
        return {
            'case_id': self.case_id,
            'passed': self.passed,
            'skipped_fraction': self.skipped_fraction,
            'checks': [c.as_dict(timing) for c in self.checks],
            'notes': self.notes,
        }


def jsonable(value):
    """JSON-ready copy: rationals as "p/q", complex numbers as [re, im]"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, Fraction):
        return f'{value.numerator}/{value.denominator}'
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if np.isnan(value):
            return None
        # JSON has no infinities
        return float(np.clip(value, -sys.float_info.max, sys.float_info.max))
    return value


@contextmanager
def _timed(holder):
    start = time.perf_counter()
    yield
    holder.append(time.perf_counter() - start)


###############################################################################
# Eigen relation
###############################################################################

def _family_columns(family, j, n, shifts, points):
    """psi_j(n + k, P) for every shift and point, None where undefined"""
    try:
        return list(np.asarray(family.values(j, n, shifts, points)).T)
    except PoleHit:
        columns = []
        for P in points:
            try:
                columns.append(np.asarray(family.values(j, n, shifts, [P]))[:, 0])
            except PoleHit:
                columns.append(None)
        return columns


def check_eigen(D, family, lam, window, points, tol=1e-8, name=None):
    """
    max over n, P of |D Psi - lambda Psi| / max(1, |lambda Psi|, largest |C_k psi(n+k)|)

    Exact operators must give exactly zero. Poles are recorded as skips.
    """
    name = name or f'eigen:{D.name}'
    exact = D.field.exact
    tol = 0 if exact else tol
    elapsed = []
    skipped = []
    evaluated = 0
    worst = 0.0
    exact_zero = True
    shifts = sorted(set(D.support) | {(0,) * D.g})
    zero = shifts.index((0,) * D.g)

    with _timed(elapsed):
        lam_values = []
        usable = []
        for P in points:
            try:
                lam_values.append(lam(P))
                usable.append(P)
            except PoleHit as err:
                skipped.append((P, str(err)))
        for n in window:
            try:
                coefficients = {k: D.terms[k](n) for k in D.support}
            except PoleHit as err:
                skipped.append((n, str(err)))
                continue
            columns = [_family_columns(family, j, n, shifts, usable) for j in range(family.rank)]
            for s, lam_value in enumerate(lam_values):
                if any(columns[j][s] is None for j in range(family.rank)):
                    skipped.append((n, f'basis undefined at sample {s}'))
                    continue
                psi = {k: np.array([columns[j][s][a] for j in range(family.rank)], dtype=object
                                   if exact else complex) for a, k in enumerate(shifts)}
                target = lam_value * psi[shifts[zero]]
                total = D.field.zeros(D.arity[0])
                largest = 0.0
                for k, matrix in coefficients.items():
                    term = matrix @ psi[k]
                    total = total + term
                    largest = max(largest, float(np.max(np.abs(term.astype(complex)))))
                difference = total - target
                magnitude = float(np.max(np.abs(difference.astype(complex))))
                if exact and any(x != 0 for x in difference):
                    exact_zero = False
                scale = max(1.0, float(np.max(np.abs(target.astype(complex)))), largest)
                worst = max(worst, magnitude / scale)
                evaluated += 1
    passed = exact_zero if exact else worst <= tol
    return CheckResult(name, worst, tol, bool(passed and evaluated > 0),
                       exact_zero if exact else None, elapsed[0], evaluated, skipped)


###############################################################################
# Commutators
###############################################################################

def _random_vector_function(g, arity, field, seed):
    memo = {}

    def evaluate(n):
        n = tuple(n)
        if n not in memo:
            # one generator per point keeps values independent of the visiting order
            local = np.random.default_rng([seed, *[k + 2 ** 20 for k in n]])
            if field.exact:
                memo[n] = np.array([Fraction(int(x)) for x in local.integers(-9, 10, arity)],
                                   dtype=object)
            else:
                radius = np.sqrt(local.random(arity))
                angle = 2 * np.pi * local.random(arity)
                memo[n] = radius * np.exp(1j * angle)
        return memo[n]
    return evaluate


def _apply_twice(outer, inner, phi, window):
    inner_window = window.dilated(outer.support)
    first = apply(inner, phi, inner_window, skip_poles=True)
    second = apply(outer, first, window, skip_poles=True)
    return second, first.skipped + second.skipped


def check_commutator(A, B, window, samples=3, tol=1e-6, seed=42, name=None):
    """
    [A, B] = 0 at coefficient level and on `samples` random lattice vector functions

    Float operators are first scaled so their largest window coefficient has
    magnitude 1; the tolerance is then absolute. Exact operators need exact zeros.
    """
    name = name or f'commutator:{A.name},{B.name}'
    exact = A.field.exact
    tol = 0 if exact else tol
    elapsed = []
    with _timed(elapsed):
        if not exact:
            A, B = A.normalized(window), B.normalized(window)
        coefficient = is_zero_on_window(commutator(A, B), window, tol)
        application = Fraction(0) if exact else 0.0
        skipped = list(coefficient.skipped)
        evaluated = coefficient.evaluated
        for index in range(samples):
            phi = _random_vector_function(A.g, A.arity[1], A.field, seed + index)
            ab, missed_ab = _apply_twice(A, B, phi, window)
            ba, missed_ba = _apply_twice(B, A, phi, window)
            skipped.extend(missed_ab + missed_ba)
            for n in window:
                if n in ab and n in ba:
                    evaluated += 1
                    application = max(application, A.field.magnitude(ab[n] - ba[n]))
    worst = max(float(coefficient.max_residual), float(application))
    if exact:
        exact_zero = coefficient.is_zero and application == 0
        passed = exact_zero
    else:
        exact_zero = None
        passed = coefficient.is_zero and application <= tol
    return CheckResult(name, worst, tol, bool(passed), exact_zero, elapsed[0], evaluated,
                       _dedupe(skipped),
                       {'coefficient_level': float(coefficient.max_residual),
                        'application_level': float(application)})


def _dedupe(skipped):
    seen = set()
    result = []
    for point, reason in skipped:
        key = (tuple(point) if isinstance(point, (tuple, list)) else repr(point), reason)
        if key not in seen:
            seen.add(key)
            result.append((point, reason))
    return result


###############################################################################
# Freeness
###############################################################################

class DuplicatedBasis(BasisFamily):
    """The family with every psi_j replaced by psi_1 (at least two copies), a rank-deficient control"""

    def __init__(self, base):
        super().__init__(max(base.rank, 2), base.g, base.field, base.point_dim)
        self.base = base
        self.tag = base.tag

    def values(self, j, n, shifts, points):
        return self.base.values(0, n, shifts, points)

    def draw(self, rng):
        return self.base.draw(rng)

    def denominator_magnitudes(self, P):
        return self.base.denominator_magnitudes(P)


def check_freeness(family, k_max=2, svd_tol=1e-8, seed=42, n0=None, floor=1e-3, name=None):
    """
    Rank of the evaluation matrix of {T^m psi_j : 0 <= m_i < k} for k = 1..k_max

    Float families pass when sigma_min/sigma_max > svd_tol, exact families
    when the exact rank equals the column count.
    """
    name = name or f'freeness:{family.tag.value}'
    n0 = tuple(n0 or (0,) * family.g)
    elapsed = []
    ratios = {}
    passed = True
    worst = 0.0
    with _timed(elapsed):
        for k in range(1, k_max + 1):
            shifts = [tuple(m) for m in np.ndindex(*([k] * family.g))]
            columns = family.rank * len(shifts)
            points = family.sample(max(2 * columns, columns + 4), seed + k, floor)
            blocks = [np.asarray(family.values(j, n0, shifts, points)) for j in range(family.rank)]
            matrix = np.concatenate(blocks, axis=0).T
            if family.field.exact:
                rank = exact_rank(matrix.tolist())
                ratios[k] = f'{rank}/{columns}'
                ok = rank == columns
                worst = max(worst, float(columns - rank))
            else:
                singular = linalg.svdvals(matrix.astype(complex))
                ratio = float(singular[-1] / singular[0]) if singular[0] > 0 else 0.0
                ratios[k] = ratio
                ok = ratio > svd_tol
                worst = max(worst, 1.0 - ratio)
            passed = passed and ok
    exact_zero = passed if family.field.exact else None
    return CheckResult(name, worst, 0 if family.field.exact else svd_tol, bool(passed), exact_zero,
                       elapsed[0], k_max, [], {'ratios': ratios})


###############################################################################
# Continuum limit
###############################################################################

def continuum_differences(factory, n, P, h, halvings=4, direction=0, power=1):
    """
    Delta(h) = (psi_h(n + e_i) - psi_h(n)) / h^power along h, h/2, ..., h/2^halvings
    """
    n = tuple(n)
    step = add_index(n, tuple(1 if i == direction else 0 for i in range(len(n))))
    steps = [h / 2 ** i for i in range(halvings + 1)]
    deltas = []
    for value in steps:
        family = factory(value)
        deltas.append((family.eval(0, step, P) - family.eval(0, n, P)) / value ** power)
    return np.array(steps), np.array(deltas, dtype=complex)


def fitted_order(steps, deltas):
    """Slope of log|Delta(h) - Delta(h/2)| against log h"""
    differences = np.abs(np.diff(deltas))
    if np.any(differences == 0):
        return np.inf
    slope, _ = np.polyfit(np.log(np.abs(steps[:-1])), np.log(differences), 1)
    return float(slope)


def check_continuum_limit(factory, n, P, h, halvings=4, direction=0, power=1,
                          min_order=CONTINUUM_MIN_ORDER, name=None):
    """
    First-order convergence of the difference quotient of the shift action

    Parameters
    ----------
    factory : callable h -> BasisFamily
        The family built with step h in the tested direction

    power : int
        Exponent of h in the quotient (1 for the difference quotient)
    """
    if halvings < 2:
        raise ParameterError(f'an order fit needs at least 2 halvings, got {halvings}')
    name = name or 'continuum'
    elapsed = []
    skipped = []
    order = -np.inf
    with _timed(elapsed):
        try:
            steps, deltas = continuum_differences(factory, n, P, h, halvings, direction, power)
            order = fitted_order(steps, deltas)
        except PoleHit as err:
            skipped.append((P, str(err)))
    passed = bool(not skipped and order >= min_order)
    return CheckResult(name, float(order), min_order, passed, None, elapsed[0],
                       0 if skipped else halvings + 1, skipped, {'order': float(order)})


###############################################################################
# Gluing identities
###############################################################################

def _gluing_parameters(family, count, seed):
    rng = np.random.default_rng(seed)
    dim = family.point_dim - 2
    for _ in range(count):
        yield tuple(family._rational(rng, -9, 9, 5) for _ in range(dim))


GLUING_LATTICE = ((0, 0), (1, 0), (0, 1), (2, -1), (-1, 3))


def check_gluing(family, count=20, seed=42, eigenvalues=(), name=None):
    """
    psi_j(n, first) - Lambda psi_j(n, second) and lambda(first) - lambda(second)
    at `count` rational gluing parameters
    """
    name = name or f'gluing:{family.tag.value}'
    exact = family.field.exact
    lambdas = [eigenvalue_function(family, which) for which in eigenvalues]
    elapsed = []
    skipped = []
    evaluated = 0
    worst = 0.0
    all_zero = True
    with _timed(elapsed):
        for t in _gluing_parameters(family, count, seed):
            first, second = family.glued_points(t)
            residuals = []
            for j in range(family.rank):
                for n in GLUING_LATTICE:
                    n = n[:family.g] + (0,) * max(0, family.g - len(n))
                    try:
                        residuals.append(family.gluing_residual(j, n, t))
                    except PoleHit as err:
                        skipped.append((t, str(err)))
            for lam in lambdas:
                try:
                    residuals.append(lam(first) - lam(second))
                except PoleHit as err:
                    skipped.append((t, str(err)))
            for r in residuals:
                evaluated += 1
                worst = max(worst, float(abs(r)))
                if r != 0:
                    all_zero = False
    tol = 0 if exact else 1e-10
    passed = all_zero if exact else worst <= tol
    return CheckResult(name, worst, tol, bool(passed and evaluated > 0),
                       all_zero if exact else None, elapsed[0], evaluated, skipped)


###############################################################################
# Printed coefficient audits
###############################################################################

def audit_coefficients(printed, reference, window, entries, names=None):
    """
    Compare printed coefficients with the entries of a reference operator

    Parameters
    ----------
    printed : FormulaTable

    reference : DifferenceOperator

    entries : dict name -> (row, col, shift)

    Returns
    -------
    dict name -> {'agree', 'compared', 'poles', 'first_disagreement', 'max_difference'}
    """
    exact = reference.field.exact
    results = {}
    for key in names or entries:
        i, j, shift = entries[key]
        agree = compared = poles = 0
        first = None
        largest = 0.0
        for n in window:
            try:
                mine = printed.value(key, n)
                theirs = reference.coefficient(shift, n)[i, j]
            except PoleHit:
                poles += 1
                continue
            compared += 1
            difference = mine - theirs
            largest = max(largest, float(abs(difference)))
            same = difference == 0 if exact else abs(difference) <= 1e-8 * max(1.0, abs(theirs))
            if same:
                agree += 1
            elif first is None:
                first = list(n)
        results[key] = {'agree': agree, 'compared': compared, 'poles': poles,
                        'first_disagreement': first, 'max_difference': largest}
    return results


def audit_check(name, audit, min_points=30):
    """Enforced audit: every compared point agrees and enough points were compared"""
    failing = {key: row for key, row in audit.items()
               if row['agree'] != row['compared'] or row['compared'] < min_points}
    worst = max((row['max_difference'] for row in audit.values()), default=0.0)
    evaluated = sum(row['compared'] for row in audit.values())
    return CheckResult(name, worst, 0, not failing, not failing, 0.0, evaluated, [],
                       {'coefficients': audit, 'failing': sorted(failing)})


###############################################################################
# Fault injection
###############################################################################

def corrupt_coefficient(D, amount=CORRUPTION):
    """D with `amount` added to entry (0, 0) of its first term"""
    first = D.support[0]
    bump = D.field.zeros(D.arity)
    bump[0, 0] = D.field.scalar(Fraction(1, 1000) if D.field.exact else amount)
    constant = LatticeFunction.constant(bump, D.g, D.field, D.arity, name='fault')
    return DifferenceOperator(list(D.terms.items()) + [(first, constant)], D.g, D.field,
                              D.arity, name=f'{D.name}+fault', meta=D.meta)


def noncommuting_pair(g, field=ScalarField.EXACT_RATIONAL):
    """T_1 and multiplication by n_1, whose commutator is T_1"""
    e1 = tuple(1 if i == 0 else 0 for i in range(g))
    shift = DifferenceOperator.shift(e1, field, name='T1')
    n1 = LatticeFunction(lambda n: n[0], g, field, name='n1')
    return shift, DifferenceOperator.multiplication(n1, name='n1')


def control(name, faulty):
    """Control entry that passes iff the faulty check failed"""
    return CheckResult(f'control:{name}', faulty.max_residual, faulty.threshold, not faulty.passed,
                       faulty.exact_zero, faulty.wall_time, faulty.evaluated, [],
                       {'faulty_check': faulty.name, 'faulty_passed': faulty.passed})


###############################################################################
# Cross-method agreement
###############################################################################

def check_agreement(A, B, window, tol=1e-7, name=None):
    """
    Entrywise agreement of two operators over the union of their supports

    Float differences are relative to max(1, |B coefficient|); exact ones must vanish.
    """
    name = name or f'agreement:{A.name},{B.name}'
    exact = A.field.exact and B.field.exact
    if not exact:
        A, B = A.to_complex(), B.to_complex()
    tol = 0 if exact else tol
    shifts = sorted(set(A.support) | set(B.support))
    elapsed = []
    skipped = []
    evaluated = 0
    worst = 0.0
    with _timed(elapsed):
        for n in window:
            try:
                pairs = [(A.coefficient(k, n), B.coefficient(k, n)) for k in shifts]
            except PoleHit as err:
                skipped.append((n, str(err)))
                continue
            evaluated += 1
            for mine, theirs in pairs:
                difference = np.abs((mine - theirs).astype(complex))
                scale = np.maximum(1.0, np.abs(theirs.astype(complex)))
                worst = max(worst, float(np.max(difference / scale)))
    passed = worst == 0 if exact else worst <= tol
    return CheckResult(name, worst, tol, bool(passed and evaluated > 0),
                       bool(worst == 0) if exact else None, elapsed[0], evaluated, skipped)


def check_vanishing(D, window, entries, tol=1e-8, name=None):
    """
    Coefficients at `entries` [(row, col, shift)] are negligible relative to
    the largest coefficient of D at the same n
    """
    name = name or f'vanishing:{D.name}'
    elapsed = []
    skipped = []
    evaluated = 0
    worst = 0.0
    with _timed(elapsed):
        for n in window:
            try:
                largest = max(float(D.field.magnitude(f(n))) for f in D.terms.values())
                values = [D.coefficient(shift, n)[i, j] for i, j, shift in entries]
            except PoleHit as err:
                skipped.append((n, str(err)))
                continue
            evaluated += 1
            if largest > 0:
                worst = max(worst, max(float(abs(v)) for v in values) / largest)
    return CheckResult(name, worst, tol, bool(worst <= tol and evaluated > 0), None,
                       elapsed[0], evaluated, skipped,
                       {'entries': [[i, j, list(shift)] for i, j, shift in entries]})
