"""
Run configuration: JSON documents validated against the shipped schema and
decoded into parameter records

Complex numbers are written [re, im] and exact rationals "p/q"; plain
integers are exact and plain floats are not.
"""
import dataclasses
import json
import logging
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction

import jsonschema

from dbaops import __path__ as src_path
from .algebra import LatticeWindow
from .builders import CollocationConfig
from .divisors import NewtonConfig
from .errors import ConfigError, ParameterError
from .modules import AbelianDBAParams, FamilyTag, GammaParams, OmegaParams
from .theta import ThetaCharacteristic, TruncationPolicy, validate_siegel

logger = logging.getLogger(__name__)

schemaPath = os.path.join(src_path[0], 'schemas')

MODES = ('build', 'verify', 'theta-eval', 'sweep')
RATIONAL = re.compile(r'^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$')

DEFAULT_WINDOWS = {
    FamilyTag.GENUS1: ((-5,), (5,)),
    FamilyTag.GENUS2: ((-3, -3), (3, 3)),
    FamilyTag.SCHUR: ((0, 0), (8, 8)),
    FamilyTag.OMEGA: ((0, 0), (6, 6)),
    FamilyTag.GAMMA: ((0, 0), (2, 2)),
}

# parameter keys each family understands
FAMILY_KEYS = {
    FamilyTag.GENUS1: {'tau', 'h', 'x0', 'c', 'floor', 'target_error', 'max_radius'},
    FamilyTag.GENUS2: {'tau', 'h', 'x0', 'c', 'beta', 'floor', 'target_error', 'max_radius'},
    FamilyTag.SCHUR: set(),
    FamilyTag.OMEGA: {'preset', 'gcoef', 'g1coef', 'g2coef', 'B', 'c', 'Lambda'},
    FamilyTag.GAMMA: {'preset', 'a1', 'b1', 'a2', 'b2', 'P', 'A', 'cvec', 'Lambda',
                      'fcoef', 'ficoef', 'k'},
}

SWEEP_AXES = ('h', 'x0', 'beta')

# the genus-1 eigen relations are checked at this many sampled z
GENUS1_EIGEN_POINTS = 50


@dataclass(frozen=True)
class Tolerances:
    """
    Verification thresholds and sample counts

    Main attributes
    ---------------
        eigen, commutator, agreement, vanishing : residual thresholds
        freeness : smallest accepted singular value ratio
        continuum_order : smallest accepted fitted order
        eigen_points, commutator_samples, freeness_k : sample counts
        continuum_h, halvings : initial step and number of halvings of the continuum fit
        audit_min_points : lattice points each enforced printed formula must be compared on
    """
    eigen: float = 1e-8
    commutator: float = 1e-6
    freeness: float = 1e-8
    continuum_order: float = 0.9
    agreement: float = 1e-7
    vanishing: float = 1e-8
    eigen_points: int = 20
    commutator_samples: int = 3
    freeness_k: int = 2
    continuum_h: float = 0.1
    halvings: int = 4
    audit_min_points: int = 30

    def __post_init__(self):
        for name in ('eigen', 'commutator', 'freeness', 'agreement', 'vanishing', 'continuum_h'):
            if not getattr(self, name) > 0:
                raise ParameterError(f'tolerance {name} must be positive')
        if min(self.eigen_points, self.commutator_samples, self.freeness_k, self.audit_min_points) < 1:
            raise ParameterError('sample counts must be positive')
        if self.halvings < 2:
            raise ParameterError(f'the continuum fit needs at least 2 halvings, got {self.halvings}')


@dataclass(frozen=True)
class ThetaRequest:
    """Points and accuracy of a theta-eval run"""
    sp: object
    points: tuple
    characteristic: ThetaCharacteristic
    policy: TruncationPolicy


@dataclass(frozen=True)
class RunConfig:
    """
    Decoded run configuration

    Main attributes
    ---------------
        family : FamilyTag
        mode : one of MODES
        params : AbelianDBAParams, OmegaParams, GammaParams or None (Schur)
        window : LatticeWindow
        gamma_level : level k of the Gamma family
        theta : ThetaRequest or None
        sweep : dict axis -> list of raw values
        raw : the validated JSON document
    """
    family: FamilyTag
    mode: str
    params: object
    window: LatticeWindow
    tolerances: Tolerances
    collocation: CollocationConfig
    newton: NewtonConfig
    seed: int = 42
    output: str = 'dbaops-out'
    jobs: int = 1
    gamma_level: int = 1
    theta: ThetaRequest = None
    sweep: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def case_id(self):
        return f'{self.family.value}-seed{self.seed}'

    def override(self, mode=None, output=None, seed=None, jobs=None):
        """Apply command-line overrides; the seed and jobs also reach the collocation settings"""
        changes = {}
        if mode is not None:
            if mode not in MODES:
                raise ConfigError(f'unknown mode {mode!r}')
            changes['mode'] = mode
        if output is not None:
            changes['output'] = output
        if seed is not None:
            changes['seed'] = int(seed)
        if jobs is not None:
            if jobs < 1:
                raise ConfigError(f'--jobs must be positive, got {jobs}')
            changes['jobs'] = int(jobs)
        run = dataclasses.replace(self, **changes)
        collocation = dataclasses.replace(run.collocation, seed=run.seed, jobs=run.jobs)
        run = dataclasses.replace(run, collocation=collocation)
        _check_mode(run)
        return run


###############################################################################
# Schema handling
###############################################################################

def load_schema(name):
    with open(os.path.join(schemaPath, f'{name}.schema.json'), encoding='utf-8') as handle:
        return json.load(handle)


def validate_document(document, name, error=ConfigError):
    """Validate `document` against schemas/<name>.schema.json, raising `error` on violation"""
    try:
        jsonschema.validate(instance=document, schema=load_schema(name))
    except jsonschema.ValidationError as err:
        where = '/'.join(str(p) for p in err.absolute_path) or '<root>'
        raise error(f'{name} document invalid at {where}: {err.message}') from err


###############################################################################
# Value decoding
###############################################################################

def decode_scalar(value):
    """int -> int, "p/q" -> Fraction, float -> float, [re, im] -> complex"""
    if isinstance(value, bool):
        raise ConfigError(f'boolean {value!r} is not a number')
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        match = RATIONAL.match(value)
        if match is None:
            raise ConfigError(f'{value!r} is not a rational "p/q"')
        denominator = int(match.group(2) or 1)
        if denominator == 0:
            raise ConfigError(f'{value!r} has a zero denominator')
        return Fraction(int(match.group(1)), denominator)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        return complex(value[0], value[1])
    raise ConfigError(f'{value!r} is not a scalar')


def decode_vector(value):
    if not isinstance(value, list):
        raise ConfigError(f'{value!r} is not a list')
    return [decode_scalar(x) for x in value]


def decode_matrix(value):
    if not isinstance(value, list) or not value:
        raise ConfigError(f'{value!r} is not a matrix')
    return [decode_vector(row) for row in value]


def _real_or_complex(values):
    return [complex(x) for x in values]


###############################################################################
# Family parameters
###############################################################################

def _abelian_params(tag, params):
    defaults = AbelianDBAParams.genus1_default() if tag is FamilyTag.GENUS1 \
        else AbelianDBAParams.genus2_default()
    values = {}
    if 'tau' in params:
        tau = [_real_or_complex(row) for row in decode_matrix(params['tau'])]
        values['sp'] = validate_siegel(tau)
    for key in ('h', 'x0', 'c', 'beta'):
        if key in params:
            values[key] = _real_or_complex(decode_vector(params[key]))
    if 'target_error' in params or 'max_radius' in params:
        values['tp'] = TruncationPolicy(params.get('target_error', defaults.tp.target_error),
                                        params.get('max_radius', defaults.tp.max_radius))
    if 'floor' in params:
        values['floor'] = float(params['floor'])
    return dataclasses.replace(defaults, **values)


def _omega_params(params):
    preset = params.get('preset', 'generic')
    base = OmegaParams.printed() if preset == 'printed' else OmegaParams.generic()
    explicit = {key: params[key] for key in ('gcoef', 'g1coef', 'g2coef', 'B', 'c', 'Lambda')
                if key in params}
    if not explicit:
        return base
    values = {'gcoef': base.gcoef, 'g1coef': base.g1coef, 'g2coef': base.g2coef,
              'B': base.B, 'c': base.c, 'Lambda': base.Lambda}
    for key, value in explicit.items():
        values[key] = decode_scalar(value) if key in ('B', 'Lambda') else tuple(decode_vector(value))
    return OmegaParams(**values)


def _gamma_params(params):
    base = GammaParams.default()
    if not set(params) - {'preset', 'k'}:
        return base
    values = {name: getattr(base, name) for name in
              ('a1', 'b1', 'a2', 'b2', 'P', 'A', 'cvec', 'Lambda', 'fcoef', 'ficoef')}
    for key in ('a1', 'b1', 'a2', 'b2', 'A', 'Lambda'):
        if key in params:
            values[key] = decode_scalar(params[key])
    if 'cvec' in params:
        values['cvec'] = tuple(decode_vector(params['cvec']))
    for key in ('P', 'fcoef'):
        if key in params:
            values[key] = tuple(tuple(row) for row in decode_matrix(params[key]))
    if 'ficoef' in params:
        values['ficoef'] = tuple(tuple(tuple(row) for row in decode_matrix(fi))
                                 for fi in params['ficoef'])
    return GammaParams(**values)


def decode_params(tag, params):
    """Parameter record of family `tag` from the JSON `params` object"""
    unknown = set(params) - FAMILY_KEYS[tag]
    if unknown:
        raise ConfigError(f'parameters {sorted(unknown)} do not apply to family {tag.value}')
    if tag in (FamilyTag.GENUS1, FamilyTag.GENUS2):
        return _abelian_params(tag, params)
    if tag is FamilyTag.OMEGA:
        return _omega_params(params)
    if tag is FamilyTag.GAMMA:
        return _gamma_params(params)
    return None


def _genus(tag, params):
    if tag is FamilyTag.GENUS1:
        return 1
    if tag is FamilyTag.GAMMA:
        return params.genus
    return 2


def _theta_request(theta, tag, params):
    if 'tau' in theta:
        sp = validate_siegel([_real_or_complex(row) for row in decode_matrix(theta['tau'])])
    elif isinstance(params, AbelianDBAParams):
        sp = params.sp
    else:
        raise ConfigError(f'theta-eval needs theta.tau for family {tag.value}')
    points = tuple(tuple(_real_or_complex(decode_vector(z))) for z in theta['z'])
    for z in points:
        if len(z) != sp.genus:
            raise ConfigError(f'theta point {z} has {len(z)} coordinates, tau has genus {sp.genus}')
    a = theta.get('a', [0] * sp.genus)
    b = theta.get('b', [0] * sp.genus)
    policy = TruncationPolicy(theta.get('target_error', TruncationPolicy().target_error),
                              theta.get('max_radius', TruncationPolicy().max_radius))
    return ThetaRequest(sp, points, ThetaCharacteristic(a, b), policy)


def _check_mode(run):
    if run.mode == 'theta-eval' and run.theta is None:
        raise ConfigError('theta-eval mode needs a theta section with points z')
    if run.mode == 'sweep' and not run.sweep:
        raise ConfigError('sweep mode needs a sweep section with at least one axis')
    if run.sweep and run.family not in (FamilyTag.GENUS1, FamilyTag.GENUS2):
        raise ConfigError(f'sweeps vary h, x0 and beta of the abelian families, not {run.family.value}')


###############################################################################
# Documents
###############################################################################

def decode_config(document):
    """
    RunConfig from a parsed JSON document

    Raises
    ------
    ConfigError
        Schema violations and invalid parameter values
    """
    validate_document(document, 'config')
    try:
        tag = FamilyTag(document['family'])
        params_doc = document.get('params', {})
        params = decode_params(tag, params_doc)
        gamma_level = int(params_doc.get('k', 1))
        genus = _genus(tag, params)

        if 'window' in document:
            window = LatticeWindow(tuple(document['window']['lo']), tuple(document['window']['hi']))
        else:
            window = LatticeWindow(*DEFAULT_WINDOWS[tag])
        if window.genus != genus:
            raise ConfigError(f'window has {window.genus} coordinates, family {tag.value} has {genus}')

        tolerance_doc = dict(document.get('tolerances', {}))
        if tag is FamilyTag.GENUS1:
            tolerance_doc.setdefault('eigen', 1e-9)
            tolerance_doc.setdefault('agreement', 1e-8)
            tolerance_doc.setdefault('vanishing', 1e-10)
            tolerance_doc.setdefault('eigen_points', GENUS1_EIGEN_POINTS)
        tolerances = Tolerances(**tolerance_doc)

        seed = int(document.get('seed', 42))
        jobs = int(document.get('jobs', 1))
        collocation = CollocationConfig(**{'seed': seed, 'jobs': jobs,
                                           **document.get('collocation', {})})
        newton = NewtonConfig(**document.get('newton', {}))
        theta = _theta_request(document['theta'], tag, params) if 'theta' in document else None
        sweep = {axis: list(values) for axis, values in document.get('sweep', {}).items()}
        if tag is FamilyTag.GENUS1 and 'beta' in sweep:
            raise ConfigError('the genus-1 family has no beta to sweep')
    except ParameterError as err:
        raise ConfigError(f'invalid parameters: {err}') from err

    run = RunConfig(tag, document.get('mode', 'verify'), params, window, tolerances, collocation,
                    newton, seed, document.get('output', 'dbaops-out'), jobs, gamma_level, theta,
                    sweep, document)
    _check_mode(run)
    logger.debug(f'config: family {tag.value}, mode {run.mode}, window {window.lo}..{window.hi}')
    return run


def load_config(path):
    """Read, validate and decode a JSON config file"""
    try:
        with open(path, encoding='utf-8') as handle:
            document = json.load(handle)
    except OSError as err:
        raise ConfigError(f'cannot read config {path}: {err}') from err
    except json.JSONDecodeError as err:
        raise ConfigError(f'config {path} is not valid JSON: {err}') from err
    return decode_config(document)
