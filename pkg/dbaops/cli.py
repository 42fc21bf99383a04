"""
Command-line entry point

    dbaops --config run.json [--mode build|verify|theta-eval|sweep] [--out DIR]
           [--seed N] [--jobs N] [--inject-fault NAME] [--no-timing]

Exit codes: 0 success, 1 a check failed, 2 configuration error, 3 build failure.
Verbosity follows the DBA_LOG environment variable (DEBUG, INFO, WARNING, ERROR).
"""
import argparse
import logging
import os
import sys

import numpy as np

from .config import MODES, load_config
from .errors import ConfigError, DBAError, ParameterError, RadiusCapExceeded
from .suites import build_family, run_suite, run_sweep
from .theta import theta_eval_detailed
from .verification import CONTROLS
from .writer import (write_build_files, write_report_files, write_sweep_files,
                     write_theta_file)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_BUILD = 3


def configure_logging():
    name = os.environ.get('DBA_LOG', 'WARNING').strip().upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(format='%(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='dbaops', description='Commuting difference operators from discrete Baker-Akhiezer modules')
    parser.add_argument('--config', required=True, help='JSON run configuration')
    parser.add_argument('--mode', choices=MODES, help='overrides the mode of the config')
    parser.add_argument('--out', help='output directory (overrides the config)')
    parser.add_argument('--seed', type=int, help='overrides the config seed')
    parser.add_argument('--jobs', type=int, help='sweep processes and collocation threads')
    parser.add_argument('--inject-fault', choices=CONTROLS,
                        help='feed a faulty input to the real check (verify mode, testing)')
    parser.add_argument('--no-timing', action='store_true',
                        help='leave wall times out of the report')
    return parser


def _print_paths(paths):
    for path in paths:
        print('\t', path)


def cmd_build(run, args):
    result = build_family(run)
    logger.info('*** WRITE THE COEFFICIENT TABLES')
    _print_paths(write_build_files(result, run.output))
    return EXIT_OK


def cmd_verify(run, args):
    report = run_suite(run, args.inject_fault)
    logger.info('*** WRITE THE REPORT')
    _print_paths(write_report_files(report, run.output, timing=not args.no_timing))
    failing = [c.name for c in report.checks if not c.passed]
    print(f'{report.case_id}: {"PASS" if report.passed else "FAIL"}'
          + (f' ({", ".join(failing)})' if failing else ''))
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def theta_document(request):
    """theta_{a,b}(z, tau) with its error estimate for every requested z"""
    values = []
    for z in request.points:
        entry = {'z': list(z)}
        try:
            result = theta_eval_detailed(np.array(z, dtype=complex), request.sp,
                                         request.characteristic, request.policy)
        except RadiusCapExceeded as err:
            logger.warning(f'theta at z={z}: {err}')
            entry['error'] = str(err)
        else:
            entry.update(value=result.value, error_estimate=result.error_estimate,
                         radius=result.radius, log_abs_value=result.log_abs_value)
        values.append(entry)
    ch = request.characteristic
    return {'tau': request.sp.tau, 'characteristic': {'a': ch.a, 'b': ch.b},
            'target_error': request.policy.target_error, 'values': values}


def cmd_theta_eval(run, args):
    logger.info('*** EVALUATE THETA')
    _print_paths(write_theta_file(theta_document(run.theta), run.output))
    return EXIT_OK


def cmd_sweep(run, args):
    aggregate = run_sweep(run)
    _print_paths(write_sweep_files(aggregate, run.output))
    print(f'{run.family.value} sweep: pass rate {aggregate["pass_rate"]:.3f} '
          f'over {len(aggregate["points"])} point(s)')
    passing = aggregate['status_counts'].get('pass', 0)
    return EXIT_OK if passing or not aggregate['points'] else EXIT_CHECK_FAILED


COMMANDS = {
    'build': cmd_build,
    'verify': cmd_verify,
    'theta-eval': cmd_theta_eval,
    'sweep': cmd_sweep,
}


def main(argv=None):
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        run = load_config(args.config).override(mode=args.mode, output=args.out,
                                                seed=args.seed, jobs=args.jobs)
        if args.inject_fault is not None and run.mode != 'verify':
            raise ConfigError('--inject-fault applies to verify mode only')
        logger.info(f'*** {run.mode.upper()} {run.family.value}')
        return COMMANDS[run.mode](run, args)
    except (ConfigError, ParameterError) as err:
        print(f'config error: {err}', file=sys.stderr)
        return EXIT_CONFIG
    except DBAError as err:
        print(f'build failure: {type(err).__name__}: {err}', file=sys.stderr)
        return EXIT_BUILD


if __name__ == '__main__':
    sys.exit(main())
