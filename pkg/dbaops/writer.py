import csv
import io
import json
import logging
import os
import tempfile

from mako.template import Template

from dbaops import __path__ as src_path
from .algebra import coefficient_header, coefficient_rows
from .codelets.summary import CheckLine, NoteLine, OperatorLine, SkipLine, SweepLine
from .config import validate_document
from .errors import OutputError
from .verification import jsonable

logger = logging.getLogger(__name__)

templatePath = src_path[0] + '/templates/'


def write_atomic(path, text):
    """
    Write `text` to a temporary file next to `path` and rename it over `path`,
    so readers never see a partial file
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=directory, prefix='.', suffix='.tmp')
    try:
        with os.fdopen(handle, 'w', encoding='utf-8', newline='') as file:
            file.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise
    logger.info(f'wrote {path}')
    return path


def write_json(path, document, schema):
    """Validate against schemas/<schema>.schema.json, then write sorted and indented"""
    document = jsonable(document)
    validate_document(document, schema, OutputError)
    return write_atomic(path, json.dumps(document, indent=2, sort_keys=True) + '\n')


def write_coefficient_table(path, operator, window):
    buffer = io.StringIO()
    table = csv.writer(buffer, lineterminator='\n')
    table.writerow(coefficient_header(operator))
    table.writerows(coefficient_rows(operator, window))
    return write_atomic(path, buffer.getvalue())


def render_codelets(codelet, items, separator='\n'):
    """Render one codelet per item and join them with `separator`"""
    rendered = [Template(codelet).render(**item) for item in items]
    return separator.join(rendered) if rendered else '  (none)'


def render_file(filename, **args):
    template = Template(filename=templatePath + filename)
    return template.render(**args)


###############################################################################
# Per-mode outputs
###############################################################################

def _check_lines(report):
    lines = []
    for check in report.checks:
        if check.exact_zero is not None and check.threshold == 0 \
                and not check.name.startswith('control:'):
            codelet = CheckLine['exact']
        else:
            codelet = CheckLine['pass' if check.passed else 'fail']
        lines.append(Template(codelet).render(
            name=check.name, residual=float(check.max_residual), threshold=float(check.threshold),
            passed=check.passed, exact_zero=check.exact_zero))
        if check.skipped:
            point, reason = check.skipped[0]
            lines.append(Template(SkipLine).render(count=len(check.skipped),
                                                   point=jsonable(point), reason=reason))
    return '\n'.join(lines) if lines else '  (none)'


def write_report_files(report, out, timing=True):
    """report.json and summary.txt of a verify run"""
    paths = [write_json(os.path.join(out, 'report.json'), report.as_dict(timing), 'report')]
    summary = render_file('report.template', case_id=report.case_id, checks=_check_lines(report),
                          notes=render_codelets(NoteLine, report.notes),
                          skipped_fraction=report.skipped_fraction,
                          verdict='PASS' if report.passed else 'FAIL')
    paths.append(write_atomic(os.path.join(out, 'summary.txt'), summary))
    return paths


def write_build_files(result, out):
    """One CSV table per operator, manifest.json and summary.txt of a build run"""
    paths = []
    for name, operator in result.operators.items():
        paths.append(write_coefficient_table(os.path.join(out, f'{name}.csv'), operator,
                                             result.window))
    paths.append(write_json(os.path.join(out, 'manifest.json'), result.manifest, 'manifest'))
    operators = [dict(name=name, **entry) for name, entry in result.manifest['operators'].items()]
    summary = render_file('build.template', family=result.manifest['family'],
                          seed=result.manifest['seed'], lo=list(result.window.lo),
                          hi=list(result.window.hi),
                          operators=render_codelets(OperatorLine, operators),
                          manifest='manifest.json')
    paths.append(write_atomic(os.path.join(out, 'summary.txt'), summary))
    return paths


def write_theta_file(document, out):
    return [write_json(os.path.join(out, 'theta.json'), document, 'theta')]


def write_sweep_files(aggregate, out):
    paths = [write_json(os.path.join(out, 'sweep.json'), aggregate, 'sweep')]
    points = [dict(entry, values=json.dumps(jsonable(entry['values']), sort_keys=True))
              for entry in aggregate['points']]
    summary = render_file('sweep.template', family=aggregate['family'],
                          axes=', '.join(aggregate['axes']), seed=aggregate['seed'],
                          points=render_codelets(SweepLine, points),
                          counts=json.dumps(aggregate['status_counts'], sort_keys=True),
                          pass_rate=aggregate['pass_rate'])
    paths.append(write_atomic(os.path.join(out, 'summary.txt'), summary))
    return paths
