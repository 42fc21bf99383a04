# Line codelets of the text summaries.
# Each is a Mako string rendered once per item and joined with '\n'
# before it is substituted into a file template.

CheckLine = {}

CheckLine['pass'] = \
"""  [pass] ${'%-44s' % name} ${'%.3e' % residual}  (threshold ${'%.1e' % threshold})"""

CheckLine['fail'] = \
"""  [FAIL] ${'%-44s' % name} ${'%.3e' % residual}  (threshold ${'%.1e' % threshold})"""

# exact checks report the verdict instead of a residual
CheckLine['exact'] = \
"""  [${'pass' if passed else 'FAIL'}] ${'%-44s' % name} ${'exactly zero' if exact_zero else 'nonzero'}"""

SkipLine = \
"""    skipped ${count} evaluation(s), first at ${point}: ${reason}"""

NoteLine = \
"""  note: ${title}"""

OperatorLine = \
"""  ${'%-12s' % name} ${field} ${arity[0]}x${arity[1]}  ${method}  ${len(support)} shift(s)  -> ${file}"""

SweepLine = \
"""  #${'%-3d' % index} ${'%-13s' % status} ${values}${'' if message is None else '  ' + message}"""
