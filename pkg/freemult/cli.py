"""
Command-line front-end.

    python manage.py transform --measure '{"family": "pareto", "params": {"alpha": 2}}' --grid 0:6:7
    python manage.py power --measure m.json --t 2
    python manage.py verify --suite pareto-phase

Exit status: 0 success, 1 tolerance failure, 2 usage error, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import logging
import logging.config
import math
import sys

import numpy as np

from freemult import settings
from stransform.exceptions import FreeMultError, ValidationError
from stransform.forms import dump_measure, load_document, parse_levy_pair, parse_measure
from stransform.free_mult import breiman_predict, psi_of_combination, s_combine
from stransform.id_laws import id_handle, id_tail_predict
from stransform.matrix_mc import dump_samples_csv, hill_fit, product_spectrum, trace_check
from stransform.measures import geometric_grid, moment
from stransform.regvar import (
    LogPowerSV, declared_tail, estimate_tail_from_s, predict_power_tail,
)
from stransform.suites import SUITES, run_suite
from stransform.transforms import NumericSTransform, s_transform

logger = logging.getLogger(__name__)

MODES = ['auto', 'slow', 'alpha01', 'alpha1', 'finite_mean']


def _normalise(value):
    """Round floats to the report format so equal runs give equal bytes"""
    if isinstance(value, dict):
        return {str(k): _normalise(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalise(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if not math.isfinite(value):
            return 'inf' if value > 0 else ('-inf' if value < 0 else 'nan')
        return float(format(value, settings.REPORT_FLOAT_FORMAT))
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def render_report(command, body):
    report = {'schema': settings.REPORT_SCHEMA, 'command': command}
    report.update(body)
    return json.dumps(_normalise(report), sort_keys=True, indent=2) + '\n'


def _write(args, text):
    if args.output:
        with open(args.output, 'w') as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _fmt(value):
    return format(float(value), settings.REPORT_FLOAT_FORMAT)


def _grid(args):
    return geometric_grid(args.grid) if args.grid else None


def _compare(predicted, estimated, index_tol, constant_tol):
    """Comparison block; ``passed`` is False when a tolerance is exceeded"""
    block = {'predicted': predicted.to_dict() if predicted else None,
             'estimated': estimated.to_dict()}
    passed = True
    if predicted is not None:
        index_error = abs(predicted.index - estimated.index)
        block['index_error'] = index_error
        passed = bool(index_error <= index_tol)
        if predicted.constant is not None and estimated.constant is not None:
            constant_error = abs(estimated.constant / predicted.constant - 1.0)
            block['constant_error'] = constant_error
            passed = passed and bool(constant_error <= constant_tol)
    block['passed'] = passed
    return block, passed


def _finite_m1(mu):
    try:
        value = moment(mu, 1).value
    except FreeMultError:
        return None
    return value if math.isfinite(value) else None


def cmd_transform(args):
    mu = parse_measure(args.measure)
    handle = s_transform(mu)
    stream = io.StringIO()
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['x', 'psi', 'S'])
    for x in geometric_grid(args.grid):
        z = -1.0 / x
        if isinstance(handle, NumericSTransform):
            psi = handle.psi(z)
        else:
            psi = psi_of_combination(handle, z)
        writer.writerow([_fmt(x), _fmt(psi), _fmt(handle.value(-1.0 / x))])
    _write(args, stream.getvalue())
    return 0


def cmd_power(args):
    mu = parse_measure(args.measure)
    m1 = _finite_m1(mu)
    tail = declared_tail(mu)
    predicted = None
    if tail is not None:
        predicted = predict_power_tail(tail.index, tail.sv, args.t, m1=m1)
    handle = s_combine([(mu, args.t)])
    estimated = estimate_tail_from_s(handle, _grid(args), args.mode)
    block, passed = _compare(predicted, estimated, args.index_tol, args.constant_tol)
    block.update({'measure': dump_measure(mu), 't': args.t})
    _write(args, render_report('power', block))
    return 0 if passed else 1


def cmd_idtail(args):
    pair = parse_levy_pair(args.pair)
    left = None
    if args.sigma_alpha is not None:
        left = (args.sigma_alpha, LogPowerSV(args.sv_constant, tuple(args.sv_exponents or ())))
    predicted = id_tail_predict(pair, left, limit=args.limit)
    estimated = estimate_tail_from_s(id_handle(pair), _grid(args), args.mode)
    block, passed = _compare(predicted, estimated, args.index_tol, args.constant_tol)
    block['pair'] = pair.to_dict()
    _write(args, render_report('idtail', block))
    return 0 if passed else 1


def cmd_breiman(args):
    mu = parse_measure(args.mu)
    nu = parse_measure(args.nu)
    m1_nu = _finite_m1(nu)
    if m1_nu is None:
        raise ValidationError("nu needs a finite first moment")
    tail = declared_tail(mu)
    if tail is None:
        raise ValidationError(f"no closed-form tail for {mu.family}")
    predicted = breiman_predict(tail.index, tail.sv, m1_nu)
    estimated = estimate_tail_from_s(s_combine([(mu, 1), (nu, 1)]), _grid(args), args.mode)
    block, passed = _compare(predicted, estimated, args.index_tol, args.constant_tol)
    block.update({'mu': dump_measure(mu), 'nu': dump_measure(nu), 'm1_nu': m1_nu})
    _write(args, render_report('breiman', block))
    return 0 if passed else 1


def cmd_mc(args):
    mu = parse_measure(args.measure)
    spectrum = product_spectrum(mu, args.t, args.n, args.reps, args.seed)
    if args.samples_csv:
        with open(args.samples_csv, 'w') as handle:
            dump_samples_csv(spectrum, handle)
    fit = hill_fit(spectrum, args.k)
    tail = declared_tail(mu)
    m1 = _finite_m1(mu)
    predicted = predict_power_tail(tail.index, tail.sv, args.t, m1=m1) if tail is not None else None
    block = {
        'measure': dump_measure(mu),
        't': args.t, 'n': args.n, 'reps': args.reps, 'seed': args.seed, 'k': args.k,
        'hill': {'index': fit.index, 'constant': fit.constant, 'quality': fit.quality.value},
        'predicted': predicted.to_dict() if predicted else None,
    }
    passed = True
    if predicted is not None:
        block['index_error'] = abs(fit.index - predicted.index)
        passed = bool(block['index_error'] <= args.index_tol)
    if m1 is not None and args.reps >= 2:
        trace = trace_check(mu, spectrum, args.n, args.t)
        block['trace'] = trace.to_dict()
        passed = passed and trace.passed()
    block['passed'] = passed
    _write(args, render_report('mc', block))
    return 0 if passed else 1


def cmd_verify(args):
    results = run_suite(args.suite)
    passed = all(r.passed for r in results)
    _write(args, render_report('verify', {
        'suite': args.suite,
        'passed': passed,
        'results': [r.to_dict() for r in results],
    }))
    return 0 if passed else 1


def build_parser():
    parser = argparse.ArgumentParser(prog='freemult', description="S-transform tail toolkit")
    parser.add_argument('--config', help="JSON file whose keys fill unset options")
    parser.add_argument('--output', help="write the report here instead of stdout")
    parser.add_argument('--log-level', default=settings.LOG_LEVEL)
    sub = parser.add_subparsers(dest='command', required=True)

    def estimation_options(p, index_tol=0.02):
        p.add_argument('--grid', default=settings.DEFAULT_GRID, help="a:b:n, n points from 10^a to 10^b")
        p.add_argument('--mode', choices=MODES, default='auto')
        p.add_argument('--index-tol', type=float, default=index_tol)
        p.add_argument('--constant-tol', type=float, default=0.1)

    p = sub.add_parser('transform', help="psi and S on a grid")
    p.add_argument('--measure')
    p.add_argument('--grid', default=settings.DEFAULT_GRID)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser('power', help="tail of a free power, predicted and estimated")
    p.add_argument('--measure')
    p.add_argument('--t', type=float)
    estimation_options(p)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser('idtail', help="tail of an infinitely divisible law")
    p.add_argument('--pair')
    p.add_argument('--sigma-alpha', type=float)
    p.add_argument('--sv-constant', type=float, default=1.0)
    p.add_argument('--sv-exponents', type=float, nargs='*')
    p.add_argument('--limit', type=float)
    estimation_options(p)
    p.set_defaults(func=cmd_idtail)

    p = sub.add_parser('breiman', help="tail of mu boxtimes nu for nu with finite mean")
    p.add_argument('--mu')
    p.add_argument('--nu')
    estimation_options(p)
    p.set_defaults(func=cmd_breiman)

    p = sub.add_parser('mc', help="random matrix cross-check")
    p.add_argument('--measure')
    p.add_argument('--t', type=int)
    p.add_argument('--n', type=int, default=settings.MC_MATRIX_SIZE)
    p.add_argument('--reps', type=int, default=settings.MC_REPS)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--k', type=int, default=settings.MC_HILL_K)
    p.add_argument('--index-tol', type=float, default=0.3)
    p.add_argument('--samples-csv')
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser('verify', help="run a named acceptance scenario")
    p.add_argument('--suite', choices=sorted(SUITES) + ['all'])
    p.set_defaults(func=cmd_verify)
    return parser


REQUIRED = {
    'transform': ['measure'],
    'power': ['measure', 't'],
    'idtail': ['pair'],
    'breiman': ['mu', 'nu'],
    'mc': ['measure', 't'],
    'verify': ['suite'],
}


def _check_required(parser, args):
    missing = [name for name in REQUIRED[args.command] if getattr(args, name, None) is None]
    if missing:
        options = ', '.join('--' + name for name in missing)
        parser.error(f"{args.command}: the following options are required: {options}")
    return args


def _apply_config(parser, argv):
    """Re-parse with defaults taken from --config; required options may come from either"""
    args = parser.parse_args(argv)
    if not args.config:
        return _check_required(parser, args)
    config = load_document(args.config)
    if not isinstance(config, dict):
        raise ValidationError("config must be a JSON object")
    config = {key.replace('-', '_'): value for key, value in config.items()}
    parser.set_defaults(**config)
    for action in parser._subparsers._group_actions:
        for subparser in action.choices.values():
            subparser.set_defaults(**config)
    return _check_required(parser, parser.parse_args(argv))


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        settings.LOGGING['loggers']['stransform']['level'] = args.log_level.upper()
        settings.LOGGING['loggers']['freemult']['level'] = args.log_level.upper()
        logging.config.dictConfig(settings.LOGGING)
        return args.func(args)
    except FreeMultError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ArithmeticError, ValueError) as exc:
        logger.debug("numerical failure", exc_info=True)
        sys.stderr.write(f"error: numerical failure: {exc}\n")
        return 3
