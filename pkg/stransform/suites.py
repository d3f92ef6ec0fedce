"""
Named verification scenarios run by ``verify --suite``.

A suite never raises: numerical errors become failed checks, and the
result's ``passed`` flag decides the exit status.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .exceptions import FreeMultError, UnknownTag
from .free_mult import breiman_predict, s_combine
from .id_laws import (
    LevyPair, id_handle, id_tail_predict, sigma_min_closed_form_s, v_eval,
)
from .matrix_mc import hill_fit, product_spectrum, trace_check
from .measures import (
    Atoms, DensityGrid, FreePoisson, Pareto, PointMass, SigmaMinFamily,
    SymmetricWrapper, symmetric_square,
)
from .regvar import (
    LogPowerSV, de_bruijn_product, estimate_left_tail_from_s, estimate_tail_from_s,
    fit_reg_var, pi_class_test, predict_power_tail,
)
from .transforms import (
    NumericSTransform, closed_form_handle, closed_form_s, s_eval, s_transform,
)

logger = logging.getLogger(__name__)

SUITES = {}


def suite(name):
    """Register a scenario under ``name``"""
    def register(func):
        SUITES[name] = func
        return func
    return register


@dataclass
class Check:
    label: str
    value: Optional[float]
    expected: Optional[float]
    tolerance: float
    relative: bool = False
    error: Optional[str] = None

    @property
    def passed(self):
        if self.error is not None or self.value is None:
            return False
        if not math.isfinite(self.value):
            return False
        deviation = abs(self.value - self.expected)
        if self.relative:
            deviation /= abs(self.expected)
        return bool(deviation <= self.tolerance)

    def to_dict(self):
        return {
            'label': self.label,
            'value': self.value,
            'expected': self.expected,
            'tolerance': self.tolerance,
            'relative': self.relative,
            'passed': self.passed,
            'error': self.error,
        }


@dataclass
class SuiteResult:
    name: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self):
        return bool(self.checks) and all(c.passed for c in self.checks)

    def check(self, label, compute, expected, tolerance, relative=False):
        """Record one check; ``compute`` is called lazily so errors are captured"""
        try:
            value = float(compute())
            item = Check(label, value, expected, tolerance, relative)
        except FreeMultError as exc:
            logger.warning("%s: %s", label, exc)
            item = Check(label, None, expected, tolerance, relative, error=f"{type(exc).__name__}: {exc}")
        if not item.passed:
            logger.warning("check failed: %s", label)
        self.checks.append(item)
        return item

    def to_dict(self):
        return {
            'suite': self.name,
            'passed': self.passed,
            'checks': [c.to_dict() for c in self.checks],
        }


def run_suite(name):
    """Results of the named suite, or of every suite for 'all'"""
    if name == 'all':
        return [run_suite(n)[0] for n in SUITES]
    if name not in SUITES:
        raise UnknownTag(f"unknown suite '{name}'")
    result = SuiteResult(name)
    SUITES[name](result)
    return [result]


@suite('roundtrip')
def roundtrip(result):
    for label, mu in [('pareto(2)', Pareto(2.0)), ('pareto(0.5)', Pareto(0.5)),
                      ('free_poisson', FreePoisson())]:
        handle = NumericSTransform(mu)
        for z in (-0.1, -1.0, -10.0):
            result.check(f"chi(psi({z})) for {label}",
                         lambda: handle.chi(handle.psi(z)), z, 1e-9)


@suite('closed-form')
def closed_form(result):
    free_poisson = NumericSTransform(FreePoisson())
    for w in np.linspace(-0.9, -0.1, 9):
        result.check(f"free_poisson S({w:.1f})", lambda: free_poisson.value(w), 1.0 / (1.0 + w), 1e-6)
    for a in (0.5, 2.0, 7.0):
        result.check(f"point_mass({a}) S(-0.5)", lambda: s_eval(PointMass(a), -0.5), 1.0 / a, 1e-12)


@suite('pareto-phase')
def pareto_phase(result):
    grid = np.logspace(8, 16, 9)
    handle = s_combine([(Pareto(0.5), 2)])
    prediction = predict_power_tail(0.5, LogPowerSV(1.0), 2)
    estimate = _capture(result, 'pareto(0.5)^2', lambda: estimate_tail_from_s(handle, grid))
    if estimate is not None:
        result.check("index of pareto(0.5)^2", lambda: estimate.index, 1.0 / 3.0, 0.01)
        result.check("constant of pareto(0.5)^2", lambda: estimate.constant, prediction.constant, 0.05, True)
    square = s_combine([(Pareto(2.0), 2)])
    prediction = predict_power_tail(2.0, LogPowerSV(1.0), 2, m1=2.0)
    estimate = _capture(result, 'pareto(2)^2', lambda: estimate_tail_from_s(square))
    if estimate is not None:
        result.check("index of pareto(2)^2", lambda: estimate.index, 2.0, 0.02)
        result.check("constant of pareto(2)^2", lambda: estimate.constant, prediction.constant, 0.1, True)


@suite('critical-line')
def critical_line(result):
    handle = s_transform(Pareto(1.0))
    square = s_combine([(handle, 2)])
    log_x = 200.0 * math.log(10.0)
    result.check("1/S(-1/x)/log x at 1e200",
                 lambda: math.exp(-handle.log_value(-1e-200)) / log_x, 1.0, 0.05)
    fit = _capture(result, 'pi-class of 1/S', lambda: pi_class_test(
        lambda x: math.exp(-handle.log_value(-1.0 / x)), lambda x: 1.0, [1e12]))
    if fit is not None:
        result.check("pi-class constant of 1/S at 1e12", lambda: fit.constant, 1.0, 0.05)
    fit = _capture(result, 'pi-class of 1/S^2', lambda: pi_class_test(
        lambda x: math.exp(-square.log_value(-1.0 / x)), lambda x: 2.0 * math.log(x), [1e200]))
    if fit is not None:
        result.check("pi-class constant of 1/S^2 against 2 log x at 1e200", lambda: fit.constant, 1.0, 0.05)


@suite('mu-alpha-beta')
def mu_alpha_beta(result):
    estimate = _capture(result, 'mu(0,1)', lambda: estimate_tail_from_s(closed_form_handle('mu_alpha_beta(0,1)')))
    if estimate is not None:
        result.check("index of mu(0,1)", lambda: estimate.index, 0.5, 0.01)
        result.check("constant of mu(0,1)", lambda: estimate.constant, 2.0 / math.pi, 0.02, True)
    left = _capture(result, 'mu(1,0) at 0+',
                    lambda: estimate_left_tail_from_s(closed_form_handle('mu_alpha_beta(1,0)')))
    if left is not None:
        result.check("left index of mu(1,0)", lambda: left.index, 0.5, 0.01)
    for beta in (0.5, 1.0, 2.0):
        handle = closed_form_handle('mu_alpha_beta', (0.0, beta))
        result.check(f"index of mu(0,{beta})",
                     lambda: estimate_tail_from_s(handle).index, 1.0 / (beta + 1.0), 0.02)


@suite('id-example')
def id_example(result):
    pair = LevyPair(0.0, SigmaMinFamily(1.0, 1.0, 1.0))
    for w in (-1.0 + 1e-4, -0.9, -0.5, -0.1, -1e-4):
        result.check(f"v({w}) against the closed form",
                     lambda: v_eval(pair, w), math.log(sigma_min_closed_form_s(1.0, 1.0, 0.0, w)), 1e-8)
    prediction = id_tail_predict(pair)
    estimate = _capture(result, 'sigma_min(1,1,1)', lambda: estimate_tail_from_s(id_handle(pair)))
    if estimate is not None:
        result.check("index of sigma_min(1,1,1)", lambda: estimate.index, 0.5, 0.02)
        result.check("constant of sigma_min(1,1,1)", lambda: estimate.constant, prediction.constant, 0.05, True)
    pair = LevyPair(0.0, SigmaMinFamily(1.0, 1.0, 2.0))
    prediction = id_tail_predict(pair)
    estimate = _capture(result, 'sigma_min(1,1,2)', lambda: estimate_tail_from_s(id_handle(pair)))
    if estimate is not None:
        result.check("index of sigma_min(1,1,2)", lambda: estimate.index, 2.0, 0.02)
        result.check("constant of sigma_min(1,1,2)", lambda: estimate.constant, prediction.constant, 0.1, True)


@suite('breiman')
def breiman(result):
    nu = Atoms(((1.0, 0.5), (2.0, 0.5)))
    handle = s_combine([(Pareto(1.5), 1), (nu, 1)])
    prediction = breiman_predict(1.5, 1.0, 1.5)
    estimate = _capture(result, 'pareto(1.5) x atoms', lambda: estimate_tail_from_s(handle))
    if estimate is not None:
        result.check("index of pareto(1.5) x atoms", lambda: estimate.index, 1.5, 0.02)
        result.check("constant of pareto(1.5) x atoms", lambda: estimate.constant, prediction.constant, 0.1, True)


@suite('monte-carlo')
def monte_carlo(result, n=512, reps=200, seed=20240101):
    mu = Pareto(3.0)
    spectrum = _capture(result, 'product spectrum', lambda: product_spectrum(mu, 2, n, reps, seed))
    if spectrum is None:
        return
    result.check("Hill index of pareto(3)^2", lambda: hill_fit(spectrum, 1000).index, 3.0, 0.3)
    trace = trace_check(mu, spectrum, n, 2)
    result.check("mean eigenvalue in standard errors", lambda: trace.deviation, 0.0, 3.0)


@suite('regvar-toolkit')
def regvar_toolkit(result):
    log_sv = LogPowerSV(1.0, (1.0,))
    for label, sv in [('log', log_sv), ('log*loglog', LogPowerSV(1.0, (1.0, 1.0)))]:
        result.check(f"de Bruijn product for {label}", lambda: de_bruijn_product(sv, 1e4), 1.0, 0.01)
    grid = np.logspace(2, 12, 11)
    fit = fit_reg_var(lambda x: 5.0 * x ** -2, grid)
    result.check("pure power index", lambda: fit.index, -2.0, 1e-9)
    result.check("pure power constant", lambda: fit.constant, 5.0, 1e-9, True)
    fit = fit_reg_var(lambda x: 5.0 * x ** -2 * math.log(x), grid, sv=log_sv)
    result.check("index with log factor", lambda: fit.index, -2.0, 0.01)
    result.check("constant with log factor", lambda: fit.constant, 5.0, 0.02, True)


@suite('symmetric')
def symmetric(result):
    bernoulli = SymmetricWrapper(PointMass(1.0))
    square = symmetric_square(bernoulli)
    for w in np.linspace(-0.9, -0.1, 9):
        result.check(f"|S|^2 at {w:.1f}",
                     lambda: closed_form_s('symmetric_bernoulli', w) ** 2,
                     (1.0 + w) / -w * s_eval(square, w), 1e-9)
    triangle = symmetric_square(SymmetricWrapper(DensityGrid((0.0, 1.0), (2.0, 0.0))))
    result.check("density of the squared triangle at 0.25", lambda: triangle.density(0.25), 1.0, 1e-6)
    pareto = SymmetricWrapper(Pareto(2.0))
    pareto_square = symmetric_square(pareto)
    for x in (2.0, 10.0):
        result.check(f"symmetric tail identity at {x}",
                     lambda: pareto.tail(x), 0.5 * pareto_square.tail(x * x), 1e-12)


def _capture(result, label, compute):
    """Run ``compute``; record a failed check instead of raising"""
    try:
        return compute()
    except FreeMultError as exc:
        logger.warning("%s: %s", label, exc)
        result.checks.append(Check(label, None, None, 0.0, error=f"{type(exc).__name__}: {exc}"))
        return None
