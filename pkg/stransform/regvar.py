"""
Regular variation: log-power slowly varying functions, fitters, the Pi-class
test, closed-form tail predictions for free powers, and tail estimation from
an S-transform handle.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import special

from freemult import settings
from .exceptions import (
    AmbiguousRegime, DomainTooSmall, ExponentBelowOne, NonPositiveValue,
    NotRegularlyVarying, RegimeMismatch, ValidationError,
)
from .measures import MuAlphaBeta, Pareto, geometric_grid
from .transforms import hat_transform, log_to_jet, s_transform

logger = logging.getLogger(__name__)


class Regime(str, enum.Enum):
    SLOW = 'slow'
    ALPHA01 = 'alpha01'
    ALPHA1 = 'alpha1_critical'
    FINITE_MEAN = 'finite_mean'
    PI_CLASS = 'pi_class'


class Quality(str, enum.Enum):
    GOOD = 'good'
    DEGRADED = 'degraded'


def iterated_log(x, depth):
    """log applied ``depth`` times"""
    for _ in range(depth):
        x = math.log(x)
    return x


@dataclass(frozen=True)
class LogPowerSV:
    """
    L(x) = constant * prod_k (log^(k) x)^exponents[k-1], with log^(k) the
    k-fold iterated logarithm. Defined for x above ``threshold``.
    """
    constant: float = 1.0
    exponents: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.constant > 0:
            raise ValidationError("slowly varying constant must be positive")
        exponents = [float(a) for a in self.exponents]
        while exponents and exponents[-1] == 0.0:
            exponents.pop()
        object.__setattr__(self, 'exponents', tuple(exponents))
        object.__setattr__(self, 'constant', float(self.constant))

    @property
    def depth(self):
        return len(self.exponents)

    @property
    def threshold(self):
        """exp applied ``depth`` times to 1; 0 for constants"""
        if not self.exponents:
            return 0.0
        x = 1.0
        for _ in range(self.depth):
            x = math.exp(x)
        return x

    @property
    def is_constant(self):
        return not self.exponents

    def log_value_at_log(self, log_x):
        """log L(x) given log x, for arguments that overflow a float"""
        if self.exponents and log_x <= iterated_log(self.threshold, 1):
            raise DomainTooSmall(f"log x = {log_x} below the domain of {self}")
        total = math.log(self.constant)
        level = log_x
        for a in self.exponents:
            total += a * math.log(level)
            level = math.log(level)
        return total

    def __call__(self, x):
        return sv_eval(self, x)

    def to_dict(self):
        return {'constant': self.constant, 'exponents': list(self.exponents)}


def sv_eval(sv, x):
    if x <= sv.threshold or x <= 0:
        raise DomainTooSmall(f"x = {x} not above the threshold {sv.threshold:.6g}")
    return math.exp(sv.log_value_at_log(math.log(x)))


def _pad(a, n):
    return tuple(a) + (0.0,) * (n - len(a))


def sv_mul(first, second):
    n = max(first.depth, second.depth)
    exponents = tuple(x + y for x, y in zip(_pad(first.exponents, n), _pad(second.exponents, n)))
    return LogPowerSV(first.constant * second.constant, exponents)


def sv_pow(sv, r):
    return LogPowerSV(sv.constant ** r, tuple(a * r for a in sv.exponents))


def sv_scale(sv, factor):
    return LogPowerSV(sv.constant * factor, sv.exponents)


def de_bruijn_conjugate(sv):
    """For log-power L the conjugate is asymptotically 1/L"""
    return sv_pow(sv, -1.0)


def de_bruijn_product(sv, log_x):
    """L(x) L#(x L(x)) evaluated from log x"""
    conjugate = de_bruijn_conjugate(sv)
    log_l = sv.log_value_at_log(log_x)
    return math.exp(log_l + conjugate.log_value_at_log(log_x + log_l))


def sv_rescale_argument(sv, r):
    """Log-power form of x -> L(x^r) for r > 0"""
    if not r > 0:
        raise ValidationError("argument power must be positive")
    if sv.is_constant:
        return sv
    return LogPowerSV(sv.constant * r ** sv.exponents[0], sv.exponents)


def sv_shift_log(sv):
    """Log-power form of x -> L(log x)"""
    if sv.is_constant:
        return sv
    return LogPowerSV(sv.constant, (0.0,) + sv.exponents)


def regime_for_index(index, finite_mean=False):
    if index == 0:
        return Regime.SLOW
    if index < 1:
        return Regime.ALPHA01
    if index == 1 and not finite_mean:
        return Regime.ALPHA1
    return Regime.FINITE_MEAN


@dataclass(frozen=True)
class TailAsymptotic:
    """
    Tail mu((x, inf)) ~ x^(-index) sv(x).

    In the ``pi_class`` regime ``pi_reference`` holds the reference function
    of the Pi-class statement the estimate came from.
    """
    index: float
    sv: Optional[LogPowerSV]
    regime: Regime
    pi_reference: Optional[LogPowerSV] = None
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        regime = Regime(self.regime)
        object.__setattr__(self, 'regime', regime)
        index = self.index
        consistent = {
            Regime.SLOW: index == 0,
            Regime.ALPHA01: 0 < index < 1,
            Regime.ALPHA1: index == 1,
            Regime.FINITE_MEAN: index >= 1,
            Regime.PI_CLASS: index >= 1,
        }[regime]
        if not consistent:
            raise ValidationError(f"index {index} inconsistent with regime {regime.value}")

    @property
    def constant(self):
        return self.sv.constant if self.sv is not None else None

    def log_tail_at_log(self, log_x):
        return -self.index * log_x + self.sv.log_value_at_log(log_x)

    def tail(self, x):
        return math.exp(self.log_tail_at_log(math.log(x)))

    def to_dict(self):
        data = {
            'index': self.index,
            'constant': self.constant,
            'regime': self.regime.value,
            'sv': self.sv.to_dict() if self.sv is not None else None,
        }
        if self.pi_reference is not None:
            data['pi_reference'] = self.pi_reference.to_dict()
        if self.details:
            data['details'] = self.details
        return data


@dataclass(frozen=True)
class RegVarFit:
    index: float
    constant: float
    residuals: Tuple[float, ...]
    grid: Tuple[float, ...]
    quality: Quality
    local_slopes: Tuple[float, ...] = ()

    def to_dict(self):
        return {
            'index': self.index,
            'constant': self.constant,
            'quality': self.quality.value,
            'residuals': list(self.residuals),
            'grid': list(self.grid),
        }


def _as_grid(x_grid, min_points=5):
    if isinstance(x_grid, str):
        x_grid = geometric_grid(x_grid)
    grid = np.asarray(x_grid, dtype=float)
    if grid.ndim != 1 or grid.size < min_points:
        raise ValidationError(f"grid needs at least {min_points} points")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be positive and increasing")
    return grid


def _check_geometric(grid):
    ratios = grid[1:] / grid[:-1]
    if np.max(np.abs(ratios / ratios[0] - 1.0)) > 1e-6:
        raise ValidationError("grid must be geometric")


def _log_values(f, grid):
    values = np.array([f(x) for x in grid], dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise NonPositiveValue("function must be finite and positive on the grid")
    return np.log(values)


def fit_log_values(log_x, log_y, grid):
    """Least-squares line through (log x, log y) as a RegVarFit"""
    slope, intercept = np.polyfit(log_x, log_y, 1)
    residuals = log_y - (slope * log_x + intercept)
    local = np.diff(log_y) / np.diff(log_x)
    drift = float(np.max(np.abs(local - slope))) if local.size else 0.0
    quality = Quality.GOOD if drift <= settings.SLOPE_DRIFT_THRESHOLD else Quality.DEGRADED
    return RegVarFit(
        index=float(slope),
        constant=float(math.exp(intercept)),
        residuals=tuple(float(r) for r in residuals),
        grid=tuple(float(x) for x in grid),
        quality=quality,
        local_slopes=tuple(float(s) for s in local),
    )


def fit_reg_var(f, x_grid, sv=None):
    """
    Fit f(x) ~ constant * x^index * sv(x) on a geometric grid.

    The reported index is the signed log-log slope.
    """
    grid = _as_grid(x_grid)
    _check_geometric(grid)
    log_x = np.log(grid)
    log_y = _log_values(f, grid)
    if sv is not None:
        log_y = log_y - np.array([sv.log_value_at_log(lx) for lx in log_x])
    fit = fit_log_values(log_x, log_y, grid)
    if fit.quality is Quality.DEGRADED:
        logger.info("local slopes drift away from %.4g", fit.index)
    return fit


@dataclass(frozen=True)
class PiClassFit:
    constant: float
    estimates: Tuple[float, ...]
    residuals: Tuple[Tuple[float, ...], ...]
    grid: Tuple[float, ...]
    lambdas: Tuple[float, ...]
    flag: Optional[str] = None

    @property
    def in_class(self):
        return self.flag is None

    def to_dict(self):
        return {
            'constant': self.constant,
            'estimates': list(self.estimates),
            'residuals': [list(r) for r in self.residuals],
            'grid': list(self.grid),
            'lambdas': list(self.lambdas),
            'flag': self.flag,
        }


def pi_class_test(g, lref, x_grid, lambdas=None):
    """
    Regress (g(lambda x) - g(x/lambda)) / (2 lref(x)) on log(lambda) through
    the origin at every grid point. The slope at the largest x is the
    reported constant.
    """
    grid = _as_grid(x_grid, min_points=1)
    lambdas = tuple(float(v) for v in (lambdas or settings.PI_LAMBDAS))
    if any(v <= 1 for v in lambdas):
        raise ValidationError("lambdas must exceed 1")
    log_l = np.log(lambdas)
    estimates = []
    residuals = []
    for x in grid:
        ref = lref(x)
        diffs = np.array([(g(v * x) - g(x / v)) / (2.0 * ref) for v in lambdas])
        c = float(np.dot(diffs, log_l) / np.dot(log_l, log_l))
        estimates.append(c)
        residuals.append(tuple(float(r) for r in diffs - c * log_l))
    constant = estimates[-1]
    scale = max(abs(constant), 1e-300)
    drift = max(abs(c - constant) for c in estimates) / scale
    spread = max(max(abs(r) for r in row) for row in residuals) / (scale * log_l.max())
    flag = None
    if not math.isfinite(constant) or drift > settings.PI_DRIFT_THRESHOLD or spread > settings.PI_DRIFT_THRESHOLD:
        flag = 'not_in_pi_class'
        logger.info("Pi-class drift %.3g, residual spread %.3g", drift, spread)
    return PiClassFit(
        constant=constant,
        estimates=tuple(estimates),
        residuals=tuple(residuals),
        grid=tuple(float(x) for x in grid),
        lambdas=lambdas,
        flag=flag,
    )


# Tails of free powers

def phase_index(alpha, t):
    """Tail index of the t-th free power of a law with index alpha in (0, 1)"""
    return alpha / (alpha + t * (1.0 - alpha))


def predict_power_tail(alpha, sv, t, m1=None):
    """
    Tail of mu^(boxtimes t) from the tail x^(-alpha) sv(x) of mu.

    alpha = 0: sv has the form (log x)^(-beta) L(log x) and the tail is
    multiplied by t^beta. 0 < alpha < 1: index and sv follow from the
    conjugate route. alpha = 1 with infinite mean needs a constant sv.
    Finite mean: the index is kept and the constant is multiplied by
    t m1^(alpha (t - 1)).
    """
    if t < 1:
        raise ExponentBelowOne(f"free power t={t} must be >= 1")
    finite = m1 is not None and math.isfinite(m1)
    if t == 1:
        return TailAsymptotic(alpha, sv, regime_for_index(alpha, finite))
    if alpha == 0:
        beta = -sv.exponents[0] if sv.exponents else 0.0
        return TailAsymptotic(0.0, sv_scale(sv, t ** beta), Regime.SLOW)
    if alpha < 1:
        if finite:
            raise RegimeMismatch("laws with index below 1 have infinite mean")
        alpha_t = phase_index(alpha, t)
        r = t * alpha_t / alpha
        factor = (math.pi * alpha / math.sin(math.pi * alpha)) ** r
        factor *= math.sin(math.pi * alpha_t) / (math.pi * alpha_t)
        new_sv = sv_scale(sv_pow(sv_rescale_argument(sv, alpha_t / alpha), r), factor)
        return TailAsymptotic(alpha_t, new_sv, Regime.ALPHA01,
                              details={'exponent_map': r})
    if finite:
        factor = t * m1 ** (alpha * (t - 1))
        return TailAsymptotic(alpha, sv_scale(sv, factor), Regime.FINITE_MEAN)
    if alpha == 1:
        if not sv.is_constant:
            raise RegimeMismatch("the critical line needs a constant slowly varying factor")
        c = sv.constant
        return TailAsymptotic(1.0, LogPowerSV(c ** t * t, (t - 1.0,)), Regime.ALPHA1)
    raise RegimeMismatch(f"index {alpha} > 1 needs the first moment")


def breiman_constant(constant, alpha, m1_nu):
    return constant * m1_nu ** alpha


# Estimation from an S-transform

def _log_s_on_grid(handle, grid, order=0):
    """Log jets of S at w = -1/x"""
    return [handle.log_jet(-1.0 / x, order) for x in grid]


def _top_half(values):
    values = np.asarray(values)
    return values[values.size // 2:]


def _estimate_finite_mean(handle, grid, p=None):
    m1 = handle.m1
    orders = [p] if p else range(1, settings.MAX_DERIVATIVE_ORDER + 1)
    log_x = np.log(grid)
    for order in orders:
        values = np.array([log_to_jet(j)[order] for j in _log_s_on_grid(handle, grid, order)])
        increments = np.diff(values)
        first, last = abs(increments[0]), abs(increments[-1])
        noise = 1e-9 * max(1.0, float(np.max(np.abs(values))))
        if last <= settings.GROWTH_RATIO * first or last <= noise:
            logger.debug("S^(%d) bounded on the grid", order)
            continue
        nonzero = np.abs(increments) > 0
        slope, _ = np.polyfit(log_x[1:][nonzero], np.log(np.abs(increments[nonzero])), 1)
        if slope < -settings.SLOW_SLOPE:
            logger.debug("S^(%d) increments decay like x^%.3g", order, slope)
            continue
        if slope > settings.SLOW_SLOPE:
            # |S^(p)(-1/x)| ~ K x^e with e = p + 1 - alpha
            q = grid[1] / grid[0]
            ks = np.abs(increments) / (grid[1:] ** slope * (1.0 - q ** (-slope)))
            k = float(np.mean(_top_half(ks)))
            alpha = order + 1 - slope
            constant = k * m1 ** (alpha + 1) / (special.gamma(alpha + 1) * special.gamma(order + 1 - alpha))
            logger.info("power growth of S^(%d): index %.4g", order, alpha)
            return TailAsymptotic(float(alpha), LogPowerSV(float(constant)), Regime.FINITE_MEAN,
                                  details={'order': order, 'growth_exponent': float(slope)})
        # logarithmic growth: S^(p)(-1/x) in the Pi class of a constant
        derivative = _derivative_function(handle, order)
        fit = pi_class_test(derivative, lambda x: 1.0, grid[grid.size // 2:])
        constant = abs(fit.constant) * m1 ** (order + 2) / math.factorial(order + 1)
        logger.info("logarithmic growth of S^(%d): integer index %d", order, order + 1)
        return TailAsymptotic(float(order + 1), LogPowerSV(constant), Regime.PI_CLASS,
                              pi_reference=LogPowerSV(1.0),
                              details={'order': order, 'pi_fit': fit.to_dict()})
    raise NotRegularlyVarying("no derivative of S up to order 3 is unbounded")


def _derivative_function(handle, order):
    def derivative(x):
        return log_to_jet(handle.log_jet(-1.0 / x, order))[order]
    return derivative


def _local_slopes(handle, grid):
    log_x = np.log(grid)
    log_s = np.array([j[0] for j in _log_s_on_grid(handle, grid)])
    return log_x, log_s, np.diff(log_s) / np.diff(log_x)


def _estimate_alpha01(handle, grid, log_x, log_s, slopes):
    sigma = float(np.mean(_top_half(slopes)))
    if not sigma < 0:
        raise NotRegularlyVarying("S(-1/x) does not decay like a power")
    alpha = 1.0 / (1.0 - sigma)
    if not 0 < alpha < 1:
        raise NotRegularlyVarying(f"fitted index {alpha:.4g} outside (0, 1)")
    log_sinc = math.log(math.sin(math.pi * alpha) / (math.pi * alpha))
    log_c = alpha * (log_sinc / alpha + (1.0 - 1.0 / alpha) * log_x - log_s)
    constant = float(np.exp(np.mean(_top_half(log_c))))
    return TailAsymptotic(alpha, LogPowerSV(constant), Regime.ALPHA01,
                          details={'slope': sigma})


def _log_f(grid, log_s):
    """log of f(x) = (x - 1) / S(-1/x)"""
    return np.log(grid) + np.log1p(-1.0 / grid) - log_s


def _estimate_alpha1(handle, grid, log_s):
    """Tail L(x)/x with L(f(x)) read from the Pi-class of 1/S(-1/x)"""
    lambdas = np.asarray(settings.PI_LAMBDAS, dtype=float)

    def reciprocal(x):
        return math.exp(-handle.log_value(-1.0 / x))

    fit = pi_class_test(reciprocal, lambda x: 1.0, grid)
    estimates = np.asarray(fit.estimates)
    if np.any(estimates <= 0):
        raise NotRegularlyVarying("1/S(-1/x) is not increasing")
    log_log_f = np.log(_log_f(grid, log_s))
    a, log_c = np.polyfit(_top_half(log_log_f), np.log(_top_half(estimates)), 1)
    if abs(a) < settings.SLOW_SLOPE:
        sv = LogPowerSV(float(np.mean(_top_half(estimates))))
    else:
        sv = LogPowerSV(float(math.exp(log_c)), (float(a),))
    return TailAsymptotic(1.0, sv, Regime.ALPHA1,
                          details={'pi_fit': fit.to_dict(), 'lambdas': list(lambdas)})


def _estimate_slow(handle, grid, log_s):
    """Fit tail(f(x)) = 1/x to constant * (log y)^a with y = f(x)"""
    log_y = _log_f(grid, log_s)
    if np.any(log_y <= 1):
        raise NotRegularlyVarying("f(x) too small for a log-power fit")
    log_tail = -np.log(grid)
    a, log_c = np.polyfit(np.log(log_y), log_tail, 1)
    return TailAsymptotic(0.0, LogPowerSV(float(math.exp(log_c)), (float(a),)), Regime.SLOW,
                          details={'log_f': [float(v) for v in log_y]})


def estimate_tail_from_s(handle, x_grid=None, mode='auto', p=None):
    """
    Tail asymptotics of the law behind ``handle``, read from S(-1/x) on a
    geometric x-grid spanning at least six decades.

    ``mode`` is one of auto, slow, alpha01, alpha1 and finite_mean; ``p``
    fixes the derivative order for finite_mean.
    """
    handle = s_transform(handle)
    grid = _as_grid(settings.DEFAULT_GRID if x_grid is None else x_grid, min_points=5)
    _check_geometric(grid)
    if math.log10(grid[-1] / grid[0]) < 6 - 1e-9:
        raise ValidationError("grid must span at least six decades")
    if handle.lower > -1.0:
        logger.debug("atom at zero does not affect the right tail")
    finite = handle.m1 is not None and math.isfinite(handle.m1)
    if mode == 'finite_mean' or (mode == 'auto' and finite):
        if not finite:
            raise RegimeMismatch("finite_mean needs a finite first moment")
        return _estimate_finite_mean(handle, grid, p)
    log_x, log_s, slopes = _local_slopes(handle, grid)
    if mode == 'alpha01':
        return _estimate_alpha01(handle, grid, log_x, log_s, slopes)
    if mode == 'alpha1':
        return _estimate_alpha1(handle, grid, log_s)
    if mode == 'slow':
        return _estimate_slow(handle, grid, log_s)
    if mode != 'auto':
        raise ValidationError(f"unknown mode '{mode}'")
    if np.all(slopes == 0):
        raise NotRegularlyVarying("S(-1/x) is constant")
    first, last = slopes[0], slopes[-1]
    if last < 0 and first < 0 and last / first > 2:
        logger.info("slopes drift from %.3g to %.3g: slow regime", first, last)
        return _estimate_slow(handle, grid, log_s)
    if abs(last) < settings.SLOW_SLOPE:
        logger.info("S(-1/x) slowly varying: critical regime")
        return _estimate_alpha1(handle, grid, log_s)
    top = _top_half(slopes)
    if np.max(top) < 0 and np.max(np.abs(top - top.mean())) <= settings.SLOPE_DRIFT_THRESHOLD:
        logger.info("stable slope %.4g: index in (0, 1)", top.mean())
        return _estimate_alpha01(handle, grid, log_x, log_s, slopes)
    raise AmbiguousRegime(f"local slopes {first:.3g} .. {last:.3g} fit no regime")


def estimate_left_tail_from_s(handle, x_grid=None, mode='auto', p=None):
    """Tail of mu at 0+, i.e. of the reciprocal law, in the variable 1/x"""
    return estimate_tail_from_s(hat_transform(handle), x_grid, mode, p)


def symmetric_tail(square_tail):
    """Tail of a symmetric law from the tail of its square: half of mu^2((x^2, inf))"""
    sv = square_tail.sv
    if sv is not None:
        sv = sv_scale(sv_rescale_argument(sv, 2.0), 0.5)
    index = 2.0 * square_tail.index
    return TailAsymptotic(index, sv, regime_for_index(index, index > 1))


def declared_tail(mu):
    """Tail asymptotics known in closed form for a measure family, else None"""
    if isinstance(mu, Pareto):
        return TailAsymptotic(mu.alpha, LogPowerSV(1.0), regime_for_index(mu.alpha, mu.alpha > 1))
    if isinstance(mu, MuAlphaBeta) and mu.beta > 0:
        index = 1.0 / (1.0 + mu.beta)
        constant = math.sin(math.pi * index) / (math.pi * index)
        return TailAsymptotic(index, LogPowerSV(constant), Regime.ALPHA01)
    return None
