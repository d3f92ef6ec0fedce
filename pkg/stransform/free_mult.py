"""
Free multiplicative convolution on the S-transform side.

S_{mu boxtimes nu} = S_mu S_nu and S_{mu^(boxtimes t)} = S_mu^t, so combined
handles add log jets.
"""

import logging
import math

from scipy import optimize

from freemult import settings
from .exceptions import ExponentBelowOne, NoBracket, OutOfRange, ValidationError
from .regvar import LogPowerSV, TailAsymptotic, breiman_constant, regime_for_index
from .transforms import STransformHandle, s_transform

logger = logging.getLogger(__name__)


def _moment_product(values, exponents):
    if any(v is None for v in values):
        return None
    result = 1.0
    for v, t in zip(values, exponents):
        if math.isinf(v):
            return math.inf
        result *= v ** t
    return result


class ProductSTransform(STransformHandle):
    """S(w) = prod S_i(w)^t_i on the intersection of the part domains"""

    def __init__(self, parts):
        merged = []
        for handle, t in parts:
            if isinstance(handle, ProductSTransform):
                merged.extend((h, s * t) for h, s in handle.parts)
            else:
                merged.append((handle, t))
        # equal handles add their exponents
        combined = {}
        order = []
        for handle, t in merged:
            key = id(handle)
            if key not in combined:
                combined[key] = [handle, 0.0]
                order.append(key)
            combined[key][1] += t
        self.parts = tuple((combined[k][0], combined[k][1]) for k in order)
        handles = [h for h, _ in self.parts]
        exponents = [t for _, t in self.parts]
        self.lower = max(h.lower for h in handles)
        self.m1 = _moment_product([h.m1 for h in handles], exponents)
        self.m_minus1 = _moment_product([h.m_minus1 for h in handles], exponents)
        self.source = tuple((h.source, t) for h, t in self.parts)

    def _log_jet(self, w, order):
        total = [0.0] * (order + 1)
        for handle, t in self.parts:
            for k, value in enumerate(handle.log_jet(w, order)):
                total[k] += t * value
        return total


def s_combine(parts):
    """
    Handle for prod S_i^t_i from (handle or measure, t) pairs with every t >= 1.

    A single part with t = 1 gives back its own handle.
    """
    parts = list(parts)
    if not parts:
        raise ValidationError("s_combine needs at least one part")
    resolved = []
    for source, t in parts:
        t = float(t)
        if t < 1:
            raise ExponentBelowOne(f"exponent {t} is below 1")
        resolved.append((s_transform(source), t))
    if len(resolved) == 1 and resolved[0][1] == 1.0:
        return resolved[0][0]
    return ProductSTransform(resolved)


def chi_of_handle(handle, w):
    """chi(w) = w S(w) / (1 + w)"""
    return w * handle.value(w) / (1.0 + w)


def psi_of_combination(handle, z):
    """
    w = psi(z) for the law behind ``handle``, found by solving
    w S(w) / (1 + w) = z in q = log(-w).
    """
    if not z < 0:
        raise OutOfRange("psi is evaluated at z < 0")
    handle = s_transform(handle)
    target = math.log(-z)
    q_max = math.log(-handle.lower)

    def residual(q):
        w = -math.exp(q)
        if w <= handle.lower:
            return math.inf
        return q + handle.log_value(w) - math.log1p(w) - target

    if handle.m1 is not None and math.isfinite(handle.m1) and handle.m1 > 0:
        start = target + math.log(handle.m1)
    else:
        start = target
    start = min(start, q_max - 1.0)
    lo, hi = start - 1.0, min(start + 1.0, 0.5 * (start + q_max))
    f_lo, f_hi = residual(lo), residual(hi)
    step = 1.0
    for _ in range(settings.BRACKET_MAX_STEPS):
        if f_lo <= 0 <= f_hi:
            break
        if f_lo > 0:
            step *= 2.0
            lo = max(lo - step, -1400.0)
            f_lo = residual(lo)
        if f_hi < 0:
            hi = 0.5 * (hi + q_max)
            f_hi = residual(hi)
    if not f_lo <= 0 <= f_hi:
        raise NoBracket(f"chi of the combined law does not reach z={z}")
    q = optimize.brentq(residual, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)
    return -math.exp(q)


def breiman_predict(alpha, tail_constant, m1_nu):
    """Tail of mu boxtimes nu when mu has index alpha and nu a finite mean"""
    if alpha < 0:
        raise ValidationError("tail index must be >= 0")
    if not (m1_nu > 0 and math.isfinite(m1_nu)):
        raise ValidationError("the first moment of nu must be finite and positive")
    if isinstance(tail_constant, LogPowerSV):
        sv = LogPowerSV(breiman_constant(tail_constant.constant, alpha, m1_nu), tail_constant.exponents)
    else:
        sv = LogPowerSV(breiman_constant(tail_constant, alpha, m1_nu))
    return TailAsymptotic(alpha, sv, regime_for_index(alpha, alpha > 1),
                          details={'factor': m1_nu ** alpha})
