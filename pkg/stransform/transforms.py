"""
Moment transform psi, its inverse chi and the S-transform on (delta - 1, 0).

Every S-transform is exposed through an ``STransformHandle``. Handles
evaluate the jet of log S (log S and its first three derivatives) and derive
the jet of S from it, so products and powers stay in log-space.
"""

import csv
import logging
import math
import re

import numpy as np
from scipy import optimize

from freemult import settings
from .exceptions import (
    AtomAtZero, NoBracket, NotAvailable, OrderTooHigh, OutOfRange, QuadratureFailure,
    UnknownTag, ValidationError,
)
from .measures import (
    FreePoisson, MeasureSpec, MuAlphaBeta, PointMass, moment, power_kernel,
)

logger = logging.getLogger(__name__)

MAX_PSI_ORDER = 4


def jet_to_log(jet):
    """[S, S', S'', S'''] -> [log S, (log S)', ...]"""
    s = jet[0]
    out = [math.log(s)]
    if len(jet) > 1:
        l1 = jet[1] / s
        out.append(l1)
    if len(jet) > 2:
        l2 = jet[2] / s - l1 * l1
        out.append(l2)
    if len(jet) > 3:
        out.append(jet[3] / s - 3.0 * jet[1] * jet[2] / (s * s) + 2.0 * l1 ** 3)
    return out


def log_to_jet(log_jet):
    """Inverse of ``jet_to_log``"""
    s = math.exp(log_jet[0])
    out = [s]
    if len(log_jet) > 1:
        l1 = log_jet[1]
        out.append(s * l1)
    if len(log_jet) > 2:
        l2 = log_jet[2]
        out.append(s * (l2 + l1 * l1))
    if len(log_jet) > 3:
        out.append(s * (log_jet[3] + 3.0 * l1 * l2 + l1 ** 3))
    return out


class STransformHandle:
    """
    S-transform of a measure on [0, inf), defined on (lower, 0).

    Subclasses implement ``_log_jet``. ``m1`` and ``m_minus1`` are the
    first and minus-first moments (``math.inf`` when divergent, ``None``
    when unknown); the range of S lies in (1/m1, m_minus1).
    """
    lower = -1.0
    m1 = None
    m_minus1 = None
    source = None

    def check(self, w, order=0):
        if order > settings.MAX_DERIVATIVE_ORDER or order < 0:
            raise OrderTooHigh(f"derivative order {order} is above {settings.MAX_DERIVATIVE_ORDER}")
        if not (self.lower < w < 0):
            raise OutOfRange(f"w={w!r} outside ({self.lower}, 0)")

    def log_jet(self, w, order=0):
        self.check(w, order)
        return self._log_jet(w, order)

    def jet(self, w, order=0):
        return log_to_jet(self.log_jet(w, order))

    def log_value(self, w):
        return self.log_jet(w, 0)[0]

    def value(self, w):
        return math.exp(self.log_value(w))

    def derivative(self, w, p):
        return self.jet(w, p)[p]

    __call__ = value

    def _log_jet(self, w, order):
        raise NotImplementedError

    def __repr__(self):
        return f"<{self.__class__.__name__} {self.source!r}>"


def _check_measure(mu):
    if not isinstance(mu, MeasureSpec):
        raise ValidationError(f"{mu!r} is not a measure")
    if not mu.is_probability:
        raise ValidationError(f"{mu.family} is not a probability measure")


def _moment_or_none(mu, p):
    try:
        return moment(mu, p).value
    except (NotAvailable, QuadratureFailure) as exc:
        logger.debug("moment %s of %s unavailable: %s", p, mu.family, exc)
        return None


def psi_eval(mu, z):
    """psi(z) = integral of z t / (1 - z t)"""
    if not z < 0:
        raise OutOfRange("psi is evaluated at z < 0")
    _check_measure(mu)
    return z * mu.expect(power_kernel(z, 1, 1))


def psi_deriv(mu, z, k):
    """k-th derivative k! integral of t^k / (1 - z t)^(k+1)"""
    if not z < 0:
        raise OutOfRange("psi is evaluated at z < 0")
    if k < 1 or k > MAX_PSI_ORDER:
        raise OrderTooHigh(f"psi derivative order must be in 1..{MAX_PSI_ORDER}")
    _check_measure(mu)
    return math.factorial(k) * mu.expect(power_kernel(z, k, k + 1))


class NumericSTransform(STransformHandle):
    """
    S-transform of a measure by quadrature.

    With h(z) = psi(z)/z the transform is S(w) = (1 + w) / h(chi(w)), which
    avoids the cancellation in (1 + w) chi(w) / w as w -> 0.
    """

    def __init__(self, measure):
        _check_measure(measure)
        self.source = measure
        self.measure = measure
        self.lower = measure.atom_at_zero() - 1.0
        self.m1 = _moment_or_none(measure, 1)
        self.m_minus1 = _moment_or_none(measure, -1) if measure.atom_at_zero() == 0 else math.inf

    def h_jet(self, z, order):
        """[h, h', ..., h^(order)] with h^(k) = k! integral of t^(k+1) / (1 - z t)^(k+1)"""
        expect = self.measure.expect
        return [math.factorial(k) * expect(power_kernel(z, k + 1, k + 1)) for k in range(order + 1)]

    def psi(self, z):
        return z * self.measure.expect(power_kernel(z, 1, 1))

    def chi(self, w):
        """Unique z < 0 with psi(z) = w, solved for log(-z)"""
        if not (self.lower < w < 0):
            raise OutOfRange(f"w={w!r} outside ({self.lower}, 0)")
        target = math.log(-w)
        expect = self.measure.expect

        def residual(u):
            y = math.exp(u)
            return math.log(y * expect(power_kernel(-y, 1, 1))) - target

        if self.m1 is not None and math.isfinite(self.m1):
            start = math.log(-w / self.m1)
        else:
            start = math.log(-w)
        lo, hi = _bracket(residual, start)
        u = optimize.brentq(residual, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)
        return -math.exp(u)

    def _log_jet(self, w, order):
        z = self.chi(w)
        h = self.h_jet(z, order)
        s = (1.0 + w) / h[0]
        if order == 0:
            return [math.log(s)]
        psi1 = h[0] + z * h[1]
        # psi^(k) = k h^(k-1) + z h^(k)
        psi = [None, psi1]
        for k in range(2, order + 1):
            psi.append(k * h[k - 1] + z * h[k])
        g = _compose_reciprocal(h, psi, order)
        jet = [s]
        for p in range(1, order + 1):
            jet.append((1.0 + w) * g[p] + p * g[p - 1])
        return jet_to_log(jet)


def _compose_reciprocal(h, psi, order):
    """Derivatives in w of 1/h(chi(w)) by Faa di Bruno"""
    h0 = h[0]
    big_g = [1.0 / h0]
    if order >= 1:
        big_g.append(-h[1] / h0 ** 2)
    if order >= 2:
        big_g.append(2.0 * h[1] ** 2 / h0 ** 3 - h[2] / h0 ** 2)
    if order >= 3:
        big_g.append(-6.0 * h[1] ** 3 / h0 ** 4 + 6.0 * h[1] * h[2] / h0 ** 3 - h[3] / h0 ** 2)
    p1 = psi[1]
    c1 = 1.0 / p1
    g = [big_g[0], big_g[1] * c1]
    if order >= 2:
        c2 = -psi[2] / p1 ** 3
        g.append(big_g[2] * c1 ** 2 + big_g[1] * c2)
    if order >= 3:
        c3 = (3.0 * psi[2] ** 2 - p1 * psi[3]) / p1 ** 5
        g.append(big_g[3] * c1 ** 3 + 3.0 * big_g[2] * c1 * c2 + big_g[1] * c3)
    return g[:order + 1]


def _bracket(func, start, step=1.0, limit=700.0):
    """Expand [start - step, start + step] by doubling until an increasing func changes sign"""
    lo, hi = max(start - step, -limit), min(start + step, limit)
    f_lo, f_hi = func(lo), func(hi)
    for _ in range(settings.BRACKET_MAX_STEPS):
        if f_lo <= 0 <= f_hi:
            return lo, hi
        if (f_lo > 0 and lo <= -limit) or (f_hi < 0 and hi >= limit):
            break
        step *= 2.0
        if f_lo > 0:
            lo = max(lo - step, -limit)
            f_lo = func(lo)
        if f_hi < 0:
            hi = min(hi + step, limit)
            f_hi = func(hi)
    raise NoBracket(f"no sign change around {start:.6g}")


def chi_eval(mu, w):
    return NumericSTransform(mu).chi(w)


def s_transform(mu):
    """Handle for S_mu; mu_alpha_beta laws only exist through their closed form"""
    if isinstance(mu, STransformHandle):
        return mu
    if isinstance(mu, MuAlphaBeta):
        return ClosedFormSTransform('mu_alpha_beta', (mu.alpha, mu.beta))
    return NumericSTransform(mu)


def s_eval(mu, w):
    return s_transform(mu).value(w)


def s_deriv(h, w, p):
    if p < 1 or p > settings.MAX_DERIVATIVE_ORDER:
        raise OrderTooHigh(f"S derivative order must be in 1..{settings.MAX_DERIVATIVE_ORDER}")
    return s_transform(h).derivative(w, p)


# Closed forms

_TAG_RE = re.compile(r'^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$')
_TAG_ARITY = {
    'point_mass': 1,
    'free_poisson': 0,
    'mu_alpha_beta': 2,
    'symmetric_bernoulli': 0,
}


def parse_tag(tag, params=()):
    """'mu_alpha_beta(0,1)' -> ('mu_alpha_beta', (0.0, 1.0))"""
    match = _TAG_RE.match(tag) if isinstance(tag, str) else None
    if not match or match.group(1) not in _TAG_ARITY:
        raise UnknownTag(f"unknown closed-form tag {tag!r}")
    name, inner = match.groups()
    if inner:
        try:
            params = tuple(float(v) for v in inner.split(','))
        except ValueError:
            raise UnknownTag(f"bad parameters in tag {tag!r}")
    params = tuple(float(v) for v in params)
    if len(params) != _TAG_ARITY[name]:
        raise UnknownTag(f"{name} takes {_TAG_ARITY[name]} parameters")
    return name, params


class ClosedFormSTransform(STransformHandle):
    """
    Exact S-transforms: point_mass(a) with S = 1/a, free_poisson with
    S = 1/(1+w), mu_alpha_beta(alpha, beta) with S = (-w)^beta / (1+w)^alpha.
    """

    def __init__(self, tag, params=()):
        name, params = parse_tag(tag, params)
        if name == 'symmetric_bernoulli':
            raise UnknownTag("symmetric_bernoulli has no real S-transform handle")
        self.tag = name
        self.params = params
        if name == 'point_mass':
            self.source = PointMass(params[0])
            self.alpha, self.beta, self.shift = 0.0, 0.0, -math.log(params[0])
        elif name == 'free_poisson':
            self.source = FreePoisson()
            self.alpha, self.beta, self.shift = 1.0, 0.0, 0.0
        else:
            self.source = MuAlphaBeta(*params)
            self.alpha, self.beta = params
            self.shift = 0.0
        if name == 'point_mass':
            self.m1, self.m_minus1 = params[0], 1.0 / params[0]
        else:
            self.m1 = math.inf if self.beta > 0 else 1.0
            self.m_minus1 = math.inf if self.alpha > 0 else 1.0

    def _log_jet(self, w, order):
        alpha, beta = self.alpha, self.beta
        out = [self.shift + beta * math.log(-w) - alpha * math.log1p(w)]
        for k in range(1, order + 1):
            sign = (-1) ** (k - 1) * math.factorial(k - 1)
            out.append(sign * (beta / w ** k - alpha / (1.0 + w) ** k))
        return out


class SymmetricValue(float):
    """Modulus of a purely imaginary S-transform value"""
    imaginary = True


def closed_form_s(tag, w, params=()):
    name, params = parse_tag(tag, params)
    if not -1.0 < w < 0:
        raise OutOfRange(f"w={w!r} outside (-1, 0)")
    if name == 'symmetric_bernoulli':
        return SymmetricValue(math.sqrt((1.0 + w) / -w))
    return ClosedFormSTransform(name, params).value(w)


def closed_form_handle(tag, params=()):
    return ClosedFormSTransform(tag, params)


class HatSTransform(STransformHandle):
    """S-transform of the reciprocal law: S_hat(w) = 1 / S(-1 - w)"""

    def __init__(self, handle):
        if handle.lower > -1.0:
            raise AtomAtZero("the reciprocal law needs mu({0}) = 0")
        self.base = handle
        self.source = ('hat', handle.source)
        self.lower = -1.0
        self.m1, self.m_minus1 = handle.m_minus1, handle.m1

    def _log_jet(self, w, order):
        base = self.base.log_jet(-1.0 - w, order)
        return [-((-1) ** k) * value for k, value in enumerate(base)]


def hat_transform(handle):
    handle = s_transform(handle)
    if isinstance(handle, HatSTransform):
        return handle.base
    return HatSTransform(handle)


def dump_csv(handle, ws, stream):
    """Write rows (w, S(w)) to a text stream"""
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['w', 'S'])
    for w in np.asarray(ws, dtype=float):
        writer.writerow([format(w, settings.REPORT_FLOAT_FORMAT),
                         format(handle.value(w), settings.REPORT_FLOAT_FORMAT)])
