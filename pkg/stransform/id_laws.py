"""
Infinitely divisible laws for free multiplicative convolution on [0, inf).

A law is given by a drift gamma and a finite measure sigma on [0, +inf],
kept as an interior part plus explicit atoms at 0 and +inf. Its S-transform
is exp(v(w)) with, for z = w / (1 + w),

    v = gamma + sigma({0})/z - sigma({inf}) z + int (1 + t z)/(z - t) sigma(dt).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import MissingLimit, OutOfRange, RegimeMismatch, ValidationError
from .measures import Atoms, Kernel, MeasureSpec, SigmaMinFamily, moment, pushforward_inverse
from .regvar import LogPowerSV, Regime, TailAsymptotic, sv_scale
from .transforms import STransformHandle

logger = logging.getLogger(__name__)


def _split_zero_atom(sigma):
    """Interior part of sigma and the mass it puts on 0"""
    if sigma is None:
        return None, 0.0
    zero = sigma.atom_at_zero()
    if zero == 0:
        return sigma, 0.0
    if isinstance(sigma, SigmaMinFamily):
        return None, zero
    if isinstance(sigma, Atoms):
        rest = tuple((loc, w) for loc, w in sigma.atoms if loc != 0.0)
        return (Atoms(rest) if rest else None), zero
    raise ValidationError(f"cannot separate the atom at 0 of {sigma.family}")


@dataclass(frozen=True)
class LevyPair:
    gamma: float
    sigma: Optional[MeasureSpec] = None
    zero_mass: float = 0.0
    inf_mass: float = 0.0

    def __post_init__(self):
        if self.zero_mass < 0 or self.inf_mass < 0:
            raise ValidationError("atom masses must be >= 0")
        sigma, zero = _split_zero_atom(self.sigma)
        if sigma is not None and not math.isfinite(sigma.total_mass()):
            raise ValidationError("sigma must be a finite measure")
        object.__setattr__(self, 'sigma', sigma)
        object.__setattr__(self, 'zero_mass', float(self.zero_mass + zero))
        object.__setattr__(self, 'inf_mass', float(self.inf_mass))
        object.__setattr__(self, 'gamma', float(self.gamma))

    def to_dict(self):
        return {
            'gamma': self.gamma,
            'sigma': self.sigma.family if self.sigma is not None else None,
            'atoms': {'zero': self.zero_mass, 'inf': self.inf_mass},
        }


def _w_to_z(w):
    if not -1.0 < w < 0:
        raise OutOfRange(f"w={w!r} outside (-1, 0)")
    return w / (1.0 + w)


def _interior_kernel(z, k):
    """k-th z-derivative of (1 + t z)/(z - t) as a kernel in t"""
    scale = min(-z, -1.0 / z)
    if k == 0:
        return Kernel(lambda t: (1.0 + np.asarray(t) * z) / (z - np.asarray(t)), scale)
    factor = (-1) ** k * math.factorial(k)

    def func(t):
        # (1 + t^2)/(z - t)^(k+1) = t^(1-k) (1 + t^-2)/(z/t - 1)^(k+1) for t > 1
        t = np.asarray(t, dtype=float)
        far = t > 1.0
        near_t = np.where(far, 1.0, t)
        far_t = np.where(far, t, 2.0)
        near = (1.0 + near_t * near_t) / (z - near_t) ** (k + 1)
        far_value = far_t ** (1 - k) * (1.0 + far_t ** -2) / (z / far_t - 1.0) ** (k + 1)
        return factor * np.where(far, far_value, near)

    return Kernel(func, scale)


def v_z_jet(pair, z, order=0):
    """[V, V', ...] in the variable z"""
    out = []
    for k in range(order + 1):
        value = 0.0
        if k == 0:
            value = pair.gamma - pair.inf_mass * z
        elif k == 1:
            value = -pair.inf_mass
        if pair.zero_mass:
            value += pair.zero_mass * (-1) ** k * math.factorial(k) / z ** (k + 1)
        if pair.sigma is not None:
            value += pair.sigma.expect(_interior_kernel(z, k))
        out.append(value)
    return out


def v_jet(pair, w, order=0):
    """Derivatives of v in w through z = w/(1+w)"""
    z = _w_to_z(w)
    big_v = v_z_jet(pair, z, order)
    u = 1.0 + w
    z1, z2, z3 = 1.0 / u ** 2, -2.0 / u ** 3, 6.0 / u ** 4
    out = [big_v[0]]
    if order >= 1:
        out.append(big_v[1] * z1)
    if order >= 2:
        out.append(big_v[2] * z1 ** 2 + big_v[1] * z2)
    if order >= 3:
        out.append(big_v[3] * z1 ** 3 + 3.0 * big_v[2] * z1 * z2 + big_v[1] * z3)
    return out


def v_eval(pair, w):
    return v_jet(pair, w, 0)[0]


def s_id_eval(pair, w):
    return math.exp(v_eval(pair, w))


class IdSTransform(STransformHandle):
    """S = exp(v) for an infinitely divisible law"""

    def __init__(self, pair):
        self.pair = pair
        self.source = pair
        self.lower = -1.0
        sigma = pair.sigma
        if pair.zero_mass > 0:
            self.m1 = math.inf
        else:
            inner = moment(sigma, -1).value if sigma is not None else 0.0
            self.m1 = math.exp(-pair.gamma + inner) if math.isfinite(inner) else math.inf
        if pair.inf_mass > 0:
            self.m_minus1 = math.inf
        else:
            outer = moment(sigma, 1).value if sigma is not None else 0.0
            self.m_minus1 = math.exp(pair.gamma + outer) if math.isfinite(outer) else math.inf

    def _log_jet(self, w, order):
        return v_jet(self.pair, w, order)


def id_handle(pair):
    return IdSTransform(pair)


def id_hat(pair):
    """Pair of the reciprocal law: (-gamma, sigma pushed by 1/t, atoms swapped)"""
    sigma = pushforward_inverse(pair.sigma) if pair.sigma is not None else None
    return LevyPair(-pair.gamma, sigma, zero_mass=pair.inf_mass, inf_mass=pair.zero_mass)


def sigma_min_closed_form_s(c, d, gamma, w):
    """Exact S for sigma = c dt on (0, d)"""
    z = _w_to_z(w)
    return math.exp(gamma - c * d * z - c * (1.0 + z * z) * math.log1p(-d / z))


def _limit_of(sv):
    """Limit at infinity of a log-power function"""
    for a in sv.exponents:
        if a > 0:
            return math.inf
        if a < 0:
            return 0.0
    return sv.constant


def default_left_tail(pair):
    """(alpha, L) with sigma([0, x)) ~ x^alpha L(1/x) when it is known in closed form"""
    if pair.zero_mass > 0:
        return 0.0, LogPowerSV(pair.zero_mass)
    sigma = pair.sigma
    if isinstance(sigma, SigmaMinFamily):
        return sigma.alpha, LogPowerSV(sigma.c)
    raise ValidationError("sigma has no declared behaviour at 0; pass alpha and L")


def id_tail_predict(pair, sigma_left_tail=None, limit=None):
    """
    Tail of the law of ``pair`` from sigma([0, x)) ~ x^alpha L(1/x) as x -> 0.

    ``sigma_left_tail`` is (alpha, L) with L a LogPowerSV or, for alpha = 1,
    any callable together with its ``limit`` at infinity.
    """
    alpha, sv = sigma_left_tail if sigma_left_tail is not None else default_left_tail(pair)
    if alpha < 0:
        raise RegimeMismatch("sigma exponent must be >= 0")
    if alpha < 1:
        if not isinstance(sv, LogPowerSV):
            raise RegimeMismatch("slow tails need a log-power L")
        r = 1.0 / (1.0 - alpha)
        ratio = 1.0 if alpha == 0 else math.pi * alpha / math.sin(math.pi * alpha)
        a1 = sv.exponents[0] if sv.exponents else 0.0
        constant = ratio ** r * (sv.constant * r ** a1) ** r
        exponents = (-r,) + tuple(a * r for a in sv.exponents)
        return TailAsymptotic(0.0, LogPowerSV(constant, exponents), Regime.SLOW,
                              details={'log_power': r})
    if alpha == 1:
        return _critical_tail(pair, sv, limit)
    inner = moment(pair.sigma, -1).value if pair.sigma is not None else 0.0
    if pair.zero_mass > 0 or not math.isfinite(inner):
        raise RegimeMismatch("sigma with exponent above 1 has a finite reciprocal moment")
    m1 = math.exp(-pair.gamma + inner)
    if not isinstance(sv, LogPowerSV):
        raise RegimeMismatch("exponents above 1 need a log-power L")
    return TailAsymptotic(float(alpha), sv_scale(sv, m1 ** alpha), Regime.FINITE_MEAN,
                          details={'m1': m1})


def _critical_tail(pair, sv, limit):
    if limit is None:
        if isinstance(sv, LogPowerSV):
            limit = _limit_of(sv)
        else:
            raise MissingLimit("exponent 1 needs the limit of L at infinity")
    if math.isinf(limit):
        logger.info("L grows without bound: tail slowly varying")
        return TailAsymptotic(0.0, None, Regime.SLOW)
    if limit == 0:
        return TailAsymptotic(1.0, None, Regime.PI_CLASS)
    index = 1.0 / (1.0 + limit)
    sigma = pair.sigma
    sv_out = None
    if isinstance(sigma, SigmaMinFamily) and sigma.alpha == 1 and pair.inf_mass == 0 and pair.zero_mass == 0:
        lam = index
        constant = (math.sin(math.pi * lam) / (math.pi * lam)
                    * sigma.d ** (sigma.c * lam) * math.exp(-pair.gamma * lam))
        sv_out = LogPowerSV(constant)
    return TailAsymptotic(index, sv_out, Regime.ALPHA01, details={'limit': limit})
