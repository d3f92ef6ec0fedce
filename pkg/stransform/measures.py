"""
Probability measures on [0, +inf) and the quantities the transforms need.

Each family is an immutable dataclass deriving from ``MeasureSpec``. The
module-level functions (``tail``, ``moment``, ``pushforward_inverse``,
``symmetric_square``, ``sample``) are the public operations; the methods on
the classes do the per-family work.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from freemult import settings
from .exceptions import (
    AtomAtZero, NotAvailable, QuadratureFailure, ValidationError,
)

logger = logging.getLogger(__name__)

# Gauss-Legendre rule used on density-grid cells
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)
# Exponent clip so that exp() never overflows inside integrands
_EXP_CLIP = 700.0
_TINY = math.exp(-_EXP_CLIP)


@dataclass(frozen=True)
class ExtendedMoment:
    """Nonnegative moment value; ``math.inf`` marks divergence"""
    value: float

    @property
    def is_finite(self):
        return math.isfinite(self.value)

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class Kernel:
    """
    Integrand t -> func(t) for ``MeasureSpec.expect``.

    ``scale`` is the t at which the kernel changes shape (1/|z| for the
    transform kernels); integrators place break points around it.
    ``derivative`` is only needed by measures given through their tail.
    """
    func: Callable
    scale: Optional[float] = None
    derivative: Optional[Callable] = None

    def __call__(self, t):
        return self.func(t)


def _power_ratio(t, a, b, y):
    """t^a / (1 + y t)^b, as t^(a-b) / (1/t + y)^b once t > 1 so that nothing overflows"""
    t = np.asarray(t, dtype=float)
    far = t > 1.0
    near_t = np.where(far, 1.0, t)
    far_t = np.where(far, t, 2.0)
    near = near_t ** a / (1.0 + y * near_t) ** b
    with np.errstate(over='ignore', divide='ignore'):
        log_far = (a - b) * np.log(far_t) - b * np.log(y + 1.0 / far_t)
        far_value = np.exp(np.minimum(log_far, _EXP_CLIP))
    return np.where(far, far_value, near)


def power_kernel(z, a, b):
    """Kernel t^a / (1 - z t)^b for z <= 0"""
    y = -z

    def func(t):
        return _power_ratio(t, a, b, y)

    def derivative(t):
        lead = a * _power_ratio(t, a - 1, b, y) if a else 0.0
        return lead - b * y * _power_ratio(t, a, b + 1, y)

    scale = 1.0 / y if y > 0 else None
    return Kernel(func, scale, derivative)


def quad_segments(func, cuts):
    """
    Integrate a scalar function over consecutive segments of ``cuts``.

    The last cut may be ``math.inf``. Raises QuadratureFailure when scipy
    reports a problem and the error estimate is not small.
    """
    total = 0.0
    error = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        result = integrate.quad(
            func, lo, hi,
            epsabs=settings.QUAD_EPSABS, epsrel=settings.QUAD_EPSREL,
            limit=settings.QUAD_LIMIT, full_output=1,
        )
        value, abserr = result[0], result[1]
        if not math.isfinite(value):
            raise QuadratureFailure(f"non-finite integral on [{lo}, {hi}]")
        total += value
        error += abserr
        if len(result) > 3:
            logger.debug("quad on [%g, %g]: %s", lo, hi, result[3])
    if error > settings.QUAD_ACCEPT * max(abs(total), 1e-300) and error > 1e-300:
        raise QuadratureFailure(
            f"quadrature error {error:.3g} too large for value {total:.6g}")
    return total


def _log_cuts(centre, width, lower=0.0):
    """Break points lower, centre - width, centre, centre + width, inf"""
    cuts = [lower]
    if centre is not None:
        for c in (centre - width, centre, centre + width):
            if c > cuts[-1]:
                cuts.append(c)
    cuts.append(math.inf)
    return cuts


class MeasureSpec:
    """Base class of every measure family"""
    family = 'measure'

    def atom_at_zero(self):
        return 0.0

    def total_mass(self):
        return 1.0

    @property
    def is_probability(self):
        return abs(self.total_mass() - 1.0) <= 1e-9

    def mass_at(self, x):
        """Mass of the single point x"""
        return 0.0

    def tail(self, x):
        raise NotAvailable(f"tail is not available for {self.family}")

    def moment(self, p):
        raise NotAvailable(f"moment is not available for {self.family}")

    def density(self, x):
        raise NotAvailable(f"density is not available for {self.family}")

    def sample(self, n, rng):
        raise NotAvailable(f"sampling is not available for {self.family}")

    def expect(self, kernel):
        raise NotAvailable(f"integration is not available for {self.family}")

    def inverse(self):
        if self.atom_at_zero() > 0:
            raise AtomAtZero(f"{self.family} has an atom at zero")
        return PowerPushforward(self, -1.0)

    def square(self):
        return PowerPushforward(self, 2.0)


@dataclass(frozen=True)
class Atoms(MeasureSpec):
    """Finite combination of point masses, ((location, weight), ...)"""
    atoms: Tuple[Tuple[float, float], ...]
    family = 'atoms'

    def __post_init__(self):
        if not self.atoms:
            raise ValidationError("at least one atom is required")
        cleaned = tuple((float(loc), float(w)) for loc, w in self.atoms)
        for loc, w in cleaned:
            if loc < 0 or not math.isfinite(loc):
                raise ValidationError(f"atom location {loc} must be finite and >= 0")
            if w <= 0:
                raise ValidationError(f"atom weight {w} must be positive")
        object.__setattr__(self, 'atoms', cleaned)

    @property
    def locations(self):
        return np.array([loc for loc, _ in self.atoms])

    @property
    def weights(self):
        return np.array([w for _, w in self.atoms])

    def atom_at_zero(self):
        return self.mass_at(0.0)

    def total_mass(self):
        return float(self.weights.sum())

    def mass_at(self, x):
        return float(sum(w for loc, w in self.atoms if loc == x))

    def tail(self, x):
        return float(sum(w for loc, w in self.atoms if loc > x))

    def moment(self, p):
        total = 0.0
        for loc, w in self.atoms:
            if loc == 0.0:
                if p < 0:
                    return math.inf
                total += w if p == 0 else 0.0
            else:
                total += w * loc ** p
        return total

    def sample(self, n, rng):
        weights = self.weights
        return rng.choice(self.locations, size=n, p=weights / weights.sum())

    def expect(self, kernel):
        return float(np.sum(self.weights * kernel(self.locations)))

    def inverse(self):
        if self.atom_at_zero() > 0:
            raise AtomAtZero("atoms include the point 0")
        return Atoms(tuple((1.0 / loc, w) for loc, w in self.atoms))

    def square(self):
        return Atoms(tuple((loc * loc, w) for loc, w in self.atoms))


@dataclass(frozen=True)
class PointMass(MeasureSpec):
    a: float
    family = 'point_mass'

    def __post_init__(self):
        if not self.a > 0:
            raise ValidationError("point mass location must be positive")

    def mass_at(self, x):
        return 1.0 if x == self.a else 0.0

    def tail(self, x):
        return 1.0 if x < self.a else 0.0

    def moment(self, p):
        return self.a ** p

    def sample(self, n, rng):
        return np.full(n, float(self.a))

    def expect(self, kernel):
        return float(kernel(self.a))

    def inverse(self):
        return PointMass(1.0 / self.a)

    def square(self):
        return PointMass(self.a * self.a)


@dataclass(frozen=True)
class Pareto(MeasureSpec):
    """Density alpha x^(-alpha-1) on [1, inf)"""
    alpha: float
    family = 'pareto'

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValidationError("Pareto index must be positive")

    def tail(self, x):
        return 1.0 if x <= 1.0 else x ** (-self.alpha)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 1.0, self.alpha * np.maximum(x, 1.0) ** (-self.alpha - 1), 0.0)

    def moment(self, p):
        if p >= self.alpha:
            return math.inf
        return self.alpha / (self.alpha - p)

    def sample(self, n, rng):
        u = 1.0 - rng.random(n)
        return u ** (-1.0 / self.alpha)

    def expect(self, kernel):
        # t = exp(s / alpha) turns the law into the unit exponential in s
        alpha = self.alpha

        def integrand(s):
            t = math.exp(min(s / alpha, _EXP_CLIP))
            return float(kernel(t)) * math.exp(-s)

        centre = None
        if kernel.scale is not None and kernel.scale > 1.0:
            centre = alpha * math.log(kernel.scale)
        return quad_segments(integrand, _log_cuts(centre, 10.0 * alpha))


@dataclass(frozen=True)
class FreePoisson(MeasureSpec):
    """Marchenko-Pastur law with rate 1, density sqrt(4x - x^2) / (2 pi x) on [0, 4]"""
    family = 'free_poisson'

    def tail(self, x):
        if x <= 0:
            return 1.0
        if x >= 4:
            return 0.0
        return float(1.0 - special.betainc(0.5, 1.5, x / 4.0))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 4)
        safe = np.where(inside, x, 1.0)
        return np.where(inside, np.sqrt(4.0 * safe - safe * safe) / (2 * np.pi * safe), 0.0)

    def moment(self, p):
        if p <= -0.5:
            return math.inf
        return float(4.0 ** p * (2.0 / np.pi) * special.beta(p + 0.5, 1.5))

    def sample(self, n, rng):
        return 4.0 * special.betaincinv(0.5, 1.5, rng.random(n))

    def expect(self, kernel):
        norm = 2.0 * np.pi
        scale = kernel.scale
        if scale is None or scale >= 0.4:
            value, abserr = integrate.quad(
                lambda t: float(kernel(t)) / norm, 0.0, 4.0,
                weight='alg', wvar=(-0.5, 0.5),
                epsabs=settings.QUAD_EPSABS, epsrel=settings.QUAD_EPSREL,
                limit=settings.QUAD_LIMIT,
            )
            return value
        # kernel varies on [0, scale]; split so that each piece keeps one endpoint weight
        cut = 10.0 * scale
        left, _ = integrate.quad(
            lambda t: float(kernel(t)) * math.sqrt(4.0 - t) / norm, 0.0, cut,
            weight='alg', wvar=(-0.5, 0.0),
            epsabs=settings.QUAD_EPSABS, epsrel=settings.QUAD_EPSREL,
            limit=settings.QUAD_LIMIT,
        )
        right, _ = integrate.quad(
            lambda t: float(kernel(t)) / (math.sqrt(t) * norm), cut, 4.0,
            weight='alg', wvar=(0.0, 0.5),
            epsabs=settings.QUAD_EPSABS, epsrel=settings.QUAD_EPSREL,
            limit=settings.QUAD_LIMIT,
        )
        return left + right


@dataclass(frozen=True)
class MuAlphaBeta(MeasureSpec):
    """Law defined by S(w) = (-w)^beta / (1 + w)^alpha; no explicit distribution function"""
    alpha: float
    beta: float
    family = 'mu_alpha_beta'

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValidationError("mu_alpha_beta parameters must be >= 0")

    def moment(self, p):
        alpha, beta = self.alpha, self.beta
        if p == 0 or (alpha == 0 and beta == 0):
            return 1.0
        if p > 0:
            # right tail index is 1 / (1 + beta)
            if beta > 0 and p >= 1.0 / (1.0 + beta):
                return math.inf
            if p == 1:
                return 1.0
        else:
            if alpha > 0 and -p >= 1.0 / (1.0 + alpha):
                return math.inf
            if p == -1:
                return 1.0
        if (alpha, beta) == (1, 0):
            return FreePoisson().moment(p)
        if (alpha, beta) == (0, 1):
            return FreePoisson().moment(-p)
        raise NotAvailable(f"moment {p} of mu_alpha_beta has no closed form")

    def inverse(self):
        return MuAlphaBeta(self.beta, self.alpha)


@dataclass(frozen=True)
class SigmaMinFamily(MeasureSpec):
    """Finite measure with sigma([0, x)) = c min(x^alpha, d^alpha); a Levy measure, not a law"""
    c: float
    d: float
    alpha: float
    family = 'sigma_min'

    def __post_init__(self):
        if not (self.c > 0 and self.d > 0 and self.alpha >= 0):
            raise ValidationError("sigma_min needs c > 0, d > 0, alpha >= 0")

    def atom_at_zero(self):
        return self.c if self.alpha == 0 else 0.0

    def total_mass(self):
        return self.c * self.d ** self.alpha

    def tail(self, x):
        if self.alpha == 0:
            return 0.0
        return self.c * (self.d ** self.alpha - min(x, self.d) ** self.alpha)

    def moment(self, p):
        if self.alpha == 0:
            if p < 0:
                return math.inf
            return self.c if p == 0 else 0.0
        if p + self.alpha <= 0:
            return math.inf
        return self.c * self.alpha * self.d ** (p + self.alpha) / (p + self.alpha)

    def expect(self, kernel):
        if self.alpha == 0:
            return self.c * float(kernel(0.0))
        # t = d exp(-s / alpha) makes the measure c d^alpha times the unit exponential
        alpha, d = self.alpha, self.d

        def integrand(s):
            return float(kernel(d * math.exp(-min(s / alpha, _EXP_CLIP)))) * math.exp(-s)

        centre = None
        if kernel.scale is not None and kernel.scale < d:
            centre = alpha * math.log(d / kernel.scale)
        return self.total_mass() * quad_segments(integrand, _log_cuts(centre, 10.0 * alpha))


@dataclass(frozen=True)
class DensityGrid(MeasureSpec):
    """
    Piecewise-linear density on ``nodes`` (trapezoid rule), extended past the
    last node by a power tail f_K (t / t_K)^(-rate), an exponential tail
    f_K exp(-rate (t - t_K)), or nothing.

    Values are normalised at construction so that the total mass is 1.
    """
    nodes: Tuple[float, ...]
    values: Tuple[float, ...]
    tail_kind: str = 'none'
    tail_rate: float = 0.0
    family = 'density_grid'
    _cells: np.ndarray = field(init=False, repr=False, compare=False)

    TAIL_KINDS = ['none', 'power', 'exponential']

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or nodes.size != values.size:
            raise ValidationError("nodes and values must be equal-length lists of >= 2 points")
        if nodes[0] < 0 or np.any(np.diff(nodes) <= 0):
            raise ValidationError("nodes must be nonnegative and strictly increasing")
        if np.any(values < 0):
            raise ValidationError("density values must be nonnegative")
        if self.tail_kind not in self.TAIL_KINDS:
            raise ValidationError(f"unknown tail extension '{self.tail_kind}'")
        if self.tail_kind == 'power' and not self.tail_rate > 1:
            raise ValidationError("power tail extension needs rate > 1")
        if self.tail_kind == 'exponential' and not self.tail_rate > 0:
            raise ValidationError("exponential tail extension needs rate > 0")
        cells = 0.5 * (values[1:] + values[:-1]) * np.diff(nodes)
        mass = cells.sum() + self._extension_mass(nodes[-1], values[-1])
        if not mass > 0:
            raise ValidationError("density grid has zero mass")
        values = values / mass
        object.__setattr__(self, 'nodes', tuple(nodes))
        object.__setattr__(self, 'values', tuple(values))
        object.__setattr__(self, '_cells', cells / mass)

    def _extension_mass(self, last, value):
        if self.tail_kind == 'power':
            return value * last / (self.tail_rate - 1.0)
        if self.tail_kind == 'exponential':
            return value / self.tail_rate
        return 0.0

    def _extension_tail(self, x):
        """Mass of the extension beyond max(x, last node)"""
        last, value = self.nodes[-1], self.values[-1]
        x = max(x, last)
        if self.tail_kind == 'power':
            return value * last / (self.tail_rate - 1.0) * (x / last) ** (1.0 - self.tail_rate)
        if self.tail_kind == 'exponential':
            return value / self.tail_rate * math.exp(-self.tail_rate * (x - last))
        return 0.0

    def density(self, x):
        x = np.asarray(x, dtype=float)
        nodes, values = np.asarray(self.nodes), np.asarray(self.values)
        inside = np.interp(x, nodes, values, left=0.0, right=0.0)
        last, fk = nodes[-1], values[-1]
        beyond = x > last
        if self.tail_kind == 'power':
            ext = fk * (np.maximum(x, last) / last) ** (-self.tail_rate)
        elif self.tail_kind == 'exponential':
            ext = fk * np.exp(-self.tail_rate * (np.maximum(x, last) - last))
        else:
            ext = np.zeros_like(x)
        return np.where(beyond, ext, inside)

    def tail(self, x):
        nodes, values = np.asarray(self.nodes), np.asarray(self.values)
        if x >= nodes[-1]:
            return float(self._extension_tail(x))
        rest = self._extension_tail(nodes[-1])
        if x < nodes[0]:
            return float(self._cells.sum() + rest)
        i = int(np.searchsorted(nodes, x, side='right')) - 1
        fx = float(np.interp(x, nodes, values))
        partial = 0.5 * (fx + values[i + 1]) * (nodes[i + 1] - x)
        return float(partial + self._cells[i + 1:].sum() + rest)

    def moment(self, p):
        nodes, values = np.asarray(self.nodes), np.asarray(self.values)
        a, b = nodes[:-1], nodes[1:]
        fa, fb = values[:-1], values[1:]
        slope = (fb - fa) / (b - a)
        intercept = fa - slope * a
        if nodes[0] == 0.0:
            if values[0] > 0 and p <= -1:
                return math.inf
            if p <= -2:
                return math.inf
        total = float(np.sum(intercept * _power_integral(a, b, p) + slope * _power_integral(a, b, p + 1)))
        last, fk = nodes[-1], values[-1]
        if fk > 0 and self.tail_kind == 'power':
            if p >= self.tail_rate - 1.0:
                return math.inf
            total += fk * last ** (p + 1) / (self.tail_rate - 1.0 - p)
        elif fk > 0 and self.tail_kind == 'exponential':
            rate = self.tail_rate
            if p > -1:
                upper = special.gammaincc(p + 1, rate * last) * special.gamma(p + 1)
                total += float(fk * math.exp(rate * last) * rate ** (-p - 1) * upper)
            else:
                total += quad_segments(
                    lambda t: t ** p * fk * math.exp(-rate * (t - last)), [last, math.inf])
        return total

    def sample(self, n, rng):
        nodes = np.asarray(self.nodes)
        cdf = np.concatenate([[0.0], np.cumsum(self._cells)])
        u = rng.random(n)
        out = np.interp(u, cdf, nodes)
        beyond = u >= cdf[-1]
        if np.any(beyond) and self.tail_kind != 'none':
            last = nodes[-1]
            v = 1.0 - rng.random(int(beyond.sum()))
            if self.tail_kind == 'power':
                out[beyond] = last * v ** (1.0 / (1.0 - self.tail_rate))
            else:
                out[beyond] = last - np.log(v) / self.tail_rate
        return out

    def expect(self, kernel):
        nodes, values = np.asarray(self.nodes), np.asarray(self.values)
        a, b = nodes[:-1], nodes[1:]
        if kernel.scale is not None and nodes[0] == 0.0 and kernel.scale < b[0]:
            # resolve the kernel near the origin with geometric sub-cells
            inner = np.geomspace(kernel.scale * 1e-6, b[0], 40)
            a = np.concatenate([[0.0], inner[:-1], b[:-1]])
            b = np.concatenate([inner, b[1:]])
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        t = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        f = np.interp(t, nodes, values)
        total = float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * f * kernel(t)))
        return total + self._expect_extension(kernel)

    def _expect_extension(self, kernel):
        last, fk = self.nodes[-1], self.values[-1]
        if fk == 0 or self.tail_kind == 'none':
            return 0.0
        rate = self.tail_rate
        if self.tail_kind == 'power':
            log_last = math.log(last)

            def integrand(u):
                return float(kernel(math.exp(min(log_last + u, _EXP_CLIP)))) * math.exp((1.0 - rate) * u)

            centre = None
            if kernel.scale is not None and kernel.scale > last:
                centre = math.log(kernel.scale / last)
            return fk * last * quad_segments(integrand, _log_cuts(centre, 10.0))

        def integrand(u):
            return float(kernel(last + u / rate)) * math.exp(-u)

        return fk / rate * quad_segments(integrand, _log_cuts(None, 0.0))


def _power_integral(a, b, p):
    """Elementwise integral of t^p over [a, b]"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if p == -1:
        with np.errstate(divide='ignore'):
            return np.where(a > 0, np.log(b / np.where(a > 0, a, 1.0)), np.inf)
    with np.errstate(divide='ignore'):
        return (b ** (p + 1) - a ** (p + 1)) / (p + 1)


@dataclass(frozen=True)
class TailFunction(MeasureSpec):
    """
    Law given by x -> mu((x, inf)). ``func`` must be nonincreasing with
    values in [0, 1]; ``func(0) = 1 - delta``.
    """
    func: Callable[[float], float]
    zero_atom: float = 0.0
    family = 'tail_function'

    def __post_init__(self):
        if not 0 <= self.zero_atom < 1:
            raise ValidationError("atom at zero must lie in [0, 1)")
        head = float(self.func(0.0))
        if abs(head - (1.0 - self.zero_atom)) > 1e-9:
            raise ValidationError("tail(0) must equal 1 - mu({0})")

    def atom_at_zero(self):
        return self.zero_atom

    def tail(self, x):
        return float(self.func(x))

    def _cutoff(self):
        """Smallest power of two where the tail drops below the cutoff"""
        x = 1.0
        while self.func(x) >= settings.TAIL_CUTOFF:
            x *= 2.0
            if x > 1e300:
                return None
        return x

    def moment(self, p):
        if p == 0:
            return 1.0
        if p < 0:
            if self.zero_atom > 0:
                return math.inf
            value = quad_segments(
                lambda u: -p * math.exp(p * u) * (1.0 - self.func(math.exp(u))),
                [-math.inf, 0.0, math.inf])
        else:
            top = self._cutoff()
            if top is None:
                logger.debug("tail never drops below cutoff; moment %s treated as divergent", p)
                return math.inf
            value = quad_segments(
                lambda u: p * math.exp(p * u) * self.func(math.exp(u)),
                [-math.inf, 0.0, math.log(top)])
        if value > settings.INFINITE_MOMENT_THRESHOLD:
            return math.inf
        return value

    def expect(self, kernel):
        if kernel.derivative is None:
            raise NotAvailable("tail-function integration needs the kernel derivative")
        top = self._cutoff()
        upper = math.log(top) if top is not None else _EXP_CLIP
        cuts = [-math.inf]
        if kernel.scale is not None:
            centre = math.log(kernel.scale)
            cuts += [c for c in (centre - 10.0, centre, centre + 10.0) if c < upper]
        cuts.append(upper)
        head = float(kernel(0.0))

        def integrand(u):
            t = math.exp(u)
            return float(kernel.derivative(t)) * self.func(t) * t

        return head + quad_segments(integrand, sorted(set(cuts)))


@dataclass(frozen=True)
class PowerPushforward(MeasureSpec):
    """Law of X^power for X distributed as ``inner``"""
    inner: MeasureSpec
    power: float
    family = 'pushforward'

    def __post_init__(self):
        if self.power == 0:
            raise ValidationError("pushforward power must be nonzero")
        if self.power < 0 and self.inner.atom_at_zero() > 0:
            raise AtomAtZero("negative powers need mu({0}) = 0")

    def atom_at_zero(self):
        return self.inner.atom_at_zero() if self.power > 0 else 0.0

    def total_mass(self):
        return self.inner.total_mass()

    def tail(self, x):
        q = self.power
        if q > 0:
            return self.inner.tail(x ** (1.0 / q))
        if x <= 0:
            return self.total_mass()
        y = x ** (1.0 / q)
        return self.total_mass() - self.inner.tail(y) - self.inner.mass_at(y)

    def density(self, x):
        q = self.power
        x = np.asarray(x, dtype=float)
        y = x ** (1.0 / q)
        return self.inner.density(y) * np.abs(1.0 / q) * x ** (1.0 / q - 1.0)

    def moment(self, p):
        return self.inner.moment(p * self.power)

    def sample(self, n, rng):
        return self.inner.sample(n, rng) ** self.power

    def expect(self, kernel):
        q = self.power
        scale = kernel.scale ** (1.0 / q) if kernel.scale is not None else None
        floor = _TINY if q < 0 else 0.0

        def lift(t):
            # negative powers of an underflowed 0 stay finite
            return np.maximum(np.asarray(t, dtype=float), floor)

        derivative = None
        if kernel.derivative is not None:
            def derivative(t):
                t = lift(t)
                return kernel.derivative(t ** q) * q * t ** (q - 1.0)
        return self.inner.expect(Kernel(lambda t: kernel(lift(t) ** q), scale, derivative))

    def inverse(self):
        if self.power == -1.0:
            return self.inner
        return PowerPushforward(self.inner, -self.power)


@dataclass(frozen=True)
class SymmetricWrapper(MeasureSpec):
    """Symmetric law on the real line whose absolute value is distributed as ``inner``"""
    inner: MeasureSpec
    family = 'symmetric'

    def atom_at_zero(self):
        return self.inner.atom_at_zero()

    def tail(self, x):
        return 0.5 * self.inner.tail(x)

    def moment(self, p):
        return self.inner.moment(p)

    def sample(self, n, rng):
        values = self.inner.sample(n, rng)
        signs = rng.choice([-1.0, 1.0], size=n)
        return signs * values

    def inverse(self):
        raise NotAvailable("the reciprocal pushforward is defined for measures on [0, inf)")

    def square(self):
        return self.inner.square()


# Public operations

def atom_at_zero(mu):
    return mu.atom_at_zero()


def tail(mu, x):
    """mu((x, +inf)) for x >= 0"""
    if x < 0:
        raise ValidationError("tail needs x >= 0")
    return mu.tail(x)


def moment(mu, p):
    """Moment of order p as an ExtendedMoment"""
    value = mu.moment(p)
    if value > settings.INFINITE_MOMENT_THRESHOLD:
        value = math.inf
    return ExtendedMoment(float(value))


def pushforward_inverse(mu):
    """Law of 1/X; needs mu({0}) = 0"""
    if mu.atom_at_zero() > 0:
        raise AtomAtZero(f"{mu.family} has an atom at zero")
    return mu.inverse()


def symmetric_square(mu):
    """Law of X^2 for a symmetric X"""
    if not isinstance(mu, SymmetricWrapper):
        raise ValidationError("symmetric_square needs a symmetric measure")
    return mu.square()


def sample(mu, n, seed):
    """n draws from mu, reproducible from ``seed``"""
    rng = np.random.default_rng(seed)
    return np.asarray(mu.sample(int(n), rng), dtype=float)


def geometric_grid(text):
    """Parse 'a:b:n' into n geometric points from 10^a to 10^b"""
    try:
        lo, hi, count = text.split(':')
        lo, hi, count = float(lo), float(hi), int(count)
    except (AttributeError, ValueError):
        raise ValidationError(f"grid '{text}' is not of the form a:b:n")
    if count < 2 or hi <= lo:
        raise ValidationError(f"grid '{text}' needs b > a and n >= 2")
    return np.logspace(lo, hi, count)
