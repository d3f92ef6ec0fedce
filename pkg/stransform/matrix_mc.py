"""
Monte Carlo spectra of products of Haar-conjugated random matrices.

For integer t the eigenvalue distribution of M_t, built by
M_{k+1} = M_k^(1/2) U_k D_k U_k^T M_k^(1/2), approximates mu^(boxtimes t).
"""

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from freemult import settings
from .exceptions import (
    EigensolverFailure, ExponentBelowOne, NonPositiveValue, TooFewSamples, ValidationError,
)
from .measures import moment
from .regvar import Quality, RegVarFit

logger = logging.getLogger(__name__)

# relative change between the Hill estimates at k/2 and k above which the fit is degraded
HILL_STABILITY = 0.1


def haar_orthogonal(n, rng):
    """Haar-distributed orthogonal matrix from the QR factors of a Gaussian matrix"""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _clamped_eigh(matrix):
    try:
        values, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc))
    floor = settings.EIGEN_FLOOR * max(1.0, float(np.max(np.abs(values))))
    if np.any(values < -floor):
        logger.warning("eigenvalue %.3g below the numerical floor", float(values.min()))
    return np.clip(values, 0.0, None), vectors


def replicate_spectrum(mu, t, n, rng):
    """Eigenvalues of one t-fold product of size n"""
    values = np.asarray(mu.sample(n, rng), dtype=float)
    if t == 1:
        return values
    # first step: M is diagonal, so its square root is a scaling
    root = np.sqrt(values)
    vectors = None
    for _ in range(t - 1):
        u = haar_orthogonal(n, rng)
        b = (u * np.asarray(mu.sample(n, rng), dtype=float)) @ u.T
        if vectors is None:
            a = root[:, None] * b * root[None, :]
        else:
            half = (vectors * root) @ vectors.T
            a = half @ b @ half
        values, vectors = _clamped_eigh(0.5 * (a + a.T))
        root = np.sqrt(values)
    return values


def product_spectrum(mu, t, n=None, reps=None, seed=0):
    """
    All n * reps eigenvalues of independent t-fold products. Replicate i uses
    the generator seeded by SeedSequence(seed).spawn(reps)[i].
    """
    n = settings.MC_MATRIX_SIZE if n is None else int(n)
    reps = settings.MC_REPS if reps is None else int(reps)
    if t != int(t):
        raise ValidationError("Monte Carlo products need an integer t")
    t = int(t)
    if t < 1:
        raise ExponentBelowOne(f"free power t={t} must be >= 1")
    if n < 1 or reps < 1:
        raise ValidationError("matrix size and replicate count must be positive")
    children = np.random.SeedSequence(seed).spawn(reps)
    spectra = []
    for child in children:
        spectra.append(replicate_spectrum(mu, t, n, np.random.default_rng(child)))
    logger.debug("sampled %d replicates of size %d", reps, n)
    return np.concatenate(spectra)


def _hill_index(ordered, k):
    return 1.0 / (np.mean(np.log(ordered[:k])) - math.log(ordered[k]))


def hill_fit(samples, k=None):
    """
    Hill estimate of the tail index from the top k order statistics.

    The constant is the median of (i/n) x_(i)^index over the top k, x_(i)
    being the i-th largest sample.
    """
    ordered = np.sort(np.asarray(samples, dtype=float))[::-1]
    n = ordered.size
    k = settings.MC_HILL_K if k is None else int(k)
    if k >= n:
        raise TooFewSamples(f"k={k} needs more than {n} samples")
    if k < 2:
        raise ValidationError("Hill estimation needs k >= 2")
    if ordered[k] <= 0:
        raise NonPositiveValue("top order statistics must be positive")
    index = float(_hill_index(ordered, k))
    half = float(_hill_index(ordered, k // 2))
    ranks = np.arange(1, k + 1) / n
    top = ordered[:k]
    constant = float(np.median(ranks * top ** index))
    residuals = np.log(ranks) - (math.log(constant) - index * np.log(top))
    quality = Quality.GOOD if abs(half - index) <= HILL_STABILITY * index else Quality.DEGRADED
    return RegVarFit(
        index=index,
        constant=constant,
        residuals=tuple(float(r) for r in residuals),
        grid=tuple(float(x) for x in top),
        quality=quality,
    )


@dataclass(frozen=True)
class TraceCheck:
    mean: float
    standard_error: float
    expected: float

    @property
    def deviation(self):
        if self.standard_error == 0:
            return 0.0 if self.mean == self.expected else math.inf
        return abs(self.mean - self.expected) / self.standard_error

    def passed(self, sigmas=3.0):
        return self.deviation <= sigmas

    def to_dict(self):
        return {
            'mean': self.mean,
            'standard_error': self.standard_error,
            'expected': self.expected,
            'deviation': self.deviation,
        }


def trace_check(mu, eigenvalues, n, t):
    """Mean eigenvalue per replicate against m1(mu)^t"""
    per_rep = np.asarray(eigenvalues, dtype=float).reshape(-1, n).mean(axis=1)
    if per_rep.size < 2:
        raise TooFewSamples("trace check needs at least two replicates")
    m1 = moment(mu, 1).value
    return TraceCheck(
        mean=float(per_rep.mean()),
        standard_error=float(per_rep.std(ddof=1) / math.sqrt(per_rep.size)),
        expected=float(m1 ** t),
    )


def dump_samples_csv(samples, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['eigenvalue'])
    for value in samples:
        writer.writerow([format(float(value), settings.REPORT_FLOAT_FORMAT)])
