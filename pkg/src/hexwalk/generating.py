"""Probability generating function and exact moments of the walk.

The generating function G(u, v; n) = E[u^X v^Y] factorizes into integer
powers of two positive factors evaluated at lattice-transformed
arguments:

    alpha(u, v) = q10 + q12*u + q11*u/v
    beta(u, v)  = q00 + q01*v/u + q02/u

with u~ = u^(3a/2) * v^(sqrt(3)a/2) and v~ = v^(sqrt(3)a).  At time n
the walk's class is i = parity(n) and

    G(u, v; n) = alpha(u~, v~)^((n-i)/2) * beta(u~, v~)^((n+i)/2) * u^(i*a).

Both exponents are integers because n and i share parity.  ``log_pgf``
evaluates log G through log-sum-exp so that cumulant-scaling checks can
probe arguments far outside the overflow range of the direct product.

Moments are affine in n with a parity correction: for example
E[X_n] = mu1*n + theta1*i_n.  The ten coefficients and the asymptotic
covariance matrix C are evaluated from the transition probabilities in
closed form; they are floats even for rational inputs since the lattice
geometry brings in sqrt(3).
"""

import math
from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np

from .errors import InvalidParameterError
from .lattice import ROOT3, StepProbabilities, parity


def pgf_factors(u: float, v: float, q: StepProbabilities) -> Tuple[float, float]:
    """The (alpha, beta) pair at already-transformed arguments ``(u, v)``."""
    if not (u > 0 and v > 0):
        raise InvalidParameterError("generating-function arguments must be positive")
    q00, q01, q02 = (float(p) for p in q.q0)
    q10, q11, q12 = (float(p) for p in q.q1)
    alpha = q10 + q12 * u + q11 * u / v
    beta = q00 + q01 * v / u + q02 / u
    return alpha, beta


def pgf(u: float, v: float, n: int, q: StepProbabilities) -> float:
    """G(u, v; n) = E[u^X_n v^Y_n] for positive arguments."""
    if not (u > 0 and v > 0):
        raise InvalidParameterError("generating-function arguments must be positive")
    if n < 0:
        raise InvalidParameterError(f"time must be nonnegative, got {n}")
    a = q.a
    ut = u ** (1.5 * a) * v ** (0.5 * ROOT3 * a)
    vt = v ** (ROOT3 * a)
    alpha, beta = pgf_factors(ut, vt, q)
    assert alpha > 0 and beta > 0, "factors must be positive for positive arguments"
    i = parity(n)
    return alpha ** ((n - i) // 2) * beta ** ((n + i) // 2) * u ** (i * a)


def _logsumexp3(t0: float, t1: float, t2: float) -> float:
    m = max(t0, t1, t2)
    if m == -math.inf:
        return -math.inf
    return m + math.log(
        math.exp(t0 - m) + math.exp(t1 - m) + math.exp(t2 - m)
    )


def _log_weight(p) -> float:
    p = float(p)
    return math.log(p) if p > 0 else -math.inf


def log_pgf(lam1: float, lam2: float, n: int, q: StepProbabilities) -> float:
    """log G(e^lam1, e^lam2; n), stable for large |lam|.

    In exponential coordinates the two factors become
    beta~ = q00 + q01*e^(-A) + q02*e^(-B) and
    alpha~ = q10 + q11*e^(A) + q12*e^(B) with
    A = (3a/2)*lam1 - (sqrt(3)a/2)*lam2 and B = (3a/2)*lam1 + (sqrt(3)a/2)*lam2.
    """
    if n < 0:
        raise InvalidParameterError(f"time must be nonnegative, got {n}")
    a = q.a
    big = 1.5 * a * lam1 + 0.5 * ROOT3 * a * lam2
    small = 1.5 * a * lam1 - 0.5 * ROOT3 * a * lam2
    log_beta = _logsumexp3(
        _log_weight(q.q0[0]),
        _log_weight(q.q0[1]) - small,
        _log_weight(q.q0[2]) - big,
    )
    log_alpha = _logsumexp3(
        _log_weight(q.q1[0]),
        _log_weight(q.q1[1]) + small,
        _log_weight(q.q1[2]) + big,
    )
    i = parity(n)
    return ((n - i) // 2) * log_alpha + ((n + i) // 2) * log_beta + i * a * lam1


@dataclass(frozen=True)
class MomentSummary:
    """Exact first and second moments of the position at time ``n``.

    ``drift``, ``parity_shift`` and ``diffusion`` hold the time-free
    coefficients (mu1, mu2), (theta1..theta5) and
    (sigma1^2, sigma2^2, sigma12); ``covariance_matrix`` is the
    asymptotic-covariance matrix C built from the diffusion entries.
    """

    n: int
    mean: Tuple[float, float]
    variance: Tuple[float, float]
    covariance: float
    drift: Tuple[float, float]
    parity_shift: Tuple[float, float, float, float, float]
    diffusion: Tuple[float, float, float]
    covariance_matrix: Tuple[Tuple[float, float], Tuple[float, float]]

    def as_dict(self) -> dict:
        return asdict(self)


def moment_coefficients(q: StepProbabilities):
    """The ten moment coefficients (mu1, mu2, th1..th5, s1sq, s2sq, s12)."""
    a = q.a
    s0 = float(q.q0[1] + q.q0[2])
    s1 = float(q.q1[1] + q.q1[2])
    d0 = float(q.q0[1] - q.q0[2])
    d1 = float(q.q1[1] - q.q1[2])
    mu1 = 0.75 * a * (s1 - s0)
    th1 = a - 0.75 * a * (s1 + s0)
    mu2 = 0.25 * ROOT3 * a * (d0 - d1)
    th2 = 0.25 * ROOT3 * a * (d0 + d1)
    s1sq = 1.125 * a * a * (s0 - s0 * s0 + s1 - s1 * s1)
    th3 = 1.125 * a * a * (s0 - s0 * s0 - s1 + s1 * s1)
    s2sq = 0.375 * a * a * (s0 - d0 * d0 + s1 - d1 * d1)
    th4 = 0.375 * a * a * (s0 - d0 * d0 - s1 + d1 * d1)
    s12 = 0.375 * ROOT3 * a * a * (d0 * (s0 - 1.0) + d1 * (s1 - 1.0))
    th5 = 0.375 * ROOT3 * a * a * (d0 * (s0 - 1.0) - d1 * (s1 - 1.0))
    return mu1, mu2, th1, th2, th3, th4, th5, s1sq, s2sq, s12


def moments(n: int, q: StepProbabilities) -> MomentSummary:
    """Mean, variance and covariance of the position at time ``n``."""
    if n < 0:
        raise InvalidParameterError(f"time must be nonnegative, got {n}")
    mu1, mu2, th1, th2, th3, th4, th5, s1sq, s2sq, s12 = moment_coefficients(q)
    i = parity(n)
    return MomentSummary(
        n=n,
        mean=(mu1 * n + th1 * i, mu2 * n + th2 * i),
        variance=(s1sq * n + th3 * i, s2sq * n + th4 * i),
        covariance=s12 * n + th5 * i,
        drift=(mu1, mu2),
        parity_shift=(th1, th2, th3, th4, th5),
        diffusion=(s1sq, s2sq, s12),
        covariance_matrix=((s1sq, s12), (s12, s2sq)),
    )


def asymptotic_covariance(q: StepProbabilities) -> np.ndarray:
    """The 2x2 covariance matrix C of the Gaussian scaling limit.

    C is the average of the two per-class single-step covariance
    matrices, hence symmetric positive semidefinite by construction.
    """
    *_, s1sq, s2sq, s12 = moment_coefficients(q)
    return np.array([[s1sq, s12], [s12, s2sq]])
