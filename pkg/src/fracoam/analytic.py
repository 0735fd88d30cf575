"""Closed-form results for fractional OAM states in the infinite-dimensional limit.

Covers overlaps between fractional states, the integer-OAM spectrum with
its analytic tail, the mean and truncated variance of OAM, and the operator
that rotates the phase discontinuity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import polygamma, psi

from .bp_space import TWO_PI, FractionalLabel, wrap_angle

# below this |M - M'| the removable 1/(M - M') singularity is replaced by its limit
LIMIT_EPS = 1e-9


def _expm1i(y):
    """exp(i y) - 1 without cancellation for small y."""
    s = np.sin(0.5 * y)
    return -2.0 * s * s + 1j * np.sin(y)


def _split(M):
    m = math.floor(M)
    mu = M - m
    if mu >= 1.0:
        m, mu = m + 1, 0.0
    return int(m), mu


def _offset(M):
    """``M - round(M)``: exact, and equal to mu mod 1, so exp(2 pi i mu) loses nothing near integers."""
    return M - round(M)


def _overlap_zero(M, Mp, beta, theta0):
    """<M'(0)|M(beta)> for beta in [0, 2pi)."""
    _, mu = _split(M)
    K = M - Mp
    lead = np.exp(-1j * mu * beta)
    if abs(K) < LIMIT_EPS:
        t = beta / TWO_PI
        return lead * ((1.0 - t) + t * np.exp(1j * TWO_PI * _offset(M))) * np.exp(1j * K * theta0)
    # e^{2 pi i mu}(1 - e^{iK beta}) + e^{iK beta}(1 - e^{iK(2pi - beta)})
    brace = (-np.exp(1j * TWO_PI * _offset(M)) * _expm1i(K * beta)
             - np.exp(1j * K * beta) * _expm1i(K * (TWO_PI - beta)))
    return lead * 1j * np.exp(1j * K * theta0) / (TWO_PI * K) * brace


def overlap(M: float, alpha: float, Mp: float, alphap: float, theta0: float = 0.0) -> complex:
    """Overlap <M'(alpha')|M(alpha)> of two fractional OAM states.

    The pair is reduced to a relative orientation ``beta = alpha - alpha'``
    (mod 2 pi) and an integer phase ``exp(i(m - m')alpha')``.
    """
    alpha = wrap_angle(alpha)
    alphap = wrap_angle(alphap)
    m, _ = _split(M)
    mp, _ = _split(Mp)
    beta = wrap_angle(alpha - alphap)
    val = np.exp(1j * (m - mp) * alphap) * _overlap_zero(M, Mp, beta, theta0)
    return complex(val)


def overlap_probability(M: float, Mp: float, beta: float) -> float:
    """|<M'(0)|M(beta)>|^2 from the real trigonometric form."""
    beta = wrap_angle(beta)
    K = M - Mp
    if abs(K) < LIMIT_EPS:
        return float((1.0 - beta / math.pi) ** 2 * math.sin(_offset(M) * math.pi) ** 2
                     + math.cos(_offset(M) * math.pi) ** 2)
    s_b = math.sin(K * beta / 2.0)
    s_rest = math.sin(K * (math.pi - beta / 2.0))
    # |e^{2 pi i mu}(1 - e^{iKb}) + e^{iKb} - e^{2 pi i K}|^2 / (2 pi K)^2, expanded
    num = (4.0 * s_b ** 2 + 4.0 * s_rest ** 2
           + 8.0 * s_b * s_rest * math.cos(2.0 * math.pi * _offset(M) - K * math.pi))
    # the bracket's cross term written through cos(2 pi mu - K pi) keeps it real and exact
    return float(num / (2.0 * math.pi * K) ** 2)


def oam_amplitude(M: float, beta: float, theta0: float, mp: int) -> complex:
    """Amplitude c_{m'} of |M(beta)> on the integer OAM state |m'>."""
    m, mu = _split(M)
    if mu == 0.0:
        return complex(1.0 if mp == m else 0.0)
    beta = wrap_angle(beta)
    K = M - mp
    c = (1j * np.exp(1j * K * theta0) / (TWO_PI * K)
         * np.exp(1j * (m - mp) * beta) * -_expm1i(TWO_PI * _offset(M)))
    return complex(c)


def oam_amplitudes(M: float, beta: float, theta0: float, mps) -> np.ndarray:
    """Vectorized :func:`oam_amplitude` over an array of integer ``mps``."""
    mps = np.asarray(mps)
    m, mu = _split(M)
    if mu == 0.0:
        return (mps == m).astype(complex)
    beta = wrap_angle(beta)
    K = M - mps
    return (1j * np.exp(1j * K * theta0) / (TWO_PI * K)
            * np.exp(1j * (m - mps) * beta) * -_expm1i(TWO_PI * _offset(M)))


def oam_probability(M: float, mp):
    """P_{m'} = sin^2(mu pi) / (pi^2 (M - m')^2); a Kronecker delta for integer M."""
    m, mu = _split(M)
    mp_arr = np.asarray(mp)
    if mu == 0.0:
        out = (mp_arr == m).astype(float)
    else:
        K = M - mp_arr
        out = math.sin(math.pi * _offset(M)) ** 2 / (math.pi ** 2 * K * K)
    return float(out) if np.ndim(out) == 0 else out


def oam_mean(M: float) -> float:
    """Mean OAM ``M - sin(2 pi M)/(2 pi)``."""
    return M - math.sin(TWO_PI * M) / TWO_PI


def oam_variance_truncated(M: float, mmax: int) -> float:
    """Variance about the exact mean, summed over ``|m'| <= mmax``.

    Grows linearly in ``mmax`` for non-integer ``M``.
    """
    if mmax < 1:
        raise ValueError("mmax must be >= 1")
    mbar = oam_mean(M)
    mps = np.arange(-mmax, mmax + 1)
    P = oam_probability(M, mps)
    return float(np.sum((mps - mbar) ** 2 * P))


def tail_moments(M: float, a: int, b: int):
    """Probability and first moment of the modes outside ``a <= m' <= b``.

    Uses the trigamma and digamma closed forms of the partial-fraction sums,
    so no truncation error is incurred.  Returns ``(P_tail, sum m' P_m')``.
    """
    _, mu = _split(M)
    if mu == 0.0:
        m, _ = _split(M)
        inside = a <= m <= b
        return (0.0, 0.0) if inside else (1.0, float(m))
    s2 = math.sin(math.pi * _offset(M)) ** 2 / math.pi ** 2
    up = b + 1 - M      # distance to the first excluded mode above
    down = M - a + 1    # distance to the first excluded mode below
    prob = s2 * (float(polygamma(1, up)) + float(polygamma(1, down)))
    first = M * prob + s2 * (float(psi(down)) - float(psi(up)))
    return prob, first


@dataclass(frozen=True)
class SpectralDecomposition:
    """Integer-OAM amplitudes above a probability threshold, with tail bookkeeping."""

    entries: tuple
    M: float
    beta: float
    theta0: float
    threshold: float
    tail_probability: float
    tail_first_moment: float = field(default=0.0, repr=False)

    @property
    def m_values(self) -> np.ndarray:
        return np.array([e[0] for e in self.entries], dtype=int)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([e[1] for e in self.entries], dtype=complex)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def retained_probability(self) -> float:
        return float(np.sum(self.probabilities))

    def total_probability(self) -> float:
        """Retained probability plus the analytic tail (1 up to rounding)."""
        return self.retained_probability() + self.tail_probability

    def mean(self) -> float:
        """Mean OAM from the retained modes plus the analytic tail."""
        return float(np.sum(self.m_values * self.probabilities)) + self.tail_first_moment


def spectrum(M: float, beta: float = 0.0, theta0: float = 0.0,
             threshold: float = 1e-4) -> SpectralDecomposition:
    """All integer modes with ``P_{m'} > threshold``.

    For non-integer ``M`` the probabilities fall off as ``1/(M - m')^2``, so
    the retained set is the contiguous range ``|M - m'| < D`` with
    ``D = sin(mu pi) / (pi sqrt(threshold))``.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold!r}")
    m, mu = _split(M)
    beta = wrap_angle(beta)
    if mu == 0.0:
        entries = ((m, 1.0 + 0.0j),)
        return SpectralDecomposition(entries, M, beta, theta0, threshold, 0.0, 0.0)
    D = abs(math.sin(math.pi * _offset(M))) / (math.pi * math.sqrt(threshold))
    lo = math.ceil(M - D) - 1
    hi = math.floor(M + D) + 1
    cand = np.arange(lo, hi + 1)
    P = oam_probability(M, cand)
    keep = cand[P > threshold]
    if keep.size:
        a, b = int(keep[0]), int(keep[-1])
    else:
        a = math.ceil(M)
        b = a - 1
    c = oam_amplitudes(M, beta, theta0, keep)
    entries = tuple((int(k), complex(v)) for k, v in zip(keep, c))
    tail_p, tail_m = tail_moments(M, a, b)
    return SpectralDecomposition(entries, M, beta, theta0, threshold, tail_p, tail_m)


@dataclass(frozen=True)
class RotationResult:
    """Outcome of rotating a fractional state's discontinuity."""

    phase: complex
    label: FractionalLabel


def rotate(m_index: int, beta: float, label: FractionalLabel) -> RotationResult:
    """Apply U_m(beta) to |M(alpha)>.

    The discontinuity turns to ``alpha + beta`` (mod 2 pi) and the state
    picks up ``exp(i (m_index - m) beta)``, where ``m`` is the integer part
    of ``label.M``.
    """
    b = wrap_angle(beta)
    phase = complex(np.exp(1j * (m_index - label.m) * b))
    new = FractionalLabel(label.M, label.m, label.mu, wrap_angle(label.alpha + b), label.theta0)
    return RotationResult(phase, new)
