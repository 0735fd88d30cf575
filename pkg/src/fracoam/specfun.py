"""Bessel functions and Fourier-Bessel coefficients of a Gaussian.

The Gaussian profile ``exp(-rho^2/(2 w0^2))`` is written as
``int_0^inf d_n(kappa) J_n(kappa rho) dkappa`` for every order ``n``.  The
coefficients have the closed form

    d_n(kappa) = kappa^2 (sqrt(pi)/8) (2 w0^2)^(3/2)
                 * exp(-x) [I_{(n-1)/2}(x) - I_{(n+1)/2}(x)],   x = kappa^2 w0^2 / 4,

which needs modified Bessel functions of half-odd order for even ``n``
and of integer order for odd ``n``.  Both families are evaluated here in
the exponentially scaled form ``exp(-x) I_nu(x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0, j1, jv

from .quadrature import panel_rule

# where the large-argument expansion takes over from the Miller ladder
ASYMPTOTIC_MIN_X = 40.0
# cutoff multiple used before switching to the analytic 1/kappa tail
TAIL_SPLIT = 12.0
# small-argument power series below this
SERIES_MAX_X = 0.5


# ---------------------------------------------------------------- Bessel J

def bessel_j(n: int, x):
    """Integer-order Bessel function ``J_n(x)``; negative orders allowed."""
    n = int(n)
    x = np.asarray(x, dtype=float)
    if n < 0:
        return (-1) ** (-n) * bessel_j(-n, x)
    if n == 0:
        out = j0(x)
    elif n == 1:
        out = j1(x)
    else:
        out = jv(n, x)
    return out[()] if out.ndim == 0 else out


def bessel_j_orders(nmax: int, x) -> np.ndarray:
    """``J_0 .. J_nmax`` at every point of ``x >= 0``.

    Returns an array of shape ``(nmax + 1,) + x.shape``.  Points with
    ``x >= nmax`` use upward recurrence from ``J_0, J_1``; the rest use
    Miller's downward recurrence normalized by ``J_0 + 2 sum J_2k = 1``.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xf = x.ravel()
    out = np.empty((nmax + 1, xf.size))
    big = xf >= nmax
    if big.all():
        out[:] = _upward_j(nmax, xf)
    elif not big.any():
        out[:] = _miller_j(nmax, xf)
    else:
        out[:, big] = _upward_j(nmax, xf[big])
        out[:, ~big] = _miller_j(nmax, xf[~big])
    return out.reshape((nmax + 1,) + shape)


def _upward_j(nmax, x):
    out = np.empty((nmax + 1, x.size))
    out[0] = j0(x)
    if nmax == 0:
        return out
    out[1] = j1(x)
    inv = 2.0 / x
    for n in range(1, nmax):
        out[n + 1] = n * inv * out[n] - out[n - 1]
    return out


def _check_stride(xs):
    # per-step growth is at most ~2*start/x; rescale checks may be sparse when x is not tiny
    return 8 if xs.size and xs.min() >= 1e-3 else 1


def _miller_j(nmax, xs):
    start = int(nmax + 20 + math.ceil(math.sqrt(40 * max(nmax, 1))))
    start += start % 2
    inv = np.divide(2.0, xs, out=np.zeros_like(xs), where=xs > 0)
    above = np.zeros_like(xs)
    cur = np.full_like(xs, 1e-30)
    norm = np.zeros_like(xs)
    res = np.zeros((nmax + 1, xs.size))
    stride = _check_stride(xs)
    for n in range(start, 0, -1):
        below = n * inv * cur - above        # J_{n-1}
        above, cur = cur, below
        if n - 1 <= nmax:
            res[n - 1] = cur
        if (n - 1) % 2 == 0 and n > 1:
            norm += 2.0 * cur
        if n % stride == 0 and np.max(np.abs(cur)) > 1e200:
            big = np.abs(cur) > 1e200
            cur[big] *= 1e-200
            above[big] *= 1e-200
            norm[big] *= 1e-200
            res[:, big] *= 1e-200
    norm += cur
    res /= norm
    zero = xs == 0
    if zero.any():
        res[:, zero] = 0.0
        res[0, zero] = 1.0
    return res


# ------------------------------------------------------ modified Bessel I

def _miller_start(top, x):
    big = np.maximum(top, x)
    return np.ceil(big + 20.0 + np.sqrt(40.0 * np.maximum(big, 1.0))).astype(np.int64)


def _scaled_i_series(x, nu0, jmax):
    """Power series of ``exp(-x) I_{nu0 + j}(x)``, used for small ``x``."""
    out = np.empty((jmax + 1, x.size))
    q = 0.25 * x * x
    logh = np.log(0.5 * x)
    for j in range(jmax + 1):
        nu = nu0 + j
        s = np.ones_like(x)
        term = np.ones_like(x)
        for k in range(1, 40):
            term = term * q / (k * (nu + k))
            s += term
            if np.max(term) < 1e-17:
                break
        out[j] = np.exp(nu * logh - math.lgamma(nu + 1.0) - x) * s
    return out


def _scaled_i_ladder(x, half: bool, jmax: int) -> np.ndarray:
    """``exp(-x) I_{nu0 + j}(x)`` for ``j = 0..jmax``, ``nu0 = 1/2`` or ``0``.

    ``x`` is a 1-D array of positive values.  Below ``SERIES_MAX_X`` the
    power series is summed directly.  Elsewhere Miller's downward recurrence
    ``I_{nu-1} = I_{nu+1} + (2 nu / x) I_nu`` runs; the integer ladder is
    normalized by ``exp(-x)(I_0 + 2 sum I_k) = 1`` and the half-odd ladder
    by the closed form of ``I_{1/2}``.
    """
    nu0 = 0.5 if half else 0.0
    out = np.empty((jmax + 1, x.size))
    small = x < SERIES_MAX_X
    if small.any():
        out[:, small] = _scaled_i_series(x[small], nu0, jmax)
        if small.all():
            return out
        rest = np.nonzero(~small)[0]
        out[:, rest] = _scaled_i_ladder(x[rest], half, jmax)
        return out
    starts = _miller_start(jmax + nu0, x)
    # round starts up to a coarse grid so few passes cover all points
    coarse = 2 ** np.ceil(np.log2(starts)).astype(np.int64) // 4
    starts = (starts + coarse - 1) // coarse * coarse
    for start in np.unique(starts):
        idx = np.nonzero(starts == start)[0]
        xs = x[idx]
        inv = 2.0 / xs
        above = np.zeros_like(xs)
        cur = np.full_like(xs, 1e-280)
        norm = np.zeros_like(xs)
        res = np.zeros((jmax + 1, xs.size))
        stride = _check_stride(xs)
        for j in range(int(start), 0, -1):
            below = above + (j + nu0) * inv * cur     # order j - 1 + nu0
            above, cur = cur, below
            if j - 1 <= jmax:
                res[j - 1] = cur
            if not half and j > 1:
                norm += 2.0 * cur
            if j % stride == 0 and np.max(np.abs(cur)) > 1e200:
                big = np.abs(cur) > 1e200
                cur[big] *= 1e-200
                above[big] *= 1e-200
                norm[big] *= 1e-200
                res[:, big] *= 1e-200
        if half:
            exact = np.sqrt(2.0 / (math.pi * xs)) * (-np.expm1(-2.0 * xs)) * 0.5
            res *= exact / cur
        else:
            norm += cur
            res /= norm
        out[:, idx] = res
    return out


def _asymptotic_coeffs(nu, kmax=80):
    # a_k(nu) = prod_{j<=k} (4 nu^2 - (2j - 1)^2) / (k! 8^k)
    a = [1.0]
    for k in range(1, kmax + 1):
        a.append(a[-1] * (4.0 * nu * nu - (2 * k - 1) ** 2) / (8.0 * k))
    return a


def _scaled_i_asymptotic(nu, x):
    """Large-argument series for ``exp(-x) I_nu(x)``; terminates for half-odd nu."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    term = np.ones_like(x)
    coeffs = _asymptotic_coeffs(nu)
    for k, a in enumerate(coeffs):
        if k:
            term = term / x
        piece = (-1) ** k * a * term
        total += piece
        if a == 0.0 or np.max(np.abs(piece)) < 1e-17 * np.min(np.abs(total)):
            break
    return total / np.sqrt(2.0 * math.pi * x)


def _exp_scaled_k_half(p, x):
    """``exp(x) K_{p+1/2}(x)`` from its terminating sum."""
    s = np.zeros_like(x)
    for k in range(p + 1):
        c = math.factorial(p + k) / (math.factorial(k) * math.factorial(p - k))
        s = s + c / (2.0 * x) ** k
    return np.sqrt(math.pi / (2.0 * x)) * s


def scaled_bessel_i(two_nu: int, x):
    """``exp(-x) I_nu(x)`` for ``nu = two_nu / 2`` (integer or half-odd order).

    Accurate to about 1e-14 relative for ``x >= 0``; never overflows.
    """
    two_nu = int(two_nu)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    shape = x.shape
    xf = x.ravel()
    out = np.empty_like(xf)
    half = two_nu % 2 != 0
    if not half:
        n = abs(two_nu) // 2
        nu = float(n)
    elif two_nu > 0:
        n = (two_nu - 1) // 2
        nu = n + 0.5
    else:
        p = (-two_nu - 1) // 2
        pos = scaled_bessel_i(2 * p + 1, xf)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            extra = (2.0 / math.pi) * (-1) ** p * np.exp(-2.0 * xf) * _exp_scaled_k_half(p, xf)
        res = pos + extra
        res[xf == 0] = np.inf
        return res.reshape(shape)[()]
    zero = xf == 0
    out[zero] = 1.0 if (not half and n == 0) else 0.0
    asym = (xf >= max(ASYMPTOTIC_MIN_X, nu * nu)) & ~zero
    mid = ~asym & ~zero
    if asym.any():
        out[asym] = _scaled_i_asymptotic(nu, xf[asym])
    if mid.any():
        out[mid] = _scaled_i_ladder(xf[mid], half, n)[n]
    return out.reshape(shape)[()]


def mod_bessel_i_half(two_nu: int, x, scaled: bool = True):
    """Modified Bessel function of half-odd order ``two_nu / 2``.

    Returns ``exp(-x) I_nu(x)`` by default.  With ``scaled=False`` the plain
    value is returned and :class:`OverflowError` is raised when it is not
    representable.
    """
    if int(two_nu) % 2 == 0:
        raise ValueError(f"two_nu must be odd, got {two_nu}")
    val = scaled_bessel_i(two_nu, x)
    if scaled:
        return val
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        plain = val * np.exp(x)
    bad = ~np.isfinite(plain) & np.isfinite(val)
    if np.any(bad):
        raise OverflowError("unscaled modified Bessel value exceeds the float range")
    return plain


# ----------------------------------------------- Fourier-Bessel coefficients

@dataclass(frozen=True)
class CoefficientQuery:
    """Arguments of a single Fourier-Bessel coefficient."""

    mp: int
    kappa: float
    w0: float

    def __post_init__(self):
        if not self.w0 > 0:
            raise ValueError("w0 must be positive")
        if not self.kappa >= 0:
            raise ValueError("kappa must be nonnegative")


def _diff_asymptotic(n, x):
    """``exp(-x)[I_{(n-1)/2}(x) - I_{(n+1)/2}(x)]`` for large x, differenced termwise."""
    a = (n - 1) / 2.0
    b = (n + 1) / 2.0
    pa = pb = 1.0
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 120):
        pa *= (4 * a * a - (2 * k - 1) ** 2) / (8.0 * k)
        pb *= (4 * b * b - (2 * k - 1) ** 2) / (8.0 * k)
        term = term / x
        piece = (-1) ** k * (pa - pb) * term
        total += piece
        if pa == 0.0 and pb == 0.0:
            break
        if np.max(np.abs(piece)) < 1e-17 * np.min(np.abs(total)):
            break
    return total / np.sqrt(2.0 * math.pi * x)


def d_coefficients(nmax: int, kappa, w0: float) -> np.ndarray:
    """``d_n(kappa)`` for ``n = 0..nmax``; shape ``(nmax + 1,) + kappa.shape``."""
    kappa = np.asarray(kappa, dtype=float)
    shape = kappa.shape
    kf = kappa.ravel()
    x = 0.25 * kf * kf * w0 * w0
    out = np.zeros((nmax + 1, kf.size))
    out[0] = kf * w0 * w0 * np.exp(-0.5 * kf * kf * w0 * w0)
    if nmax == 0:
        return out.reshape((1,) + shape)
    pref = kf * kf * (math.sqrt(math.pi) / 8.0) * (2.0 * w0 * w0) ** 1.5
    top = (nmax + 1) / 2.0
    asym = x >= max(ASYMPTOTIC_MIN_X, top * top)
    mid = (x > 0) & ~asym
    if asym.any():
        xa = x[asym]
        for n in range(1, nmax + 1):
            out[n, asym] = _diff_asymptotic(n, xa)
    if mid.any():
        xm = x[mid]
        jh = nmax // 2 + 1
        ji = (nmax + 1) // 2 + 1
        half = _scaled_i_ladder(xm, True, jh)      # orders 1/2, 3/2, ...
        whole = _scaled_i_ladder(xm, False, ji)    # orders 0, 1, ...
        for n in range(1, nmax + 1):
            p = n // 2
            if n % 2 == 0:
                out[n, mid] = half[p - 1] - half[p]
            else:
                out[n, mid] = whole[p] - whole[p + 1]
    out[1:] *= pref
    return out.reshape((nmax + 1,) + shape)


def d_coefficient(q: CoefficientQuery) -> float:
    """Fourier-Bessel coefficient ``d_{m'}(kappa)`` of the Gaussian of width ``w0``.

    Negative indices carry the factor ``(-1)^{|m'|}`` so that
    ``d_{m'} J_{m'}`` is the same for ``m'`` and ``-m'``.
    """
    n = abs(int(q.mp))
    val = float(d_coefficients(n, np.array([q.kappa]), q.w0)[n, 0])
    if q.mp < 0 and n % 2:
        val = -val
    return val


# -------------------------------------------------- radial reconstruction

def _odd_ladder_sum(n, x):
    """``J_n(x) + 2 sum_{j>=1} J_{n+2j}(x)`` by one Miller pass per start bin."""
    out = np.empty_like(x)
    starts = _miller_start(n, x)
    coarse = 2 ** np.ceil(np.log2(starts)).astype(np.int64) // 4
    starts = (starts + coarse - 1) // coarse * coarse
    starts += (starts - n) % 2        # start on the parity of n
    for start in np.unique(starts):
        idx = np.nonzero(starts == start)[0]
        xs = x[idx]
        inv = 2.0 / xs
        above = np.zeros_like(xs)
        cur = np.full_like(xs, 1e-280)
        norm = np.zeros_like(xs)
        acc = np.zeros_like(xs)
        if (start - n) % 2 == 0 and start > n:
            acc += 2.0 * cur
        stride = _check_stride(xs)
        for k in range(int(start), 0, -1):
            below = k * inv * cur - above        # J_{k-1}
            above, cur = cur, below
            order = k - 1
            if order % 2 == 0 and order > 0:
                norm += 2.0 * cur
            if order >= n and (order - n) % 2 == 0:
                acc += (1.0 if order == n else 2.0) * cur
            if k % stride == 0 and np.max(np.abs(cur)) > 1e200:
                big = np.abs(cur) > 1e200
                for arr in (cur, above, norm, acc):
                    arr[big] *= 1e-200
        norm += cur
        out[idx] = acc / norm
    return out


def fb_tail(n: int, x):
    """``n * int_x^inf J_n(t)/t dt`` in closed form (``n >= 1``).

    Equals ``1 - J_n(x) - 2 sum_{j>=1} J_{n+2j}(x)``.  For even ``n`` the
    Neumann identity ``J_0 + 2 sum J_2k = 1`` collapses this to a finite
    sum of lower orders; odd ``n`` sums the series from a Miller pass.
    """
    n = abs(int(n))
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.zeros_like(x)[()]
    if n % 2 == 0:
        J = bessel_j_orders(n, x)
        out = J[0] + J[n]
        for j in range(1, n // 2):
            out = out + 2.0 * J[2 * j]
    else:
        xf = x.ravel()
        out = np.ones_like(xf)
        pos = xf > 0
        if pos.any():
            out[pos] = 1.0 - _odd_ladder_sum(n, xf[pos])
        out = out.reshape(x.shape)
    return out[()] if np.ndim(out) == 0 else out


def tail_split(n: int, w0: float, kappa_max: float) -> float:
    """Wavenumber beyond which ``d_n`` is replaced by its large-kappa expansion."""
    return max(kappa_max, TAIL_SPLIT * (abs(n) + 2) / w0)


def fb_tail_series(n: int, K: float, rho, w0: float, tails=None):
    """``int_K^inf [n/kappa - n(n^2-4)/(2 w0^2 kappa^3)] J_n(kappa rho) dkappa``.

    The two leading terms of the large-kappa expansion of ``d_n``.  The
    cubic term is reduced with ``J_n/t = (J_{n-1} + J_{n+1})/(2n)`` to
    first-order tails of orders ``n-2, n, n+2``; it vanishes for n = 2, and
    n = 1 needs one integration by parts.  ``tails`` may map
    orders to precomputed :func:`fb_tail` arrays at ``x = K rho``.
    """
    n = abs(int(n))
    rho = np.asarray(rho, dtype=float)
    if n == 0:
        return np.zeros_like(rho)
    x = K * rho

    def T(j):
        if tails is not None and j in tails:
            return tails[j]
        return fb_tail(j, x)

    out = T(n)
    if n >= 3:
        A = {j: T(j) / j for j in (n - 2, n, n + 2)}
        inv3 = ((A[n - 2] + A[n]) / (n - 1) + (A[n] + A[n + 2]) / (n + 1)) / (4.0 * n)
        c3 = -n * (n * n - 4) / (2.0 * w0 * w0)
        out = out + c3 * rho * rho * inv3
    elif n == 1:
        # int_x^inf J_0/t^2 = J_0(x)/x - A_1 by parts; rho^2 J_0(x)/x written as rho J_0(x)/K
        A1, A3 = T(1), T(3) / 3.0
        c3 = 3.0 / (2.0 * w0 * w0)
        out = out + 0.5 * c3 * (rho * bessel_j(0, x) / K + rho * rho * (0.25 * A3 - 0.75 * A1))
    return out


def fb_reconstruct(mp: int, rho: float, w0: float, kappa_max: float,
                   tail: bool = True) -> float:
    """Rebuild the Gaussian at radius ``rho`` from its order-``m'`` coefficients.

    With ``tail=False`` this is ``int_0^kappa_max d_{m'} J_{m'}(kappa rho) dkappa``
    by composite Gauss-Legendre quadrature.  With ``tail=True`` the
    integral is carried to infinity: quadrature up to a split point
    (at least ``kappa_max``), then the leading ``|m'|/kappa`` behaviour of
    ``d`` is integrated in closed form.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    if not kappa_max > 0:
        raise ValueError("kappa_max must be positive")
    n = abs(int(mp))
    top = tail_split(n, w0, kappa_max) if (tail and n) else kappa_max
    width = 2.0 * math.pi / (rho + w0) / 2.0
    kap, wts = panel_rule(0.0, top, width)
    d = d_coefficients(n, kap, w0)[n]
    val = float(np.sum(wts * d * bessel_j(n, kap * rho)))
    if tail and n:
        val += float(fb_tail_series(n, top, rho, w0))
    return val
