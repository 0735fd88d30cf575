"""Propagation of a Gaussian beam carrying a fractional phase step.

The initial field ``G(rho) exp(i M phi)`` (with its 2 pi wrap at azimuth
``alpha``) is expanded in integer modes ``c_{m'} exp(i m' phi)``; each mode
carries the radial profile ``int d_{|m'|}(kappa) J_{|m'|}(kappa rho) Phi(kappa) dkappa``
where ``Phi`` is the free-space propagation factor.

Three evaluation routes for the radial kernels:

* ``z = 0``: Gauss-Legendre quadrature up to a split point, then the
  leading ``n/kappa`` tail of ``d_n`` integrated in closed form.
* exact, ``z > 0``: quadrature over the propagating band (``kappa < k``,
  substitution ``kappa = k sin t``) and the evanescent band (``kappa > k``,
  ``kappa = k cosh s`` near the branch point, then plain ``kappa``) up to
  the point where ``exp(-z sqrt(kappa^2 - k^2))`` is negligible.
* paraxial, ``z > 0``: closed form in terms of modified Bessel functions
  of complex argument.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import ive

from .analytic import SpectralDecomposition, spectrum
from .bp_space import TWO_PI, wrap_angle
from .quadrature import panel_count, panel_rule
from .specfun import bessel_j_orders, d_coefficients, fb_tail, fb_tail_series, tail_split

REGIMES = ("exact", "paraxial")
MAX_NODES = 8_000_000          # quadrature node budget per kernel evaluation
MAX_REFINE_STEPS = 4
INTERP_TOL = 1e-5              # allowed cubic-spline error on the radial table
TABLE_SEGMENTS = 32
LARGE_ARGUMENT = 1e8
TABLE_MAX_LEVEL = 6            # at most 2**6 spacing halvings per segment
_BLOCK_ELEMENTS = 16_000_000   # cap on J-table size per work item


class ConvergenceError(RuntimeError):
    """Kernel quadrature did not reach the requested tolerance within budget."""

    def __init__(self, message, mp=None, rho=None):
        super().__init__(message)
        self.mp = mp
        self.rho = rho


@dataclass(frozen=True)
class PropagationConfig:
    """Everything that defines one propagated field."""

    M: float
    alpha: float = 0.0
    k: float = 100.0
    w0: float = 1.0
    kz: float = 1.0
    regime: str = "exact"
    spectrum_threshold: float = 1e-4
    grid_n: int = 401
    extent: float = 3.0
    kappa_max_factor: float = 40.0
    quadrature_tol: float = 1e-8

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if not (self.k > 0 and self.w0 > 0):
            raise ValueError("k and w0 must be positive")
        if not self.kz >= 0:
            raise ValueError("kz must be nonnegative")
        if not 0.0 < self.spectrum_threshold < 1.0:
            raise ValueError("spectrum_threshold must lie in (0, 1)")
        if int(self.grid_n) != self.grid_n or self.grid_n < 3 or self.grid_n % 2 == 0:
            raise ValueError("grid_n must be an odd integer >= 3")
        if not self.extent > 0:
            raise ValueError("extent must be positive")
        if not self.kappa_max_factor > 0:
            raise ValueError("kappa_max_factor must be positive")
        if not 0.0 < self.quadrature_tol < 1.0:
            raise ValueError("quadrature_tol must lie in (0, 1)")
        if not 0.0 <= self.alpha < TWO_PI:
            raise ValueError("alpha must lie in [0, 2pi)")
        object.__setattr__(self, "grid_n", int(self.grid_n))

    @property
    def z(self) -> float:
        return self.kz / self.k

    @property
    def kappa_max(self) -> float:
        return self.kappa_max_factor / self.w0

    def with_(self, **changes) -> "PropagationConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Complex field on an ``n x n`` Cartesian grid.

    ``samples[j, i]`` is the field at ``(x_i, y_j)`` with
    ``x_i = y_i = -extent + 2 extent i/(n-1)``; rows run along ``y``.
    """

    n: int
    extent: float
    samples: np.ndarray
    z: float
    k: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.n, self.n):
            raise ValueError(f"samples must have shape ({self.n}, {self.n})")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def coords(self) -> np.ndarray:
        return grid_coords(self.n, self.extent)

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / (self.n - 1)


def grid_coords(n: int, extent: float) -> np.ndarray:
    return np.linspace(-extent, extent, n)


# ------------------------------------------------------------- initial field

def initial_field(x, y, M: float, alpha: float = 0.0, w0: float = 1.0):
    """Gaussian of width ``w0`` times ``exp(i M phi)`` with the wrap at azimuth ``alpha``.

    Azimuth is measured in ``[0, 2 pi)``; the phase is
    ``exp(i M phi - i mu alpha)`` for ``phi >= alpha`` and picks up an extra
    ``exp(2 pi i mu)`` for ``0 < phi < alpha``.  The origin returns 1.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    alpha = wrap_angle(alpha)
    m = math.floor(M)
    mu = M - m
    rho2 = x * x + y * y
    phi = np.mod(np.arctan2(y, x), TWO_PI)
    phi = np.where(phi >= TWO_PI, 0.0, phi)
    f = (phi > 0.0) & (phi < alpha)
    val = np.exp(-rho2 / (2.0 * w0 * w0)) * np.exp(1j * (M * phi - mu * alpha + TWO_PI * mu * f))
    val = np.where(rho2 == 0.0, 1.0 + 0.0j, val)
    return val[()] if val.ndim == 0 else val


# --------------------------------------------------------- quadrature nodes

def _exact_segments(k, z, w0, rho_max, tol, refine):
    """Nodes, weights and propagation factors for the exact kernel at ``z > 0``."""
    rm = rho_max if rho_max > 0 else w0
    lam = math.log(1.0 / tol) + 5.0
    ktop = math.sqrt(k * k + (lam / z) ** 2)
    parts = []
    # propagating band, kappa < k/2: plain kappa
    wa = TWO_PI / (rm + z / math.sqrt(3.0) + w0) / refine
    kap, wt = panel_rule(0.0, 0.5 * k, wa)
    parts.append((kap, wt, np.exp(1j * z * np.sqrt(k * k - kap * kap))))
    # propagating band near the branch point: kappa = k sin t
    wt_t = min(math.pi / 6, TWO_PI / (k * (rm + z + w0))) / refine
    t, wt = panel_rule(math.pi / 6, math.pi / 2, wt_t)
    parts.append((k * np.sin(t), wt * k * np.cos(t), np.exp(1j * k * z * np.cos(t))))
    # evanescent band near the branch point: kappa = k cosh s
    s1 = math.acosh(min(2.0, ktop / k))
    if s1 > 0:
        ws = min(s1, TWO_PI / (k * (math.sqrt(3.0) * rm + 2.0 * z + w0))) / refine
        s, wt = panel_rule(0.0, s1, ws)
        parts.append((k * np.cosh(s), wt * k * np.sinh(s), np.exp(-k * z * np.sinh(s))))
    # far evanescent band
    if ktop > 2.0 * k:
        wc = min(TWO_PI / (rm + w0), 4.0 / z) / refine
        kap, wt = panel_rule(2.0 * k, ktop, wc)
        parts.append((kap, wt, np.exp(-z * np.sqrt(kap * kap - k * k))))
    return tuple(np.concatenate(p) for p in zip(*parts))


def _exact_node_count(k, z, w0, rho_max, tol, refine):
    rm = rho_max if rho_max > 0 else w0
    lam = math.log(1.0 / tol) + 5.0
    ktop = math.sqrt(k * k + (lam / z) ** 2)
    n = panel_count(0.0, 0.5 * k, TWO_PI / (rm + z / math.sqrt(3.0) + w0) / refine)
    n += panel_count(math.pi / 6, math.pi / 2,
                     min(math.pi / 6, TWO_PI / (k * (rm + z + w0))) / refine)
    s1 = math.acosh(min(2.0, ktop / k))
    if s1 > 0:
        n += panel_count(0.0, s1, min(s1, TWO_PI / (k * (math.sqrt(3.0) * rm + 2.0 * z + w0))) / refine)
    if ktop > 2.0 * k:
        n += panel_count(2.0 * k, ktop, min(TWO_PI / (rm + w0), 4.0 / z) / refine)
    return 16 * n


def _static_segments(w0, rho_max, top, refine):
    rm = rho_max if rho_max > 0 else w0
    kap, wt = panel_rule(0.0, top, math.pi / (rm + w0) / refine)
    return kap, wt, np.ones_like(kap, dtype=complex)


def _thread_count(threads):
    if threads is None:
        env = os.environ.get("FRAC_OAM_THREADS", "0").strip() or "0"
        try:
            threads = int(env)
        except ValueError:
            threads = 0
    if threads <= 0:
        threads = os.cpu_count() or 1
    return max(1, threads)


def _quadrature_kernels(orders, rho, kap, wts, phi, w0, threads=None):
    """``sum_j w_j d_n(kappa_j) J_n(kappa_j rho) Phi_j`` for each order and radius."""
    orders = np.asarray(orders, dtype=int)
    rho = np.asarray(rho, dtype=float)
    nmax = int(orders.max())
    out = np.zeros((orders.size, rho.size), dtype=complex)
    block = max(1024, min(kap.size, _BLOCK_ELEMENTS // (nmax + 1)))
    rows = max(1, _BLOCK_ELEMENTS // ((nmax + 1) * block))
    node_blocks = [(b0, min(b0 + block, kap.size)) for b0 in range(0, kap.size, block)]
    row_blocks = [(r0, min(r0 + rows, rho.size)) for r0 in range(0, rho.size, rows)]

    nthreads = min(_thread_count(threads), len(row_blocks))
    pool = ThreadPoolExecutor(max_workers=nthreads) if nthreads > 1 else None
    try:
        # coefficients once per node block; each row block owns its slice of out
        for b0, b1 in node_blocks:
            kb = kap[b0:b1]
            D = d_coefficients(nmax, kb, w0)[orders] * (wts[b0:b1] * phi[b0:b1])
            Dr = np.ascontiguousarray(D.real.T)
            Di = np.ascontiguousarray(D.imag.T)

            def work(rb, kb=kb, Dr=Dr, Di=Di):
                r0, r1 = rb
                J = bessel_j_orders(nmax, np.multiply.outer(rho[r0:r1], kb))
                for i, n in enumerate(orders):
                    Jn = J[n]
                    out[i, r0:r1] += Jn @ Dr[:, i] + 1j * (Jn @ Di[:, i])

            if pool is None:
                for rb in row_blocks:
                    work(rb)
            else:
                list(pool.map(work, row_blocks))
    finally:
        if pool is not None:
            pool.shutdown()
    return out


# ------------------------------------------------------------ paraxial form

def _large_argument_ivediff(n, y, terms=12):
    """``ive((n-1)/2, y) - ive((n+1)/2, y)`` for ``|y|`` large and ``Im y >= 0``."""
    y = np.asarray(y, dtype=complex)
    nu1 = (n - 1) / 2.0
    nu2 = nu1 + 1.0
    dom = np.zeros(y.shape, dtype=complex)
    sub = np.zeros(y.shape, dtype=complex)
    a1 = a2 = 1.0
    yk = np.ones(y.shape, dtype=complex)
    for k in range(terms):
        if k:
            a1 *= (4.0 * nu1 * nu1 - (2 * k - 1) ** 2) / (8.0 * k)
            a2 *= (4.0 * nu2 * nu2 - (2 * k - 1) ** 2) / (8.0 * k)
            yk = yk * y
        dom = dom + (-1) ** k * (a1 - a2) / yk
        # exp(i pi nu2) = -exp(i pi nu1)
        sub = sub + (a1 + a2) / yk
    sub = 1j * np.exp(1j * math.pi * nu1) * sub * np.exp(-2.0 * y.real - 2j * y.imag)
    return (dom + sub) * np.exp(1j * y.imag) / np.sqrt(2.0 * math.pi * y)


def _small_argument_bdiff(n, b, q, y, terms=6):
    """``b (I_{(n-1)/2}(y) - I_{(n+1)/2}(y)) e^{-|Re y|}`` with ``y = b^2/(8q)`` by power series."""
    c = 1.0 / (16.0 * q)
    out = np.zeros(np.shape(b), dtype=complex)
    for nu, extra, sign in (((n - 1) / 2.0, 0, 1.0), ((n + 1) / 2.0, 2, -1.0)):
        for j in range(terms):
            coef = sign * c ** (2 * j + nu) / (math.factorial(j) * math.gamma(j + nu + 1.0))
            out = out + coef * b ** (n + extra + 4 * j)
    return out * np.exp(-np.abs(y.real))


def paraxial_kernel(n: int, rho, k: float, z: float, w0: float = 1.0):
    """Closed-form paraxial radial kernel of order ``n`` at ``z > 0``.

    Obtained by integrating ``d_n(kappa) J_n(kappa rho) exp(ikz - i kappa^2 z/(2k))``
    over ``kappa`` in closed form.
    """
    n = abs(int(n))
    rho = np.asarray(rho, dtype=float)
    if not z > 0:
        raise ValueError("the paraxial closed form needs z > 0")
    a = z / (2.0 * k)
    p = 1j * a
    q = 1.0 / (2.0 * w0 * w0) + 1.0 / (4.0 * p)
    b = rho / (2.0 * a)
    y = b * b / (8.0 * q)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        bdiff = b * (ive((n - 1) / 2.0, y) - ive((n + 1) / 2.0, y))
        large = np.abs(y) > LARGE_ARGUMENT
        if np.any(large):
            # past this the library routine gives up; the two-exponential expansion is exact to rounding
            bdiff = np.where(large, b * _large_argument_ivediff(n, y), bdiff)
        small = np.abs(y) < 1e-3
        if np.any(small):
            # near the axis y underflows and ive(-1/2, y) blows up; sum the series in b instead
            bdiff = np.where(small, _small_argument_bdiff(n, b, q, y), bdiff)
        H = math.sqrt(math.pi) / (8.0 * q ** 1.5) * bdiff * np.exp(-1j * y.imag)
        out = np.exp(1j * k * z) / (2.0 * p) * np.exp(-rho * rho / (4.0 * p)) * (1j) ** (-n) * H
    axis = rho == 0
    if np.any(axis):
        val = np.exp(1j * k * z) * w0 * w0 / (w0 * w0 + 1j * z / k) if n == 0 else 0.0
        out = np.where(axis, val, out)
    return out[()] if out.ndim == 0 else out


# ----------------------------------------------------------- kernel driver

class _KernelEngine:
    """Evaluates radial kernels for one configuration with a certified node set."""

    def __init__(self, orders, rho_max, config: PropagationConfig, threads=None):
        self.orders = np.unique(np.abs(np.asarray(orders, dtype=int)))
        self.config = config
        self.rho_max = float(rho_max)
        self.threads = threads
        self.refine = 1
        self.static = config.z == 0.0
        self.split = tail_split(int(self.orders.max()), config.w0, config.kappa_max)

    def nodes(self, refine):
        c = self.config
        if self.static:
            return _static_segments(c.w0, self.rho_max, self.split, refine)
        return _exact_segments(c.k, c.z, c.w0, self.rho_max, c.quadrature_tol, refine)

    def node_count(self, refine):
        c = self.config
        if self.static:
            rm = self.rho_max if self.rho_max > 0 else c.w0
            return 16 * panel_count(0.0, self.split, math.pi / (rm + c.w0) / refine)
        return _exact_node_count(c.k, c.z, c.w0, self.rho_max, c.quadrature_tol, refine)

    def evaluate(self, rho, refine=None):
        refine = self.refine if refine is None else refine
        rho = np.asarray(rho, dtype=float)
        kap, wts, phi = self.nodes(refine)
        out = _quadrature_kernels(self.orders, rho, kap, wts, phi, self.config.w0, self.threads)
        if self.static:
            x = self.split * rho
            needed = {j for n in self.orders if n for j in (n - 2, n, n + 2) if j >= 1}
            tails = {j: fb_tail(j, x) for j in sorted(needed)}
            for i, n in enumerate(self.orders):
                if n:
                    out[i] += fb_tail_series(int(n), self.split, rho, self.config.w0, tails)
        return out

    def certify(self, check_rho):
        """Double the panel density until two successive rules agree."""
        tol = self.config.quadrature_tol
        refine = 1
        err = None
        coarse = self.evaluate(check_rho, refine)
        for _ in range(MAX_REFINE_STEPS):
            if self.node_count(2 * refine) > MAX_NODES:
                break
            fine = self.evaluate(check_rho, 2 * refine)
            err = np.abs(fine - coarse)
            if err.max() <= tol:
                self.refine = refine
                return coarse, float(err.max())
            refine *= 2
            coarse = fine
        if err is None:
            i, j = self.orders.size - 1, int(np.argmax(check_rho))
        else:
            i, j = np.unravel_index(np.argmax(err), err.shape)
        raise ConvergenceError(
            f"radial kernel did not converge to {tol:g} within {MAX_NODES} nodes "
            f"(order {int(self.orders[i])}, rho {float(check_rho[j]):.6g})",
            mp=int(self.orders[i]), rho=float(check_rho[j]))


def radial_kernels(orders, rho, config: PropagationConfig, threads=None) -> np.ndarray:
    """Radial kernels for every ``|m'|`` in ``orders`` at every radius in ``rho``.

    Returns shape ``(len(unique |orders|), len(rho))`` with orders sorted.
    The panel density is doubled until successive rules agree to
    ``config.quadrature_tol`` on all requested radii (at most 16 of them
    are used for the check).
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(rho < 0):
        raise ValueError("rho must be nonnegative")
    orders = np.unique(np.abs(np.asarray(orders, dtype=int)))
    if config.regime == "paraxial" and config.z > 0:
        return np.array([paraxial_kernel(n, rho, config.k, config.z, config.w0) for n in orders])
    engine = _KernelEngine(orders, rho.max(), config, threads)
    pick = np.unique(np.linspace(0, rho.size - 1, min(rho.size, 16)).round().astype(int))
    checked, _ = engine.certify(rho[pick])
    if pick.size == rho.size:
        return checked
    return engine.evaluate(rho)


def radial_kernel(mp: int, rho: float, config: PropagationConfig) -> complex:
    """Radial profile of mode ``m'`` at radius ``rho`` after propagation by ``config.z``."""
    return complex(radial_kernels([mp], [rho], config)[0, 0])


def _segment_probes(level, per, nseg):
    """Off-table probe positions per segment, in units of the finest lattice step."""
    out = []
    for s in range(nseg):
        n = per << level[s]
        step = 1 << (TABLE_MAX_LEVEL - level[s])
        picks = {0, n // 3, (2 * n) // 3, n - 1} | ({1, 2} if s == 0 else set())
        base = s * (per << TABLE_MAX_LEVEL)
        out.append([2 * (base + j * step) + step for j in sorted(picks)])
    return out


def kernel_table(orders, rho_max: float, config: PropagationConfig, dx: float, threads=None):
    """Kernels on a graded radial table plus cubic splines through them.

    Returns ``(orders, rho_table, values, splines)``.  The range
    ``[0, rho_max]`` is cut into ``TABLE_SEGMENTS`` segments that start
    at spacing about ``dx``.  A segment's spacing is halved while the
    spline misses directly computed kernels at its off-table probes by
    more than ``INTERP_TOL``.
    """
    orders = np.unique(np.abs(np.asarray(orders, dtype=int)))
    if not rho_max > 0:
        raise ValueError("rho_max must be positive")
    engine = _KernelEngine(orders, rho_max, config, threads)
    nseg = TABLE_SEGMENTS
    width = rho_max / nseg
    per = max(4, int(math.ceil(width / dx)))
    unit = width / (per << TABLE_MAX_LEVEL)      # finest lattice step
    level = [0] * nseg
    cache = {}
    todo = set(range(nseg))

    def knots():
        idx = set()
        for s in range(nseg):
            step = 1 << (TABLE_MAX_LEVEL - level[s])
            base = s * (per << TABLE_MAX_LEVEL)
            idx.update(base + j * step for j in range((per << level[s]) + 1))
        return np.array(sorted(idx))

    probes = _segment_probes(level, per, nseg)
    pick = sorted({p for seg in probes for p in seg})
    certify_at = np.array(pick)[np.unique(np.linspace(0, len(pick) - 1, 16).round().astype(int))]
    engine.certify(0.5 * unit * certify_at)
    while True:
        idx = knots()
        missing = [i for i in idx if i not in cache]
        if missing:
            vals = engine.evaluate(unit * np.array(missing, dtype=float))
            for c, i in enumerate(missing):
                cache[i] = vals[:, c]
        table = unit * idx.astype(float)
        values = np.stack([cache[i] for i in idx], axis=1)
        splines = [CubicSpline(table, values[i]) for i in range(orders.size)]
        scale = max(1.0, float(np.abs(values).max()))
        probes = _segment_probes(level, per, nseg)
        segs = sorted(todo)
        where = np.array([p for s in segs for p in probes[s]], dtype=float) * 0.5 * unit
        direct = engine.evaluate(where)
        interp = np.array([sp(where) for sp in splines])
        err = np.abs(interp - direct).max(axis=0)
        todo = set()
        pos = 0
        for s in segs:
            e = err[pos:pos + len(probes[s])].max()
            pos += len(probes[s])
            if e > INTERP_TOL * scale:
                if level[s] == TABLE_MAX_LEVEL:
                    raise ConvergenceError("radial table interpolation did not reach tolerance",
                                           mp=int(orders[-1]), rho=float((s + 0.5) * width))
                level[s] += 1
                todo.update(t for t in (s - 1, s, s + 1) if 0 <= t < nseg)
        if not todo:
            return orders, table, values, splines


# -------------------------------------------------------------- propagation

def field_spectrum(config: PropagationConfig) -> SpectralDecomposition:
    return spectrum(config.M, config.alpha, 0.0, config.spectrum_threshold)


def _mode_sum(mvals, coeff, PHI, prof):
    out = np.zeros(PHI.shape, dtype=complex)
    for mp, c in zip(mvals, coeff):
        out += c * np.exp(1j * mp * PHI) * prof[abs(int(mp))]
    return out


def field_at(config: PropagationConfig, x, y, threads=None) -> np.ndarray:
    """Field at arbitrary transverse points ``(x, y)``.

    Same mode sum as :func:`propagate`, but every distinct radius gets a
    directly computed kernel instead of a table lookup.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    spec = field_spectrum(config)
    mvals = spec.m_values
    R = np.hypot(x, y)
    radii, inverse = np.unique(R, return_inverse=True)
    inverse = inverse.reshape(R.shape)
    orders = np.unique(np.abs(mvals))
    K = radial_kernels(orders, radii, config, threads)
    prof = {int(o): K[i][inverse] for i, o in enumerate(orders)}
    out = _mode_sum(mvals, spec.amplitudes, np.arctan2(y, x), prof)
    return out[()] if out.ndim == 0 else out


def propagate(config: PropagationConfig, threads=None) -> FieldGrid:
    """Field of the fractional beam on the configured grid after distance ``z``."""
    spec = field_spectrum(config)
    mvals = spec.m_values
    coeff = spec.amplitudes
    n = config.grid_n
    E = config.extent * config.w0
    xs = grid_coords(n, E)
    X, Y = np.meshgrid(xs, xs)
    R = np.hypot(X, Y)
    PHI = np.arctan2(Y, X)
    orders = np.unique(np.abs(mvals))
    if config.regime == "paraxial" and config.z > 0:
        radii, inverse = np.unique(R, return_inverse=True)
        inverse = inverse.reshape(R.shape)
        prof = {int(o): paraxial_kernel(o, radii, config.k, config.z, config.w0)[inverse]
                for o in orders}
    else:
        dx = 2.0 * E / (n - 1)
        orders, _, _, splines = kernel_table(orders, float(R.max()), config, dx, threads)
        prof = {int(o): splines[i](R) for i, o in enumerate(orders)}
    field_ = _mode_sum(mvals, coeff, PHI, prof)
    meta = {"modes": int(mvals.size), "tail_probability": spec.tail_probability}
    return FieldGrid(n, E, field_, config.z, config.k, meta)


def intensity(grid: FieldGrid) -> np.ndarray:
    """``|Psi|^2`` on the grid."""
    return np.abs(grid.samples) ** 2


def phase(grid: FieldGrid) -> np.ndarray:
    """``arg Psi`` reduced into ``[0, 2 pi)``."""
    ph = np.mod(np.angle(grid.samples), TWO_PI)
    return np.where(ph >= TWO_PI, 0.0, ph)
