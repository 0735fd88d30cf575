"""Phase-singularity detection on sampled complex fields.

Each 2x2 plaquette of the grid gets a winding number: the four phase
increments along its edges, each wrapped into (-pi, pi], summed
counterclockwise and divided by 2 pi.  Edge increments are computed once
and shared by neighbouring plaquettes, so the winding of any region equals
the winding along its boundary exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .propagation import FieldGrid

DEFAULT_RELATIVE_FLOOR = 1e-6


@dataclass(frozen=True)
class Vortex:
    """One singular plaquette.

    ``x, y`` is the plaquette center; ``x_refined, y_refined`` is where the
    bilinear interpolants of Re and Im vanish together (the center if they
    do not inside the plaquette).
    """

    x: float
    y: float
    charge: int
    i: int = -1
    j: int = -1
    x_refined: float = math.nan
    y_refined: float = math.nan


@dataclass(frozen=True)
class VortexSet:
    vortices: tuple
    n: int
    extent: float
    z: float
    intensity_floor: float
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.vortices)

    @property
    def charges(self) -> np.ndarray:
        return np.array([v.charge for v in self.vortices], dtype=int)

    @property
    def positions(self) -> np.ndarray:
        return np.array([(v.x, v.y) for v in self.vortices], dtype=float).reshape(-1, 2)


def _wrap(a):
    # into (-pi, pi]
    return np.where(a <= -math.pi, a + 2 * math.pi, a)


def wrapped_edges(samples: np.ndarray):
    """Phase increments along grid edges, wrapped into (-pi, pi].

    Returns ``(dh, dv)`` with ``dh[j, i] = arg(s[j, i+1] / s[j, i])`` and
    ``dv[j, i] = arg(s[j+1, i] / s[j, i])``.
    """
    s = np.asarray(samples, dtype=complex)
    dh = _wrap(np.angle(s[:, 1:] * np.conj(s[:, :-1])))
    dv = _wrap(np.angle(s[1:, :] * np.conj(s[:-1, :])))
    return dh, dv


def winding_map(grid: FieldGrid) -> np.ndarray:
    """Winding number of every plaquette; entry ``[j, i]`` spans ``x_i..x_{i+1}, y_j..y_{j+1}``."""
    dh, dv = wrapped_edges(grid.samples)
    total = dh[:-1, :] + dv[:, 1:] - dh[1:, :] - dv[:, :-1]
    return np.rint(total / (2 * math.pi)).astype(int)


def plaquette_winding(grid: FieldGrid, i: int, j: int) -> int:
    """Winding around the plaquette with lower-left corner ``(x_i, y_j)``."""
    n = grid.n
    if not (0 <= i <= n - 2 and 0 <= j <= n - 2):
        raise IndexError("plaquette index out of range")
    s = grid.samples
    ring = [s[j, i], s[j, i + 1], s[j + 1, i + 1], s[j + 1, i], s[j, i]]
    total = 0.0
    for a, b in zip(ring[:-1], ring[1:]):
        total += float(_wrap(np.angle(b * np.conj(a))))
    return int(round(total / (2 * math.pi)))


def _refine(samples, jj, ii):
    """Common zero of the bilinear Re/Im interpolants, by Newton from the center."""
    s00 = samples[jj, ii]
    s10 = samples[jj, ii + 1]
    s01 = samples[jj + 1, ii]
    s11 = samples[jj + 1, ii + 1]
    u = np.full(ii.shape, 0.5)
    v = np.full(ii.shape, 0.5)
    a = s00
    bu = s10 - s00
    bv = s01 - s00
    c = s11 - s10 - s01 + s00
    for _ in range(20):
        f = a + bu * u + bv * v + c * u * v
        fu = bu + c * v
        fv = bv + c * u
        # complex equation f = 0 as a 2x2 real system
        det = fu.real * fv.imag - fv.real * fu.imag
        ok = np.abs(det) > 1e-300
        safe = np.where(ok, det, 1.0)
        du = (f.real * fv.imag - fv.real * f.imag) / safe
        dv = (fu.real * f.imag - f.real * fu.imag) / safe
        u = np.where(ok, u - du, u)
        v = np.where(ok, v - dv, v)
    inside = (u >= 0) & (u <= 1) & (v >= 0) & (v <= 1) & np.isfinite(u) & np.isfinite(v)
    return np.where(inside, u, 0.5), np.where(inside, v, 0.5)


def detect_vortices(grid: FieldGrid, intensity_floor: float | None = None) -> VortexSet:
    """All plaquettes with nonzero winding whose brightest corner exceeds the floor.

    ``intensity_floor`` is absolute; ``None`` means ``1e-6`` times the peak
    intensity.  Output is sorted by ``(y, x)``.
    """
    inten = np.abs(grid.samples) ** 2
    if intensity_floor is None:
        intensity_floor = DEFAULT_RELATIVE_FLOOR * float(inten.max())
    W = winding_map(grid)
    corner_max = np.maximum.reduce([inten[:-1, :-1], inten[:-1, 1:], inten[1:, :-1], inten[1:, 1:]])
    jj, ii = np.nonzero((W != 0) & (corner_max > intensity_floor))
    xs = grid.coords
    h = grid.spacing
    u, v = _refine(grid.samples, jj, ii)
    cx = 0.5 * (xs[ii] + xs[ii + 1])
    cy = 0.5 * (xs[jj] + xs[jj + 1])
    rx = xs[ii] + u * h
    ry = xs[jj] + v * h
    order = np.lexsort((cx, cy))
    vort = tuple(Vortex(float(cx[t]), float(cy[t]), int(W[jj[t], ii[t]]), int(ii[t]), int(jj[t]),
                        float(rx[t]), float(ry[t])) for t in order)
    return VortexSet(vort, grid.n, grid.extent, grid.z, float(intensity_floor))


def net_charge(vset: VortexSet, radius: float) -> int:
    """Total charge of detected vortices whose plaquette center lies within ``radius``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    return int(sum(v.charge for v in vset.vortices if math.hypot(v.x, v.y) < radius))


def _region(grid: FieldGrid, radius: float) -> np.ndarray:
    xs = grid.coords
    c = 0.5 * (xs[1:] + xs[:-1])
    CX, CY = np.meshgrid(c, c)
    return np.hypot(CX, CY) < radius


def loop_winding(grid: FieldGrid, radius: float) -> int:
    """Phase winding along the boundary of the plaquettes centered within ``radius``.

    Sums the wrapped edge increments on the region boundary only, so it is
    independent of the per-plaquette count and of any intensity floor.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    dh, dv = wrapped_edges(grid.samples)
    inside = _region(grid, radius).astype(int)
    pad = np.pad(inside, 1)
    # horizontal edge (row j, col i): +1 from plaquette (j, i), -1 from plaquette (j-1, i)
    coef_h = pad[1:, 1:-1] - pad[:-1, 1:-1]
    # vertical edge (row j, col i): +1 from plaquette (j, i-1), -1 from plaquette (j, i)
    coef_v = pad[1:-1, :-1] - pad[1:-1, 1:]
    total = float(np.sum(coef_h * dh) + np.sum(coef_v * dv))
    return int(round(total / (2 * math.pi)))


def region_winding_sum(grid: FieldGrid, radius: float) -> int:
    """Sum of all plaquette windings centered within ``radius`` (no intensity floor)."""
    return int(winding_map(grid)[_region(grid, radius)].sum())


def sleeve_vortices(vset: VortexSet, alpha: float, half_width: float, r_min: float = 0.0):
    """Vortices within ``half_width`` of the ray at azimuth ``alpha``, ordered along it."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    picked = []
    for v in vset.vortices:
        along = v.x * ca + v.y * sa
        across = -v.x * sa + v.y * ca
        if along > 0 and abs(across) < half_width and math.hypot(v.x, v.y) >= r_min:
            picked.append((along, v))
    picked.sort(key=lambda t: t[0])
    return [v for _, v in picked]


def alternating_pairs(chain):
    """Adjacent members of an ordered chain with opposite charges ``+1`` and ``-1``."""
    pairs = []
    for a, b in zip(chain[:-1], chain[1:]):
        if {a.charge, b.charge} == {1, -1}:
            pairs.append((a, b))
    return pairs
