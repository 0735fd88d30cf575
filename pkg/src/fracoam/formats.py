"""Readers and writers for field CSV, spectra, vortex lists and raw images.

CSV files are UTF-8 with LF line endings, a header row and ``#``-prefixed
trailer comments.  Floats are written with 17 significant digits so a
float64 survives the round trip unchanged.  Images are binary PGM (P5,
16-bit big-endian) and PPM (P6, 8-bit), top row at the largest ``y``.
"""
from __future__ import annotations

import colorsys
import csv
import json
import math
import os
from datetime import datetime, timezone

import numpy as np

from .propagation import FieldGrid

FLOAT_FMT = "%.17g"


class MalformedInputError(ValueError):
    """Input file does not follow the expected layout."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def _fmt(v) -> str:
    return FLOAT_FMT % v


# ----------------------------------------------------------------- field CSV

def write_field_csv(path, grid: FieldGrid) -> None:
    """Columns ``x,y,re,im``, one row per sample, ``x`` varying fastest."""
    xs = grid.coords
    X, Y = np.meshgrid(xs, xs)
    table = np.column_stack([X.ravel(), Y.ravel(), grid.samples.real.ravel(), grid.samples.imag.ravel()])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,y,re,im\n")
        np.savetxt(fh, table, fmt=FLOAT_FMT, delimiter=",", newline="\n")
        fh.write(f"# n={grid.n}\n")
        fh.write(f"# extent={_fmt(grid.extent)}\n")
        fh.write(f"# z={_fmt(grid.z)}\n")
        fh.write(f"# k={_fmt(grid.k)}\n")


def read_field_csv(path) -> FieldGrid:
    """Inverse of :func:`write_field_csv`; raises :class:`MalformedInputError` with a line number."""
    rows = []
    meta = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = None
        for lineno, rec in enumerate(reader, start=1):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            first = rec[0].strip()
            if first.startswith("#"):
                text = ",".join(rec).lstrip("#").strip()
                if "=" in text:
                    key, _, val = text.partition("=")
                    meta[key.strip()] = (val.strip(), lineno)
                continue
            if header is None:
                header = [c.strip() for c in rec]
                if header != ["x", "y", "re", "im"]:
                    raise MalformedInputError("expected header x,y,re,im", lineno)
                continue
            if len(rec) != 4:
                raise MalformedInputError(f"expected 4 columns, found {len(rec)}", lineno)
            try:
                vals = [float(c) for c in rec]
            except ValueError:
                raise MalformedInputError("non-numeric value", lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise MalformedInputError("non-finite value", lineno)
            rows.append((vals, lineno))
    if header is None:
        raise MalformedInputError("missing header row", 1)
    count = len(rows)
    n = int(round(math.sqrt(count)))
    if n * n != count or n < 2:
        last = rows[-1][1] if rows else 1
        raise MalformedInputError(f"{count} samples do not form a square grid", last)
    data = np.array([r[0] for r in rows])

    def meta_float(key, default):
        if key not in meta:
            return default
        val, lineno = meta[key]
        try:
            return float(val)
        except ValueError:
            raise MalformedInputError(f"bad value for {key}", lineno) from None

    if "n" in meta and int(meta_float("n", n)) != n:
        raise MalformedInputError("row count does not match n", meta["n"][1])
    extent = meta_float("extent", float(np.max(np.abs(data[:, 0]))))
    z = meta_float("z", 0.0)
    k = meta_float("k", 1.0)
    xs = np.linspace(-extent, extent, n)
    X, Y = np.meshgrid(xs, xs)
    tol = 1e-9 * max(extent, 1.0)
    bad = np.nonzero((np.abs(data[:, 0] - X.ravel()) > tol) | (np.abs(data[:, 1] - Y.ravel()) > tol))[0]
    if bad.size:
        raise MalformedInputError("coordinates are not a row-major grid", rows[bad[0]][1])
    # assign parts separately so signed zeros survive
    samples = np.empty(count, dtype=complex)
    samples.real = data[:, 2]
    samples.imag = data[:, 3]
    samples = samples.reshape(n, n)
    return FieldGrid(n, extent, samples, z, k)


# ---------------------------------------------------------- other CSV tables

def write_spectrum_csv(fh, decomp) -> None:
    """Columns ``m,re_c,im_c,probability`` plus a ``# tail_probability=`` trailer."""
    fh.write("m,re_c,im_c,probability\n")
    for m, c in decomp.entries:
        fh.write(f"{m},{_fmt(c.real + 0.0)},{_fmt(c.imag + 0.0)},{_fmt(abs(c) ** 2)}\n")
    fh.write(f"# tail_probability={_fmt(decomp.tail_probability)}\n")


def write_vortex_csv(fh, vset, net: int) -> None:
    """Columns ``x,y,charge`` plus a ``# net_charge_within_radius=`` trailer."""
    fh.write("x,y,charge\n")
    for v in vset.vortices:
        fh.write(f"{_fmt(v.x)},{_fmt(v.y)},{v.charge}\n")
    fh.write(f"# net_charge_within_radius={int(net)}\n")


# -------------------------------------------------------------------- images

def write_pgm16(path, values: np.ndarray) -> None:
    """Max-normalized 16-bit grayscale; ``values[j, i]`` with row 0 at the bottom."""
    v = np.asarray(values, dtype=float)
    peak = float(v.max()) if v.size else 0.0
    scaled = np.zeros_like(v) if peak <= 0 else np.clip(v / peak, 0.0, 1.0)
    pix = np.rint(scaled[::-1] * 65535).astype(">u2")
    h, w = pix.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(pix.tobytes())


def phase_colors(phase: np.ndarray) -> np.ndarray:
    """8-bit RGB on the HSV hue circle, hue = phase / 2 pi at full saturation and value."""
    ph = np.asarray(phase, dtype=float)
    hue = np.mod(ph / (2 * math.pi), 1.0)
    # hue levels are quantized to 1/65536 of a turn before the lookup
    levels = np.rint(hue * 65536).astype(np.int64) % 65536
    uniq, inv = np.unique(levels, return_inverse=True)
    table = np.array([colorsys.hsv_to_rgb(u / 65536.0, 1.0, 1.0) for u in uniq]).reshape(-1, 3)
    rgb = np.rint(table * 255).astype(np.uint8)
    return rgb[inv.reshape(-1)].reshape(ph.shape + (3,))


def write_ppm_phase(path, phase: np.ndarray) -> None:
    """Phase map as binary P6 with a cyclic hue wheel (0 and 2 pi share a color)."""
    rgb = phase_colors(np.asarray(phase)[::-1])
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb).tobytes())


# ------------------------------------------------------------------ manifest

def write_manifest(path, payload: dict) -> None:
    """JSON manifest; the ``created`` timestamp is the only nondeterministic field.

    ``SOURCE_DATE_EPOCH`` in the environment pins the timestamp, which makes
    repeated runs byte-identical.
    """
    body = dict(payload)
    epoch = os.environ.get("SOURCE_DATE_EPOCH", "").strip()
    if epoch.isdigit():
        when = datetime.fromtimestamp(int(epoch), timezone.utc)
    else:
        when = datetime.now(timezone.utc)
    body["created"] = when.isoformat(timespec="seconds")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")
