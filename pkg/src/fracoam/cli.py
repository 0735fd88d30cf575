"""``frac-oam`` command-line front end.

Exit codes: 0 ok, 2 bad arguments, 3 I/O failure, 4 numerical
non-convergence, 5 malformed input file.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

from . import __version__
from .analytic import oam_mean, oam_variance_truncated, overlap, overlap_probability, spectrum
from .formats import (MalformedInputError, read_field_csv, write_field_csv, write_manifest,
                      write_pgm16, write_ppm_phase, write_spectrum_csv, write_vortex_csv)
from .propagation import ConvergenceError, PropagationConfig, intensity, phase, propagate
from .vortex import DEFAULT_RELATIVE_FLOOR, detect_vortices, net_charge

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CONVERGENCE = 4
EXIT_MALFORMED = 5

TWO_PI = 2.0 * math.pi


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(v: float) -> str:
    return f"{v + 0.0:.12f}"


def _angle(name, v):
    if not (math.isfinite(v) and 0.0 <= v < TWO_PI):
        raise UsageError(f"{name} must lie in [0, 2pi), got {v!r}")
    return v


def _finite(name, v):
    if not math.isfinite(v):
        raise UsageError(f"{name} must be finite, got {v!r}")
    return v


def _open_out(path):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _manifest(args, argv, config, outputs):
    return {
        "tool": "frac-oam",
        "version": __version__,
        "subcommand": args.command,
        "config": config,
        "argv": list(argv),
        "outputs": list(outputs),
    }


# ------------------------------------------------------------- subcommands

def cmd_overlap(args, argv):
    M = _finite("M", args.M)
    Mp = _finite("Mprime", args.Mprime)
    a = _angle("alpha", args.alpha)
    ap = _angle("alphaprime", args.alphaprime)
    t0 = _angle("theta0", args.theta0)
    amp = overlap(M, a, Mp, ap, t0)
    if M - math.floor(M) == Mp - math.floor(Mp):
        prob = overlap_probability(M, Mp, (a - ap) % TWO_PI)
    else:
        prob = abs(amp) ** 2
    print(f"overlap {_num(amp.real)} {_num(amp.imag)}")
    print(f"probability {_num(max(prob, 0.0))}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("M,alpha,Mprime,alphaprime,theta0,re,im,probability\n")
            fh.write(",".join("%.17g" % v for v in (M, a, Mp, ap, t0, amp.real + 0.0,
                                                     amp.imag + 0.0, prob)) + "\n")
        cfg = dict(M=M, alpha=a, Mprime=Mp, alphaprime=ap, theta0=t0)
        write_manifest(args.out + ".manifest.json", _manifest(args, argv, cfg, [args.out]))
    return EXIT_OK


def cmd_spectrum(args, argv):
    M = _finite("M", args.M)
    beta = _angle("beta", args.beta)
    t0 = _angle("theta0", args.theta0)
    if not 0.0 < args.threshold < 1.0:
        raise UsageError("threshold must lie in (0, 1)")
    dec = spectrum(M, beta, t0, args.threshold)
    fh, close = _open_out(args.out)
    try:
        write_spectrum_csv(fh, dec)
    finally:
        if close:
            fh.close()
    if close:
        cfg = dict(M=M, beta=beta, theta0=t0, threshold=args.threshold)
        write_manifest(args.out + ".manifest.json", _manifest(args, argv, cfg, [args.out]))
    return EXIT_OK


def cmd_mean(args, argv):
    print(f"{oam_mean(_finite('M', args.M)):.12g}")
    return EXIT_OK


def cmd_variance(args, argv):
    if args.mmax < 1:
        raise UsageError("mmax must be >= 1")
    print(f"{oam_variance_truncated(_finite('M', args.M), args.mmax):.12g}")
    return EXIT_OK


def cmd_propagate(args, argv):
    try:
        config = PropagationConfig(
            M=_finite("M", args.M), alpha=args.alpha, k=args.k, w0=args.w0, kz=args.kz,
            regime=args.regime, spectrum_threshold=args.threshold, grid_n=args.grid_n,
            extent=args.extent, kappa_max_factor=args.kappa_max_factor,
            quadrature_tol=args.quad_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    grid = propagate(config)
    p = args.out_prefix
    outputs = [f"{p}_field.csv", f"{p}_intensity.pgm", f"{p}_phase.ppm"]
    write_field_csv(outputs[0], grid)
    write_pgm16(outputs[1], intensity(grid))
    write_ppm_phase(outputs[2], phase(grid))
    cfg = dataclasses.asdict(config)
    cfg["modes"] = grid.meta.get("modes")
    cfg["tail_probability"] = grid.meta.get("tail_probability")
    write_manifest(f"{p}_manifest.json", _manifest(args, argv, cfg, outputs))
    return EXIT_OK


def cmd_vortices(args, argv):
    if not args.floor >= 0:
        raise UsageError("floor must be nonnegative")
    if not args.radius > 0:
        raise UsageError("radius must be positive")
    grid = read_field_csv(args.input)
    peak = float((abs(grid.samples) ** 2).max())
    vset = detect_vortices(grid, args.floor * peak)
    net = net_charge(vset, args.radius)
    fh, close = _open_out(args.out)
    try:
        write_vortex_csv(fh, vset, net)
    finally:
        if close:
            fh.close()
    if close:
        cfg = dict(input=args.input, floor=args.floor, radius=args.radius)
        write_manifest(args.out + ".manifest.json", _manifest(args, argv, cfg, [args.out]))
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="frac-oam", description="Fractional OAM states: overlaps, spectra, "
                 "beam propagation and vortex detection.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--from-manifest", metavar="PATH",
                    help="re-run the command recorded in a run manifest")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("overlap", help="overlap of two fractional states")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--Mprime", type=float, required=True)
    p.add_argument("--alphaprime", type=float, default=0.0)
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--out", help="optional CSV record of the result")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("spectrum", help="OAM spectrum above a probability threshold")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("mean", help="mean OAM")
    p.add_argument("--M", type=float, required=True)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("variance", help="OAM variance truncated at |m'| <= mmax")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--mmax", type=int, required=True)
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("propagate", help="propagate the beam and write field and images")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--k", type=float, default=100.0)
    p.add_argument("--w0", type=float, default=1.0)
    p.add_argument("--kz", type=float, default=1.0, help="dimensionless distance k*z")
    p.add_argument("--regime", choices=("exact", "paraxial"), default="exact")
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("--grid-n", type=int, default=401)
    p.add_argument("--extent", type=float, default=3.0, help="half-width in units of w0")
    p.add_argument("--kappa-max-factor", type=float, default=40.0)
    p.add_argument("--quad-tol", type=float, default=1e-8)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("vortices", help="detect phase singularities in a field CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--floor", type=float, default=DEFAULT_RELATIVE_FLOOR,
                   help="intensity floor relative to the peak")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    p.set_defaults(func=cmd_vortices)
    return ap


def _replay_argv(path):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    argv = data.get("argv")
    if not isinstance(argv, list) or not argv:
        raise MalformedInputError("manifest has no argv list")
    return [str(a) for a in argv]


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.from_manifest:
            if args.command:
                raise UsageError("--from-manifest takes no subcommand")
            argv = _replay_argv(args.from_manifest)
            args = parser.parse_args(argv)
        if not args.command:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return args.func(args, argv)
    except UsageError as exc:
        print(f"frac-oam: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MalformedInputError as exc:
        print(f"frac-oam: malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except ConvergenceError as exc:
        print(f"frac-oam: no convergence (m'={exc.mp}, rho={exc.rho}): {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"frac-oam: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
