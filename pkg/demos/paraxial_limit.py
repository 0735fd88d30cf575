"""Exact versus paraxial radial kernels, and the paraxial pattern rotation.

Run ``python demos/paraxial_limit.py``.  For a wide beam (k w0 = 1e4) the
exact and paraxial kernels agree closely; for k w0 = 100 they separate.
The second part prints a relative phase across each ring; it drifts with
distance by different amounts at different radii, so the phase pattern
does not turn rigidly.
"""
import numpy as np

from fracoam.propagation import PropagationConfig, field_at, radial_kernels


def main():
    for k in (1e2, 1e4):
        cfg = PropagationConfig(M=0.0, k=k, kz=5.0)
        e = radial_kernels([0, 3, 10], [0.5, 1.0, 1.5], cfg)
        p = radial_kernels([0, 3, 10], [0.5, 1.0, 1.5], cfg.with_(regime="paraxial"))
        print(f"k w0 = {k:g}: max relative kernel difference {np.max(np.abs(e - p) / np.abs(p)):.2e}")

    print("\nPhase of psi(r, pi/2) / psi(r, -pi/2) on rings (paraxial, k w0 = 1e4)")
    for kz in (1.0, 50.0, 200.0):
        cfg = PropagationConfig(M=3.5, k=1e4, kz=kz, regime="paraxial")
        r = np.array([0.05, 0.2, 0.8])
        up, down = field_at(cfg, 0.0 * r, r), field_at(cfg, 0.0 * r, -r)
        rel = np.angle(up / down)
        print(f"  kz = {kz:5g}: " + "  ".join(f"r={a:<4g} {b:+.4f}" for a, b in zip(r, rel)))


if __name__ == "__main__":
    main()
