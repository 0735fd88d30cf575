"""Overlaps, OAM spectra and moments of fractional OAM states.

Run ``python demos/overlap_and_spectrum.py``; everything prints to stdout.
"""
import math

import numpy as np

from fracoam.analytic import oam_mean, oam_variance_truncated, overlap_probability, spectrum
from fracoam.bp_space import FractionalLabel, fractional_state, inner_product, make_space


def main():
    print("Overlap probability of |3.5(0)> with |3.5(beta)>")
    for beta in np.linspace(0, 2 * math.pi, 9):
        print(f"  beta = {beta:5.3f}  P = {overlap_probability(3.5, 3.5, beta):.6f}")

    print("\nSame overlap from the finite angle space (L = 2000)")
    space = make_space(2000)
    a = fractional_state(space, FractionalLabel.from_M(3.5, 0.0))
    b = fractional_state(space, FractionalLabel.from_M(3.5, math.pi))
    print(f"  |<a|b>|^2 = {abs(inner_product(a, b)) ** 2:.2e}")

    s = spectrum(3.5, 0.0, 0.0, 1e-4)
    print(f"\nSpectrum of M = 3.5: {len(s.entries)} modes above 1e-4, "
          f"m' from {s.m_values[0]} to {s.m_values[-1]}, tail {s.tail_probability:.2e}")
    for m, p in zip(s.m_values, s.probabilities):
        if p > 1e-2:
            print(f"  m' = {m:3d}  P = {p:.6f}")

    print("\nMean OAM, staircase with fixed points at integers and half-integers")
    for M in np.linspace(0, 2, 9):
        print(f"  M = {M:4.2f}  <m> = {oam_mean(M):.6f}")

    print("\nVariance of M = 3.5 keeps growing with the cutoff")
    for mmax in (10, 100, 1000, 10000):
        print(f"  |m'| <= {mmax:5d}  var = {oam_variance_truncated(3.5, mmax):.3f}")


if __name__ == "__main__":
    main()
