"""Fractional orbital angular momentum states and beams.

Modules
-------
bp_space
    Finite-dimensional angle space with explicit state vectors.
analytic
    Closed-form overlaps, OAM spectra, mean and rotations.
specfun
    Bessel functions, beam-expansion coefficients and their tails.
propagation
    Radial kernels and propagated fields on Cartesian grids.
vortex
    Phase-singularity detection and winding diagnostics.
formats, cli
    File formats and the ``frac-oam`` command line.
"""
__version__ = "0.1.0"
