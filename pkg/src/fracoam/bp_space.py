"""Finite-dimensional angle/OAM state space.

States live in a (2L+1)-dimensional space spanned by angle states
|theta_n> with theta_n = theta0 + 2*pi*n/(2L+1).  Amplitudes are stored in
the angle basis.  Everything here is a brute-force reference for the
closed-form results in :mod:`fracoam.analytic`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FiniteAngleSpace:
    """Angle space of dimension ``2L+1`` starting at ``theta0``."""

    L: int
    theta0: float = 0.0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 0:
            raise ValueError(f"L must be a nonnegative integer, got {self.L!r}")
        if not math.isfinite(self.theta0):
            raise ValueError("theta0 must be finite")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "theta0", float(self.theta0))

    @property
    def dimension(self) -> int:
        return 2 * self.L + 1

    @property
    def angles(self) -> np.ndarray:
        """Grid ``theta_n`` for ``n = 0..2L``."""
        n = np.arange(self.dimension)
        return self.theta0 + TWO_PI * n / self.dimension


@dataclass(frozen=True)
class FractionalLabel:
    """Descriptor of the state |M(alpha)>.

    Use :meth:`from_M` to build one; it splits ``M`` into integer and
    fractional parts and reduces ``alpha`` into ``[0, 2*pi)``.
    """

    M: float
    m: int
    mu: float
    alpha: float
    theta0: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"mu must lie in [0, 1), got {self.mu!r}")
        if not 0.0 <= self.alpha < TWO_PI:
            raise ValueError(f"alpha must lie in [0, 2pi), got {self.alpha!r}")
        if abs(self.m + self.mu - self.M) > 8 * np.spacing(max(abs(self.M), 1.0)):
            raise ValueError("M must equal m + mu")

    @classmethod
    def from_M(cls, M: float, alpha: float = 0.0, theta0: float = 0.0) -> "FractionalLabel":
        M = float(M)
        m = math.floor(M)
        mu = M - m
        if mu >= 1.0:
            # M a hair below an integer can round mu up to 1
            m, mu = m + 1, 0.0
        return cls(M=M, m=int(m), mu=mu, alpha=wrap_angle(alpha), theta0=float(theta0))

    @property
    def is_integer(self) -> bool:
        return self.mu == 0.0


def wrap_angle(a: float) -> float:
    """Reduce an angle into ``[0, 2*pi)``."""
    r = math.fmod(float(a), TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:
        r = 0.0
    return r


@dataclass(frozen=True, eq=False)
class StateVector:
    """State given by its amplitudes on the angle grid of ``space``."""

    amplitudes: np.ndarray
    space: FiniteAngleSpace

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.dimension,):
            raise ValueError(
                f"expected {self.space.dimension} amplitudes, got shape {amps.shape}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


def make_space(L: int, theta0: float = 0.0) -> FiniteAngleSpace:
    """Return the angle space with ``2L+1`` states starting at ``theta0``."""
    return FiniteAngleSpace(L, theta0)


def _indicator(space: FiniteAngleSpace, alpha: float) -> np.ndarray:
    # compare offsets from theta0 so the test does not depend on theta0 rounding
    offset = TWO_PI * np.arange(space.dimension) / space.dimension
    return ((offset > 0.0) & (offset < alpha)).astype(np.int64)


def branch_cut_indicator(space: FiniteAngleSpace, alpha: float, n: int) -> int:
    """Return 1 when ``theta0 < theta_n < theta0 + alpha`` and 0 otherwise.

    Both boundary points give 0.
    """
    if not 0 <= n < space.dimension:
        raise IndexError(f"grid index {n} outside 0..{space.dimension - 1}")
    offset = TWO_PI * n / space.dimension
    return int(0.0 < offset < alpha)


def fractional_state(space: FiniteAngleSpace, label: FractionalLabel) -> StateVector:
    """Build |M(alpha)> in the angle basis.

    The amplitude on |theta_n> is
    ``exp(-i mu alpha) exp(i M theta_n) exp(2 pi i mu f(theta_n)) / sqrt(2L+1)``
    where ``f`` is the branch-cut indicator.
    """
    if label.theta0 != space.theta0:
        raise ValueError("label.theta0 does not match the space")
    theta = space.angles
    f = _indicator(space, label.alpha)
    phase = -label.mu * label.alpha + label.M * theta + TWO_PI * label.mu * f
    amps = np.exp(1j * phase) / math.sqrt(space.dimension)
    return StateVector(amps, space)


def integer_state(space: FiniteAngleSpace, m: int) -> StateVector:
    """OAM eigenstate |m> in the angle basis."""
    return fractional_state(space, FractionalLabel.from_M(m, 0.0, space.theta0))


def angle_state(space: FiniteAngleSpace, k: int) -> StateVector:
    """Angle eigenstate |theta_k>."""
    amps = np.zeros(space.dimension, dtype=complex)
    amps[k] = 1.0
    return StateVector(amps, space)


def inner_product(u: StateVector, v: StateVector) -> complex:
    """<u|v>, conjugating the first argument."""
    if u.space != v.space:
        raise ValueError("states belong to different spaces")
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def angle_distribution(state: StateVector) -> np.ndarray:
    """Angle probabilities ``|<theta_n|psi>|^2``."""
    return np.abs(state.amplitudes) ** 2


def oam_amplitudes(state: StateVector, mvals) -> np.ndarray:
    """Project ``state`` on the integer OAM states |m'> for each ``m'`` in ``mvals``."""
    mvals = np.atleast_1d(np.asarray(mvals))
    theta = state.space.angles
    basis = np.exp(-1j * np.multiply.outer(mvals, theta)) / math.sqrt(state.space.dimension)
    return basis @ state.amplitudes
