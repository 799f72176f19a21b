"""Stokes-wedge geometry for H = p^2 + x^2 (ix)^eps and contour planning.

Angles are in radians throughout. A wedge is the open sector
``(center - half_opening, center + half_opening)`` taken modulo 2*pi.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError

DEFAULT_DECAY_TARGET = 30.0


def _principal(theta: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    t = math.remainder(theta, 2.0 * math.pi)
    if t == -math.pi:
        t = math.pi
    return t


@dataclass(frozen=True)
class StokesWedge:
    center: float
    half_opening: float

    def __post_init__(self):
        if not 0.0 < self.half_opening <= math.pi / 2:
            raise DomainError(f"half_opening must lie in (0, pi/2], got {self.half_opening}")

    @property
    def opening(self) -> float:
        return 2.0 * self.half_opening

    def contains(self, theta: float) -> bool:
        return contains(self, theta)


@dataclass(frozen=True)
class WedgePair:
    left: StokesWedge
    right: StokesWedge
    epsilon: float
    branch: int = 0


@dataclass(frozen=True)
class Contour:
    """Polyline through the complex plane; arms are the pieces either side of ``match_index``."""

    vertices: tuple[complex, ...]
    match_index: int
    radius: float

    @property
    def left_arm(self) -> tuple[complex, ...]:
        """Vertices from the left endpoint to the matching vertex."""
        return self.vertices[: self.match_index + 1]

    @property
    def right_arm(self) -> tuple[complex, ...]:
        """Vertices from the right endpoint back to the matching vertex."""
        return tuple(reversed(self.vertices[self.match_index:]))

    @property
    def match_point(self) -> complex:
        return self.vertices[self.match_index]


def contains(wedge: StokesWedge, theta: float) -> bool:
    """True iff ``theta`` lies in the open wedge, modulo 2*pi."""
    d = math.remainder(theta - wedge.center, 2.0 * math.pi)
    return abs(d) < wedge.half_opening


def wedge_geometry(epsilon: float, branch: int = 0) -> WedgePair:
    """Return the PT-symmetric wedge pair for ``epsilon``, rotated by ``branch`` steps.

    Branch 0 continues the real-axis wedges of the harmonic oscillator. Each
    branch step rotates both wedges by one full wedge width 2*pi/(eps+4); at
    eps=0, branch 1 gives the wedges on the imaginary axes.
    """
    if not epsilon >= 0.0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    half = math.pi / (epsilon + 4.0)
    right0 = -epsilon * math.pi / (2.0 * epsilon + 8.0)
    left0 = -math.pi - right0
    shift = branch * 2.0 * math.pi / (epsilon + 4.0)
    return WedgePair(
        left=StokesWedge(_principal(left0 + shift), half),
        right=StokesWedge(_principal(right0 + shift), half),
        epsilon=float(epsilon),
        branch=int(branch),
    )


def contour_radius(epsilon: float, energy_hint: float = 1.0,
                   decay_target: float = DEFAULT_DECAY_TARGET) -> float:
    """Smallest R with (2/(eps+4)) R^((eps+4)/2) >= decay_target and R^2 >= 4|E|."""
    if not decay_target > 0.0:
        raise DomainError(f"decay_target must be positive, got {decay_target}")
    p = (epsilon + 4.0) / 2.0
    r_decay = (p * decay_target) ** (1.0 / p)
    r_turn = 2.0 * math.sqrt(abs(energy_hint))
    return max(r_decay, r_turn)


def _scaled_potential(z: complex, epsilon: float) -> complex:
    if z == 0:
        return 0j
    return z * z * cmath.exp(epsilon * cmath.log(1j * z))


def _phase_integral(epsilon: float, t: float) -> complex:
    """int sqrt(1 - V(z)) dz from the right turning point e^{-i eps pi/(2eps+4)} to -i t."""
    z0 = cmath.exp(-1j * epsilon * math.pi / (2.0 * epsilon + 4.0))
    d = -1j * t - z0

    def f(u):
        # z = z0 + u^2 d removes the square-root singularity at the turning point
        z = z0 + u * u * d
        return cmath.sqrt(1.0 - _scaled_potential(z, epsilon)) * d * 2.0 * u

    re = quad(lambda u: f(u).real, 0.0, 1.0, limit=200, epsabs=1e-13)[0]
    im = quad(lambda u: f(u).imag, 0.0, 1.0, limit=200, epsabs=1e-13)[0]
    return complex(re, im)


@lru_cache(maxsize=128)
def matching_depth(epsilon: float) -> float:
    """Depth t of the matching point -i t E^(1/(eps+2)) below the origin (branch 0).

    In the scaled variable z = x / E^(1/(eps+2)) the two turning points sit at
    |z| = 1, angles -eps*pi/(2eps+4) and its mirror. The line on which the
    phase integral from a turning point stays real crosses the imaginary axis
    at -i t; matching there keeps the two oscillatory WKB components of equal
    size, so the Wronskian does not shrink exponentially with E.
    """
    if epsilon == 0:
        return 0.0
    g = lambda t: _phase_integral(epsilon, t).imag  # noqa: E731
    hi = 1.5
    if g(0.0) * g(hi) > 0:
        return math.sin(epsilon * math.pi / (2.0 * epsilon + 4.0))
    return brentq(g, 0.0, hi, xtol=1e-12)


def matching_point(pair: WedgePair, energy_hint: float) -> complex:
    """Matching vertex for energies near ``energy_hint`` (the origin at eps = 0)."""
    depth = matching_depth(pair.epsilon)
    if depth == 0.0 or energy_hint == 0:
        return 0j
    base = -1j * depth * abs(energy_hint) ** (1.0 / (pair.epsilon + 2.0))
    return base * cmath.exp(1j * pair.branch * 2.0 * math.pi / (pair.epsilon + 4.0))


def plan_contour(pair: WedgePair, energy_hint: float = 1.0,
                 decay_target: float = DEFAULT_DECAY_TARGET) -> Contour:
    """Two straight arms from the wedge bisectors at radius R to the matching vertex."""
    r = contour_radius(pair.epsilon, energy_hint, decay_target)
    left = cmath.rect(r, pair.left.center)
    right = cmath.rect(r, pair.right.center)
    return Contour(vertices=(left, matching_point(pair, energy_hint), right), match_index=1, radius=r)
