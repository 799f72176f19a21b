"""Runge-Kutta integration of -psi'' + x^2 (ix)^eps psi = E psi along complex paths.

Each straight segment of a path is parameterized by arclength ``s`` so that
``x = a + s*u`` with ``|u| = 1``; the first-order system in ``s`` is then

    d psi / ds  = u * dpsi
    d dpsi / ds = u * (V(x) - E) * psi

Solutions grow like exp(|x|^((eps+4)/2)) along the arms, so the state is kept
as a mantissa pair plus an accumulated natural-log scale factor.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .errors import IntegrationError, TurningRegionError

RESCALE_THRESHOLD = 1e100


@dataclass(frozen=True)
class WaveState:
    """psi and dpsi at ``x``; the true values are ``psi * exp(log_scale)`` etc."""

    x: complex
    psi: complex
    dpsi: complex
    log_scale: float = 0.0

    def scaled(self, factor: complex) -> "WaveState":
        return replace(self, psi=self.psi * factor, dpsi=self.dpsi * factor)

    @property
    def log_derivative(self) -> complex:
        return self.dpsi / self.psi


@dataclass(frozen=True)
class StepControl:
    mode: str = "adaptive"
    step: float = 1e-3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 10**6

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError(f"mode must be 'fixed' or 'adaptive', got {self.mode!r}")
        if not (self.step > 0 and self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("step and tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


def _int_power(epsilon: float) -> int:
    """Integer exponent if eps is a whole number (exact power path), else -1."""
    if float(epsilon).is_integer() and 0 <= epsilon <= 64:
        return int(epsilon)
    return -1


@njit(cache=True, nogil=True)
def _pot(x, eps, ieps):
    if x == 0:
        return 0j
    if ieps >= 0:
        v = x * x
        for _ in range(ieps):
            v = v * x
        r = ieps % 4
        if r == 0:
            return v
        elif r == 1:
            return 1j * v
        elif r == 2:
            return -v
        return -1j * v
    return x * x * np.exp(eps * np.log(1j * x))


@njit(cache=True, nogil=True)
def _rk4_segment(a, u, length, psi, dpsi, lsc, energy, eps, ieps, h, max_steps, used):
    n = int(math.ceil(length / h - 1e-9))
    if n < 1:
        n = 1
    hs = length / n
    status = 0
    for k in range(n):
        if used >= max_steps:
            status = 1
            return psi, dpsi, lsc, used, status, k * hs
        x = a + (k * hs) * u
        xm = x + (0.5 * hs) * u
        x1 = a + ((k + 1) * hs) * u
        vm = _pot(xm, eps, ieps) - energy
        k1p = u * dpsi
        k1d = u * (_pot(x, eps, ieps) - energy) * psi
        p2 = psi + 0.5 * hs * k1p
        d2 = dpsi + 0.5 * hs * k1d
        k2p = u * d2
        k2d = u * vm * p2
        p3 = psi + 0.5 * hs * k2p
        d3 = dpsi + 0.5 * hs * k2d
        k3p = u * d3
        k3d = u * vm * p3
        p4 = psi + hs * k3p
        d4 = dpsi + hs * k3d
        k4p = u * d4
        k4d = u * (_pot(x1, eps, ieps) - energy) * p4
        psi = psi + hs / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        dpsi = dpsi + hs / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        used += 1
        m = max(abs(psi), abs(dpsi))
        if m > 1e100:
            psi = psi / m
            dpsi = dpsi / m
            lsc += math.log(m)
    return psi, dpsi, lsc, used, status, length


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9
_A21 = 1.0 / 5
_A31, _A32 = 3.0 / 40, 9.0 / 40
_A41, _A42, _A43 = 44.0 / 45, -56.0 / 15, 32.0 / 9
_A51, _A52, _A53, _A54 = 19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84
# error weights: 5th-order minus embedded 4th-order
_E1 = 71.0 / 57600
_E3 = -71.0 / 16695
_E4 = 71.0 / 1920
_E5 = -17253.0 / 339200
_E6 = 22.0 / 525
_E7 = -1.0 / 40


@njit(cache=True, nogil=True)
def _dopri_segment(a, u, length, psi, dpsi, lsc, energy, eps, ieps,
                   h, rtol, atol, max_steps, used):
    s = 0.0
    status = 0
    if h > length:
        h = length
    fsal_p = u * dpsi
    fsal_d = u * (_pot(a, eps, ieps) - energy) * psi
    while s < length:
        if used >= max_steps:
            status = 1
            break
        last = False
        if s + h >= length:
            h = length - s
            last = True
        x = a + s * u
        k1p = fsal_p
        k1d = fsal_d

        p = psi + h * _A21 * k1p
        d = dpsi + h * _A21 * k1d
        k2p = u * d
        k2d = u * (_pot(x + _C2 * h * u, eps, ieps) - energy) * p

        p = psi + h * (_A31 * k1p + _A32 * k2p)
        d = dpsi + h * (_A31 * k1d + _A32 * k2d)
        k3p = u * d
        k3d = u * (_pot(x + _C3 * h * u, eps, ieps) - energy) * p

        p = psi + h * (_A41 * k1p + _A42 * k2p + _A43 * k3p)
        d = dpsi + h * (_A41 * k1d + _A42 * k2d + _A43 * k3d)
        k4p = u * d
        k4d = u * (_pot(x + _C4 * h * u, eps, ieps) - energy) * p

        p = psi + h * (_A51 * k1p + _A52 * k2p + _A53 * k3p + _A54 * k4p)
        d = dpsi + h * (_A51 * k1d + _A52 * k2d + _A53 * k3d + _A54 * k4d)
        k5p = u * d
        k5d = u * (_pot(x + _C5 * h * u, eps, ieps) - energy) * p

        p = psi + h * (_A61 * k1p + _A62 * k2p + _A63 * k3p + _A64 * k4p + _A65 * k5p)
        d = dpsi + h * (_A61 * k1d + _A62 * k2d + _A63 * k3d + _A64 * k4d + _A65 * k5d)
        k6p = u * d
        k6d = u * (_pot(x + h * u, eps, ieps) - energy) * p

        pn = psi + h * (_B1 * k1p + _B3 * k3p + _B4 * k4p + _B5 * k5p + _B6 * k6p)
        dn = dpsi + h * (_B1 * k1d + _B3 * k3d + _B4 * k4d + _B5 * k5d + _B6 * k6d)
        xn = x + h * u
        k7p = u * dn
        k7d = u * (_pot(xn, eps, ieps) - energy) * pn

        ep = h * (_E1 * k1p + _E3 * k3p + _E4 * k4p + _E5 * k5p + _E6 * k6p + _E7 * k7p)
        ed = h * (_E1 * k1d + _E3 * k3d + _E4 * k4d + _E5 * k5d + _E6 * k6d + _E7 * k7d)
        sc_p = atol + rtol * max(abs(psi), abs(pn))
        sc_d = atol + rtol * max(abs(dpsi), abs(dn))
        err = max(abs(ep) / sc_p, abs(ed) / sc_d)
        used += 1

        if err <= 1.0:
            s = length if last else s + h
            psi = pn
            dpsi = dn
            fsal_p = k7p
            fsal_d = k7d
            m = max(abs(psi), abs(dpsi))
            if m > 1e100:
                psi = psi / m
                dpsi = dpsi / m
                fsal_p = fsal_p / m
                fsal_d = fsal_d / m
                lsc += math.log(m)
            if err == 0.0:
                fac = 5.0
            else:
                fac = min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = h * fac
        else:
            h = h * max(0.2, 0.9 * err ** -0.25)
    return psi, dpsi, lsc, used, status, s, h


def potential(x: complex, epsilon: float) -> complex:
    """V(x) = x^2 (ix)^eps on the principal branch; exact integer power for whole eps."""
    return complex(_pot(complex(x), float(epsilon), _int_power(epsilon)))


def rhs(state: WaveState, E: complex, epsilon: float) -> tuple[complex, complex]:
    """Right-hand side (psi', psi'') of the first-order system at ``state``."""
    return state.dpsi, (potential(state.x, epsilon) - E) * state.psi


def wkb_seed(x0: complex, E: complex, epsilon: float, direction: complex) -> WaveState:
    """Initial state for the solution that decays outward from ``x0``.

    ``direction`` points inward (the way integration will proceed). The
    log-derivative is -/+ sqrt(V - E), with the sign picked so the solution
    decays when moving opposite to ``direction``.
    """
    v = potential(x0, epsilon)
    if not abs(v) > abs(E):
        raise TurningRegionError(
            f"endpoint inside turning region: |V({x0})| = {abs(v):.6g} <= |E| = {abs(E):.6g}")
    q = cmath.sqrt(v - E)
    dpsi = -q
    if (dpsi * -direction).real >= 0.0:
        dpsi = q
    return WaveState(complex(x0), 1.0 + 0j, complex(dpsi), 0.0)


def integrate(seed: WaveState, path, E: complex, epsilon: float,
              ctl: StepControl | None = None) -> WaveState:
    """Carry ``seed`` along the polyline ``path`` and return the state at its last vertex.

    ``path[0]`` must coincide with ``seed.x``. Raises IntegrationError (with the
    partial state attached) when ``ctl.max_steps`` is exhausted.
    """
    ctl = ctl or StepControl()
    path = [complex(p) for p in path]
    if not path:
        return seed
    if abs(path[0] - seed.x) > 1e-12 * (1.0 + abs(seed.x)):
        raise ValueError(f"path starts at {path[0]} but seed is at {seed.x}")
    eps = float(epsilon)
    ieps = _int_power(epsilon)
    energy = complex(E)
    psi, dpsi, lsc = complex(seed.psi), complex(seed.dpsi), float(seed.log_scale)
    used = 0
    h = min(ctl.step, 1e-2)
    x = path[0]
    for b in path[1:]:
        length = abs(b - x)
        if length == 0.0:
            continue
        u = (b - x) / length
        if ctl.mode == "fixed":
            psi, dpsi, lsc, used, status, s = _rk4_segment(
                x, u, length, psi, dpsi, lsc, energy, eps, ieps,
                float(ctl.step), int(ctl.max_steps), used)
        else:
            psi, dpsi, lsc, used, status, s, h = _dopri_segment(
                x, u, length, psi, dpsi, lsc, energy, eps, ieps,
                h, float(ctl.rel_tol), float(ctl.abs_tol), int(ctl.max_steps), used)
        if status:
            partial = WaveState(x + s * u, psi, dpsi, lsc)
            raise IntegrationError(
                f"max_steps={ctl.max_steps} exceeded at x={partial.x:.6g}", partial)
        x = b
    return WaveState(path[-1], psi, dpsi, lsc)


def wronskian(a: WaveState, b: WaveState) -> complex:
    """W = psi_a dpsi_b - dpsi_a psi_b including both log scales (may overflow for huge scales)."""
    w = a.psi * b.dpsi - a.dpsi * b.psi
    return w * math.exp(a.log_scale + b.log_scale)
