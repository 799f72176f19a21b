"""Two-sided shooting for eigenvalues of -psi'' + x^2 (ix)^eps psi = E psi.

Each arm of the planned contour is seeded with the outward-decaying WKB
solution at its endpoint and integrated inward to the origin, where the
normalized Wronskian of the two arms is the matching residual.
"""
from __future__ import annotations

import cmath
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from . import ode
from .errors import DomainError, IntegrationError, RefinementError
from .wedges import DEFAULT_DECAY_TARGET, Contour, plan_contour, wedge_geometry

log = logging.getLogger(__name__)

ACCEPT_RESIDUAL = 1e-9
REAL_TOL = 1e-8
DEDUPE_TOL = 1e-8
MAX_SECANT_ITER = 60
SCAN_MIN_THRESHOLD = 0.1


def is_real(E: complex, tol: float = REAL_TOL) -> bool:
    return abs(E.imag) <= tol * (1.0 + abs(E.real))


def worker_count() -> int:
    """Thread cap from PT_SPECTRA_THREADS (0 or unset = one per CPU)."""
    raw = os.environ.get("PT_SPECTRA_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


@dataclass(frozen=True)
class ProblemSpec:
    epsilon: float
    branch: int = 0
    control: ode.StepControl = field(default_factory=ode.StepControl)
    decay_target: float = DEFAULT_DECAY_TARGET
    e_min: float = 0.0
    e_max: float = 12.0
    grid: int = 161

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if not self.e_min < self.e_max:
            raise DomainError(f"empty energy window [{self.e_min}, {self.e_max}]")
        if self.grid < 2:
            raise DomainError(f"grid must have at least 2 points, got {self.grid}")
        if not self.decay_target > 0:
            raise DomainError("decay_target must be positive")
        if self.epsilon > 4:
            warnings.warn(
                f"epsilon={self.epsilon} > 4: principal-branch continuation of (ix)^eps "
                "is not validated beyond eps=4", RuntimeWarning, stacklevel=3)

    @property
    def pair(self):
        return wedge_geometry(self.epsilon, self.branch)

    def contour(self, energy_hint: float) -> Contour:
        return plan_contour(self.pair, energy_hint, self.decay_target)


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    kind: str = "phase"  # "phase" (sign/phase flip) or "minimum" (|W| dip)


@dataclass(frozen=True)
class ShootingResult:
    E: complex
    residual: complex
    iterations: int
    classified_real: bool
    radius: float = float("nan")
    history: tuple = ()


@dataclass
class SpectrumReport:
    results: list
    spurious: list  # (Bracket, reason) for brackets that did not yield an eigenvalue


def _arm_state(contour: Contour, arm, E: complex, spec: ProblemSpec) -> ode.WaveState:
    start, nxt = arm[0], arm[1]
    direction = (nxt - start) / abs(nxt - start)
    seed = ode.wkb_seed(start, E, spec.epsilon, direction)
    return ode.integrate(seed, arm, E, spec.epsilon, spec.control)


def _residual_on(contour: Contour, spec: ProblemSpec, E: complex) -> complex:
    left = _arm_state(contour, contour.left_arm, E, spec)
    right = _arm_state(contour, contour.right_arm, E, spec)
    w = left.psi * right.dpsi - left.dpsi * right.psi
    norm = max(abs(left.psi), abs(left.dpsi)) * max(abs(right.psi), abs(right.dpsi))
    return complex(w / norm)


def matching_residual(spec: ProblemSpec, E: complex, contour: Contour | None = None) -> complex:
    """Normalized Wronskian of the two decaying arm solutions at the origin.

    Zero exactly when E is an eigenvalue for the wedge pair of ``spec``. When no
    contour is given one is planned with ``|E|`` as the energy hint.
    """
    if contour is None:
        contour = spec.contour(abs(E))
    return _residual_on(contour, spec, complex(E))


def _map(fn, items):
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def scan(spec: ProblemSpec) -> list[Bracket]:
    """Candidate eigenvalue brackets from the residual on a uniform real grid.

    A bracket is emitted where the residual turns by more than 90 degrees between
    neighbouring samples (a zero crossing for a residual of fixed phase), or
    around an interior local minimum of |W| below 0.1.
    """
    width = spec.e_max - spec.e_min
    if width <= DEDUPE_TOL * (1.0 + max(abs(spec.e_min), abs(spec.e_max))):
        return []
    grid = np.linspace(spec.e_min, spec.e_max, spec.grid)
    ws = np.array(_map(lambda e: matching_residual(spec, complex(e)), list(grid)))
    mags = np.abs(ws)
    found: list[Bracket] = []
    for k in range(len(grid) - 1):
        if (ws[k] * np.conj(ws[k + 1])).real <= 0.0:
            found.append(Bracket(float(grid[k]), float(grid[k + 1]), "phase"))
    for k in range(1, len(grid) - 1):
        if mags[k] < SCAN_MIN_THRESHOLD and mags[k] <= mags[k - 1] and mags[k] <= mags[k + 1]:
            lo, hi = float(grid[k - 1]), float(grid[k + 1])
            if not any(b.lo >= lo and b.hi <= hi for b in found):
                found.append(Bracket(lo, hi, "minimum"))
    found.sort(key=lambda b: (b.lo, b.hi))
    return found


def refine(spec: ProblemSpec, bracket: Bracket) -> ShootingResult:
    """Complex secant iteration on W started from the bracket endpoints."""
    mid = 0.5 * (bracket.lo + bracket.hi)
    contour = spec.contour(abs(mid))
    e0, e1 = complex(bracket.lo), complex(bracket.hi)
    w0 = _residual_on(contour, spec, e0)
    w1 = _residual_on(contour, spec, e1)
    if abs(w0) < abs(w1):
        e0, e1, w0, w1 = e1, e0, w1, w0
    history = [e1]
    for it in range(1, MAX_SECANT_ITER + 1):
        if abs(w1) <= 1e-12:
            return _result(e1, w1, it - 1, contour, history)
        dw = w1 - w0
        if dw == 0:
            break
        e2 = e1 - w1 * (e1 - e0) / dw
        if not cmath.isfinite(e2):
            break
        try:
            w2 = _residual_on(contour, spec, e2)
        except DomainError:
            # iterate wandered outside the region the contour was planned for
            contour = spec.contour(abs(e2))
            w2 = _residual_on(contour, spec, e2)
        history.append(e2)
        e0, w0, e1, w1 = e1, w1, e2, w2
        if abs(e1 - e0) <= 1e-12 * (1.0 + abs(e1)) or abs(w1) <= 1e-12:
            return _result(e1, w1, it, contour, history)
    raise RefinementError(
        f"secant did not converge from bracket [{bracket.lo}, {bracket.hi}]", bracket, e1)


def _result(E, w, iterations, contour, history):
    return ShootingResult(E=complex(E), residual=complex(w), iterations=iterations,
                          classified_real=is_real(complex(E)), radius=contour.radius,
                          history=tuple(history))


def spectrum_report(spec: ProblemSpec) -> SpectrumReport:
    """Scan, refine each bracket, drop duplicates; keeps an audit of failed brackets."""
    brackets = scan(spec)
    step = (spec.e_max - spec.e_min) / (spec.grid - 1)

    def attempt(b):
        try:
            return b, refine(spec, b), None
        except (RefinementError, IntegrationError, DomainError) as exc:
            return b, None, str(exc)

    results: list[ShootingResult] = []
    spurious = []
    for b, res, err in _map(attempt, brackets):
        if res is None:
            spurious.append((b, err))
            continue
        if abs(res.residual) > ACCEPT_RESIDUAL:
            spurious.append((b, f"residual {abs(res.residual):.3g} above acceptance"))
            continue
        if not (spec.e_min - step <= res.E.real <= spec.e_max + step):
            spurious.append((b, f"converged outside window to {res.E:.12g}"))
            continue
        results.append(res)

    results.sort(key=lambda r: (r.E.real, r.E.imag))
    merged: list[ShootingResult] = []
    for r in results:
        if merged and abs(r.E - merged[-1].E) <= DEDUPE_TOL * (1.0 + abs(r.E)):
            if abs(r.residual) < abs(merged[-1].residual):
                merged[-1] = r
            continue
        merged.append(r)
    for b, reason in spurious:
        log.info("spurious bracket [%.6g, %.6g] (%s): %s", b.lo, b.hi, b.kind, reason)
    return SpectrumReport(merged, spurious)


def spectrum(spec: ProblemSpec) -> list[ShootingResult]:
    """Eigenvalues in the window of ``spec``, sorted by real part."""
    return spectrum_report(spec).results


def wkb_energy(n: float, epsilon: float) -> float:
    """Leading-order WKB estimate of the n-th eigenvalue (branch 0)."""
    a = 1.0 / (epsilon + 2.0)
    c = gamma(1.5 + a) * math.sqrt(math.pi) / (math.sin(math.pi * a) * gamma(1.0 + a))
    return (c * (n + 0.5)) ** ((2.0 * epsilon + 4.0) / (epsilon + 4.0))


def lowest_eigenvalues(epsilon: float, count: int, branch: int = 0,
                       control: ode.StepControl | None = None,
                       decay_target: float = DEFAULT_DECAY_TARGET,
                       points_per_level: int = 12) -> list[ShootingResult]:
    """At least ``count`` lowest eigenvalues (branch 0 only), widening the window as needed."""
    if branch != 0:
        raise DomainError("lowest_eigenvalues is defined for the branch-0 wedge pair")
    control = control or ode.StepControl()
    e_max = 1.15 * wkb_energy(count - 1, epsilon) + 2.0
    for _ in range(6):
        grid = max(41, points_per_level * (count + 2))
        spec = ProblemSpec(epsilon, branch, control, decay_target, 0.0, e_max, grid)
        found = spectrum(spec)
        if len(found) >= count:
            return found
        e_max *= 1.5
    return found
