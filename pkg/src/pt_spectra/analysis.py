"""Diagnostics for the oscillator-basis truncation method.

Follows low-lying truncation eigenvalues as N grows, counts how many have
settled, fits the semiclassical growth exponent, and compares truncation
against contour shooting.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import eig, hobasis, shooting
from .errors import DomainError

DEFAULT_SETTLE_TOL = 1e-3
REAL_TOL = 1e-8


def low_lying(values, k: int) -> np.ndarray:
    """The k eigenvalues of smallest modulus, ordered by (|E|, Re, Im).

    Truncation artifacts at eps=1 come in conjugate pairs with small real parts
    but |Im| in the hundreds or thousands; ranking by modulus keeps them out of
    the low-lying levels, where ranking by Re alone would interleave them.
    """
    vals = sorted((complex(v) for v in values), key=lambda z: (round(abs(z), 9), z.real, z.imag))
    return np.array(vals[:k], dtype=complex)


@dataclass(frozen=True)
class StabilizationTrace:
    epsilon: int
    n_values: tuple[int, ...]
    levels: np.ndarray  # shape (len(n_values), k)
    settle_tol: float = DEFAULT_SETTLE_TOL

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError("N values must be strictly ascending")
        if self.levels.shape[0] != len(self.n_values):
            raise ValueError("one row of levels per N value is required")

    @property
    def k(self) -> int:
        return self.levels.shape[1]

    def rows(self):
        return list(zip(self.n_values, self.levels))


def _parallel(fn, items):
    workers = min(shooting.worker_count(), len(items))
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def stabilization_trace(epsilon: int, n_values, k: int,
                        settle_tol: float = DEFAULT_SETTLE_TOL) -> StabilizationTrace:
    n_values = tuple(int(n) for n in n_values)
    if not n_values or k > min(n_values):
        raise DomainError(f"k={k} exceeds the smallest truncation size {min(n_values, default=0)}")

    def row(n):
        return low_lying(eig.eigenvalues(hobasis.build(epsilon, n)).values, k)

    levels = np.vstack(_parallel(row, list(n_values)))
    return StabilizationTrace(int(epsilon), n_values, levels, settle_tol)


def settled_count(trace: StabilizationTrace, tol: float | None = None) -> int:
    """Number of bottom levels that changed by < tol (relative) over the last two N steps
    and are real at the largest N."""
    tol = trace.settle_tol if tol is None else tol
    if len(trace.n_values) < 3:
        raise DomainError("settled_count needs at least 3 truncation sizes")
    a, b, c = trace.levels[-3], trace.levels[-2], trace.levels[-1]
    count = 0
    for j in range(trace.k):
        scale = max(abs(c[j]), 1e-300)
        settled = (abs(c[j] - b[j]) < tol * scale and abs(b[j] - a[j]) < tol * scale
                   and abs(c[j].imag) <= REAL_TOL * (1.0 + abs(c[j].real)))
        if not settled:
            break
        count += 1
    return count


def wkb_growth_fit(levels, n_from: int, n_to: int) -> tuple[float, float]:
    """Least-squares slope (and its standard error) of ln E_n against ln(n + 1/2) for n_from <= n <= n_to."""
    if n_to - n_from < 5:
        raise DomainError("fit window must span at least 5 levels")
    pts = [(int(n), float(np.real(e))) for n, e in levels if n_from <= n <= n_to]
    if len(pts) < 3:
        raise DomainError(f"only {len(pts)} levels inside window [{n_from}, {n_to}]")
    if any(e <= 0 for _, e in pts):
        raise DomainError("all eigenvalues in the fit window must be positive")
    x = np.log(np.array([n for n, _ in pts]) + 0.5)
    y = np.log(np.array([e for _, e in pts]))
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - (ym + slope * (x - xm))
    dof = len(pts) - 2
    stderr = float(math.sqrt(np.sum(resid ** 2) / dof / sxx)) if dof > 0 else float("nan")
    return slope, stderr


def default_n_values(n_max: int, k: int) -> tuple[int, ...]:
    """Nine sizes ending at n_max (20, 30, ..., 100 for n_max = 100), all >= k."""
    step = max(1, n_max // 10)
    ns = sorted({n_max - j * step for j in range(9)})
    return tuple(n for n in ns if n >= max(k, 1))


@dataclass
class ComparisonReport:
    epsilon: int
    shooting: list
    truncation: list
    n_max: int
    abs_deviation: list
    rel_deviation: list
    matched_level: list
    verdicts: list
    settled_count: int
    settle_tol: float
    basis_valid: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "n_max": self.n_max,
            "settle_tol": self.settle_tol,
            "settled_count": self.settled_count,
            "basis_valid": self.basis_valid,
            "shooting": [[z.real, z.imag] for z in self.shooting],
            "levels": [
                {"index": j, "re_E": t.real, "im_E": t.imag, "matched_shooting_level": m,
                 "abs_deviation": a, "rel_deviation": r, "verdict": v}
                for j, (t, m, a, r, v) in enumerate(zip(
                    self.truncation, self.matched_level, self.abs_deviation,
                    self.rel_deviation, self.verdicts))
            ],
            "notes": list(self.notes),
        }


def compare_methods(epsilon: int, levels: int, n_max: int,
                    settle_tol: float = DEFAULT_SETTLE_TOL,
                    n_values=None, control=None) -> ComparisonReport:
    """Shooting (branch 0) against oscillator-basis truncation at size n_max.

    A truncation level is 'converged' when it is real and lies within
    10 * settle_tol (relative) of some shooting eigenvalue; otherwise it is an
    'artifact'.
    """
    if epsilon not in hobasis.SUPPORTED_EPSILON:
        raise DomainError(f"compare_methods supports eps in {hobasis.SUPPORTED_EPSILON}, got {epsilon}")
    n_values = tuple(n_values) if n_values is not None else default_n_values(n_max, levels)
    if n_values[-1] != n_max:
        n_values = tuple(n for n in n_values if n < n_max) + (n_max,)
    trace = stabilization_trace(epsilon, n_values, levels, settle_tol)
    trunc = list(trace.levels[-1])

    shots = shooting.lowest_eigenvalues(epsilon, levels + 2, control=control)
    shoot_e = [r.E for r in shots]

    abs_dev, rel_dev, matched, verdicts = [], [], [], []
    for t in trunc:
        if shoot_e:
            j = int(np.argmin([abs(t - s) for s in shoot_e]))
            a = abs(t - shoot_e[j])
            r = a / abs(shoot_e[j])
        else:
            j, a, r = -1, math.inf, math.inf
        real = abs(t.imag) <= REAL_TOL * (1.0 + abs(t.real))
        matched.append(j)
        abs_dev.append(float(a))
        rel_dev.append(float(r))
        verdicts.append("converged" if real and r <= 10.0 * settle_tol else "artifact")

    basis_valid = epsilon in (0, 1)
    notes = []
    if not basis_valid:
        notes.append(
            f"eps={epsilon}: the decay wedges no longer contain the real axis, so the "
            "oscillator basis does not represent the wedge-continued problem; the truncation "
            "diagonalizes the real-axis operator p^2 + i^eps x^(eps+2) instead")
    settled = settled_count(trace, settle_tol) if len(n_values) >= 3 else 0
    return ComparisonReport(
        epsilon=int(epsilon), shooting=shoot_e, truncation=trunc, n_max=int(n_max),
        abs_deviation=abs_dev, rel_deviation=rel_dev, matched_level=matched,
        verdicts=verdicts, settled_count=settled, settle_tol=settle_tol,
        basis_valid=basis_valid, notes=notes)
