"""Dense eigenvalues of (generally non-Hermitian) complex matrices.

Diagonalization goes through LAPACK's balancing + Hessenberg + shifted QR
path (``numpy.linalg.eigvals``). Matrices with the signed-conjugation
symmetry S conj(H) S = H are first rotated by D = diag(i^n), which makes
them real; the real QR iteration then returns exactly conjugate-closed
spectra.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenSolverError

REAL_TOL = 1e-8
PAIR_TOL = 1e-8
_SORT_TIE = 1e-9


@dataclass(frozen=True)
class SpectrumSet:
    values: tuple[complex, ...]
    source: str = "matrix"

    def __len__(self):
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)


def sort_spectrum(values) -> list[complex]:
    """Sort by (Re, Im); values whose real parts agree to 1e-9 relative are ordered by Im."""
    vals = sorted((complex(v) for v in values), key=lambda z: (z.real, z.imag))
    out: list[complex] = []
    i = 0
    while i < len(vals):
        j = i + 1
        while j < len(vals) and abs(vals[j].real - vals[i].real) <= _SORT_TIE * (1 + abs(vals[i].real)):
            j += 1
        out.extend(sorted(vals[i:j], key=lambda z: z.imag))
        i = j
    return out


def _real_form(a: np.ndarray):
    """D^-1 A D with D = diag(i^n) if that is real (signed-conjugation symmetric A), else None."""
    n = a.shape[0]
    phase = np.array([1, 1j, -1, -1j])[np.arange(n) % 4]
    rotated = a * np.outer(np.conj(phase), phase)
    if np.all(np.abs(rotated.imag) <= 1e-14 * (1.0 + np.abs(rotated.real))):
        return rotated.real.copy()
    return None


def eigenvalues(matrix, source: str | None = None) -> SpectrumSet:
    a = np.asarray(matrix)
    if hasattr(matrix, "entries"):
        source = source or matrix.descriptor
        a = np.asarray(matrix.entries)
    source = source or "matrix"
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{source}: matrix has non-finite entries")
    if np.iscomplexobj(a):
        real = _real_form(a)
        if real is not None:
            a = real
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"QR iteration failed to converge for {source}") from exc
    return SpectrumSet(tuple(sort_spectrum(vals)), source)


def conjugate_pair_audit(s, real_tol: float = REAL_TOL, pair_tol: float = PAIR_TOL):
    """Count real values and conjugate pairs; return (real_count, pair_count, unpaired)."""
    vals = list(s.values) if isinstance(s, SpectrumSet) else [complex(v) for v in s]
    real_count = 0
    pool: list[complex] = []
    for v in vals:
        if abs(v.imag) <= real_tol * (1.0 + abs(v.real)):
            real_count += 1
        else:
            pool.append(v)
    pairs = 0
    unpaired: list[complex] = []
    used = [False] * len(pool)
    for i, v in enumerate(pool):
        if used[i]:
            continue
        used[i] = True
        best, best_d = -1, np.inf
        for j in range(i + 1, len(pool)):
            if used[j]:
                continue
            d = abs(pool[j] - v.conjugate())
            if d < best_d:
                best, best_d = j, d
        if best >= 0 and best_d <= pair_tol * (1.0 + abs(v)):
            used[best] = True
            pairs += 1
        else:
            unpaired.append(v)
    return real_count, pairs, unpaired
