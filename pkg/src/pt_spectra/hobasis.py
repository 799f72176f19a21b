"""Truncated harmonic-oscillator matrix representations of p^2 + x^2 (ix)^eps.

Convention: a = (x + ip)/sqrt(2), so x = (a + a^dagger)/sqrt(2) and p^2 + x^2
has eigenvalues 2n + 1.

Powers of x are computed in the unnormalized basis e_n = sqrt(n!) |n>, where
(a + a^dagger) e_n = e_{n+1} + n e_{n-1} has integer coefficients. Then

    <m| (a + a^dagger)^k |n> = d_k(m, n) * sqrt(m! / n!)

with d_k an integer matrix, so every entry comes from one exact integer and a
single square root. Entries therefore do not depend on the working size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SUPPORTED_EPSILON = (0, 1, 2, 4, 6)
MAX_POWER = 12
_I_POWERS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def _ladder_integers(k: int, size: int) -> list[list[int]]:
    """d_k(m, n) for m, n < size, computed column by column with Python ints."""
    d = [[0] * size for _ in range(size)]
    for n in range(size):
        col = {n: 1}
        for _ in range(k):
            nxt: dict[int, int] = {}
            for j, c in col.items():
                nxt[j + 1] = nxt.get(j + 1, 0) + c
                if j > 0:
                    nxt[j - 1] = nxt.get(j - 1, 0) + j * c
            col = nxt
        for m, c in col.items():
            if m < size:
                d[m][n] = c
    return d


def position_power_matrix(k: int, N: int) -> np.ndarray:
    """Top-left N x N block of <m|x^k|n>, exact up to final rounding."""
    if k < 0 or k > MAX_POWER:
        raise DomainError(f"unsupported order k={k} (0 <= k <= {MAX_POWER})")
    if N < 1:
        raise DomainError(f"dimension must be >= 1, got {N}")
    size = N + k
    d = _ladder_integers(k, size)
    scale = 2.0 ** (-0.5 * k)
    out = np.zeros((N, N))
    for n in range(N):
        for m in range(n, min(N, n + k + 1)):
            c = d[m][n]
            if c == 0:
                continue
            ratio = math.prod(range(n + 1, m + 1))  # m!/n!
            v = float(c) * math.sqrt(ratio) * scale
            out[m, n] = v
            out[n, m] = v
    return out


def momentum_squared_matrix(N: int) -> np.ndarray:
    """<m|p^2|n>: n + 1/2 on the diagonal, -sqrt((n+1)(n+2))/2 two off."""
    if N < 1:
        raise DomainError(f"dimension must be >= 1, got {N}")
    out = np.diag(np.arange(N) + 0.5)
    for n in range(N - 2):
        v = -math.sqrt((n + 1) * (n + 2)) * 0.5
        out[n, n + 2] = v
        out[n + 2, n] = v
    return out


@dataclass(frozen=True)
class TruncatedHamiltonian:
    N: int
    epsilon: int
    entries: np.ndarray

    @property
    def descriptor(self) -> str:
        return f"truncation(eps={self.epsilon}, N={self.N})"


def build(epsilon: int, N: int) -> TruncatedHamiltonian:
    """N x N block of p^2 + i^eps x^(eps+2) for eps in {0, 1, 2, 4, 6}."""
    if isinstance(epsilon, float) and epsilon.is_integer():
        epsilon = int(epsilon)
    if epsilon not in SUPPORTED_EPSILON:
        raise DomainError(
            f"oscillator-basis truncation only supports eps in {SUPPORTED_EPSILON} "
            f"(matrix elements for non-integer eps are not available); got {epsilon}")
    h = momentum_squared_matrix(N) + _I_POWERS[epsilon % 4] * position_power_matrix(epsilon + 2, N)
    h.setflags(write=False)
    return TruncatedHamiltonian(N=N, epsilon=epsilon, entries=h)


def signed_conjugation_defect(entries: np.ndarray) -> float:
    """max |S conj(H) S - H| with S = diag((-1)^n)."""
    n = entries.shape[0]
    sign = (-1.0) ** np.arange(n)
    mirrored = np.conj(entries) * np.outer(sign, sign)
    return float(np.max(np.abs(mirrored - entries))) if n else 0.0


def pt_signature_check(h, tol: float = 1e-14) -> bool:
    """True iff S conj(H) S = H elementwise within ``tol``."""
    entries = h.entries if isinstance(h, TruncatedHamiltonian) else np.asarray(h)
    return signed_conjugation_defect(entries) <= tol
