"""Unitary Weyl (clock-and-shift) operators on a d-level system."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class WeylIndex:
    """Double index ``(k, l)`` of ``U_{kl}`` with flat form ``a = d*k + l``."""

    d: int
    k: int
    l: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")
        if not (0 <= self.k < self.d and 0 <= self.l < self.d):
            raise ValueError(f"indices ({self.k}, {self.l}) out of range for d={self.d}")

    @property
    def flat(self) -> int:
        return self.d * self.k + self.l

    @classmethod
    def from_flat(cls, d: int, a: int) -> "WeylIndex":
        if not 0 <= a < d * d:
            raise ValueError(f"flat index {a} out of range for d={d}")
        return cls(d, a // d, a % d)


@lru_cache(maxsize=None)
def root_powers(d: int) -> np.ndarray:
    """``ω_d^m`` for m = 0..d-1, with ω_d = exp(2πi/d).

    Higher powers are always reduced mod d before lookup, so phases never
    accumulate error from large exponents.
    """
    out = np.exp(2j * np.pi * np.arange(d) / d)
    out.setflags(write=False)
    return out


def omega_pow(d: int, n) -> np.ndarray | complex:
    return root_powers(d)[np.mod(n, d)]


def weyl(idx: WeylIndex) -> np.ndarray:
    """``U_{kl} = Σ_m ω^{km} |m⟩⟨m+l|``."""
    d, k, l = idx.d, idx.k, idx.l
    u = np.zeros((d, d), dtype=complex)
    m = np.arange(d)
    u[m, (m + l) % d] = omega_pow(d, k * m)
    return u


def weyl_kl(d: int, k: int, l: int) -> np.ndarray:
    return weyl(WeylIndex(d, k % d, l % d))


def weyl_flat(d: int, a: int) -> np.ndarray:
    return weyl(WeylIndex.from_flat(d, a))


def weyl_basis(d: int) -> list[np.ndarray]:
    """All d² Weyl operators ordered by flat index."""
    return [weyl_flat(d, a) for a in range(d * d)]


def weyl_diagonal_family(d: int) -> list[np.ndarray]:
    """The diagonal Weyl operators ``U_{d·i} = diag(1, ω^i, ..., ω^{i(d-1)})``."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return [weyl(WeylIndex(d, i, 0)) for i in range(d)]


def diagonal_phases(d: int) -> np.ndarray:
    """Row ``i`` holds the diagonal of ``U_{d·i}``; shape (d, d)."""
    i = np.arange(d)
    return omega_pow(d, np.outer(i, i))
