"""Mutually unbiased bases.

Complete families (d + 1 bases) are built for d = 2 and odd primes; every
other dimension gets the computational and Fourier bases only, marked as a
partial family.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

import numpy as np

from .weyl import omega_pow

ORTHO_TOL = 1e-12
UNBIASED_TOL = 1e-10


@dataclass(frozen=True)
class MubFamily:
    """``bases[b][k]`` is the k-th unit vector of basis b; basis 0 is computational."""

    d: int
    bases: np.ndarray
    complete: bool
    labels: tuple[str, ...]

    @property
    def count(self) -> int:
        return len(self.bases)

    def vector(self, basis: int, k: int) -> np.ndarray:
        return self.bases[basis][k]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % f for f in range(2, int(n**0.5) + 1))


def computational_basis(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex)


def fourier_basis(d: int) -> np.ndarray:
    j = np.arange(d)
    return omega_pow(d, np.outer(j, j)) / np.sqrt(d)


def quadratic_phase_basis(d: int, b: int) -> np.ndarray:
    """Vectors with components ``ω^{b j² + k j} / sqrt(d)``; row k is vector k."""
    j = np.arange(d)
    k = np.arange(d)[:, None]
    return omega_pow(d, b * j * j + k * j) / np.sqrt(d)


def mub_family(d: int) -> MubFamily:
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if d == 2:
        s = 1.0 / np.sqrt(2.0)
        bases = [
            computational_basis(2),
            np.array([[s, s], [s, -s]], dtype=complex),
            np.array([[s, 1j * s], [s, -1j * s]], dtype=complex),
        ]
        return MubFamily(2, np.array(bases), True, ("Z", "X", "Y"))
    if is_prime(d):
        bases = [computational_basis(d)] + [quadratic_phase_basis(d, b) for b in range(d)]
        labels = ("computational",) + tuple(f"quadratic b={b}" for b in range(d))
        return MubFamily(d, np.array(bases), True, labels)
    bases = [computational_basis(d), fourier_basis(d)]
    return MubFamily(d, np.array(bases), False, ("computational", "fourier"))


def qutrit_reference_family() -> MubFamily:
    """The four qutrit bases written out vector by vector."""
    w = omega_pow(3, 1)
    w2 = omega_pow(3, 2)
    s = 1.0 / np.sqrt(3.0)
    bases = [
        np.eye(3, dtype=complex),
        s * np.array([[1, 1, 1], [1, w, w2], [1, w2, w]]),
        s * np.array([[1, w, w], [1, w2, 1], [1, 1, w2]]),
        s * np.array([[1, w2, w2], [1, 1, w], [1, w, 1]]),
    ]
    return MubFamily(3, np.array(bases, dtype=complex), True, ("B0", "B1", "B2", "B3"))


def verify_mub(fam: MubFamily) -> tuple[bool, float]:
    """Check orthonormality within bases and unbiasedness across them.

    Returns ``(ok, worst)`` where ``worst`` is the largest deviation seen.
    """
    d = fam.d
    worst = 0.0
    ok = fam.count <= d + 1
    for basis in fam.bases:
        dev = float(np.max(np.abs(basis.conj() @ basis.T - np.eye(d))))
        worst = max(worst, dev)
        ok &= dev <= ORTHO_TOL
    for b1, b2 in combinations(range(fam.count), 2):
        overlaps = np.abs(fam.bases[b1].conj() @ fam.bases[b2].T) ** 2
        dev = float(np.max(np.abs(overlaps - 1.0 / d)))
        worst = max(worst, dev)
        ok &= dev <= UNBIASED_TOL
    return bool(ok), worst


PairId = tuple[int, int, int]


def pair_iterator(
    fam: MubFamily, exclude_computational: bool = True
) -> Iterator[tuple[PairId, np.ndarray, np.ndarray]]:
    """Yield ``((basis, i, j), psi_i, psi_j)`` for all same-basis pairs i < j."""
    start = 1 if exclude_computational else 0
    for b in range(start, fam.count):
        for i, j in combinations(range(fam.d), 2):
            yield (b, i, j), fam.bases[b][i], fam.bases[b][j]


def format_pair(pair: PairId) -> str:
    return "{}:{}:{}".format(*pair)


def parse_pair(text: str) -> PairId:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"pair must look like BASIS:I:J, got {text!r}")
    b, i, j = (int(x) for x in parts)
    return b, i, j


def check_pair(fam: MubFamily, pair: PairId) -> PairId:
    b, i, j = pair
    if not 0 <= b < fam.count:
        raise ValueError(f"basis {b} out of range for a family of {fam.count} bases")
    if not (0 <= i < fam.d and 0 <= j < fam.d) or i == j:
        raise ValueError(f"invalid vector indices ({i}, {j}) for d={fam.d}")
    return pair


def projector_distance(f1: MubFamily, b1: int, f2: MubFamily, b2: int) -> float:
    """Max over vectors of ``f1[b1]`` of the closest projector distance into ``f2[b2]``."""
    worst = 0.0
    for psi in f1.bases[b1]:
        p = np.outer(psi, psi.conj())
        best = min(
            float(np.linalg.norm(p - np.outer(phi, phi.conj()))) for phi in f2.bases[b2]
        )
        worst = max(worst, best)
    return worst
