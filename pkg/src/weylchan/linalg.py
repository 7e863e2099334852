"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Double indices
follow one fixed row-major convention: the pair ``(i, j)`` of a ``d``-level
system maps to the flat index ``i * d + j``. Vectorization, reshuffling and
every Choi/superoperator construction rely on this.

The eigensolver is a cyclic Jacobi method with complex rotations. It is slow
compared to LAPACK but simple enough to serve as an independent oracle for
the closed-form spectra elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from functools import lru_cache

import numpy as np

NEGATIVE_TOL = 1e-10
HERMITIAN_TOL = 1e-10

_JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class Spectrum:
    """Real eigenvalues of a Hermitian matrix, sorted descending."""

    eigenvalues: np.ndarray
    tolerance: float = NEGATIVE_TOL

    @property
    def min(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def n_negative(self) -> int:
        return int(np.count_nonzero(self.eigenvalues < -self.tolerance))

    @property
    def is_psd(self) -> bool:
        return self.n_negative == 0

    def __len__(self) -> int:
        return len(self.eigenvalues)


def as_matrix(x) -> np.ndarray:
    return np.asarray(x, dtype=complex)


def is_square(x: np.ndarray) -> bool:
    return x.ndim == 2 and x.shape[0] == x.shape[1]


def dagger(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def is_hermitian(x: np.ndarray, atol: float = HERMITIAN_TOL) -> bool:
    x = as_matrix(x)
    return is_square(x) and bool(np.max(np.abs(x - dagger(x)), initial=0.0) <= atol)


def kron(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def vectorize(x) -> np.ndarray:
    """Row-major vectorization: component ``i*d + j`` holds ``x[i, j]``.

    With this convention ``vectorize(X @ Z @ Y) == kron(X, Y.T) @ vectorize(Z)``.
    """
    x = as_matrix(x)
    if not is_square(x):
        raise ValueError(f"vectorize expects a square matrix, got shape {x.shape}")
    return x.reshape(-1).copy()


def unvectorize(v) -> np.ndarray:
    v = as_matrix(v).reshape(-1)
    d = isqrt(v.size)
    if d * d != v.size:
        raise ValueError(f"vector length {v.size} is not a perfect square")
    return v.reshape(d, d).copy()


def reshuffle(m) -> np.ndarray:
    """Realignment ``C[ij, kl] = m[ik, jl]``; an involution on d²×d² matrices."""
    m = as_matrix(m)
    if not is_square(m):
        raise ValueError(f"reshuffle expects a square matrix, got shape {m.shape}")
    n = m.shape[0]
    d = isqrt(n)
    if d * d != n:
        raise ValueError(f"matrix size {n} is not a perfect square")
    return m.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(n, n).copy()


@lru_cache(maxsize=None)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Tournament schedule: n-1 (or n) rounds of disjoint (p, q) pairs, p < q.

    Every pair appears exactly once per sweep.
    """
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[k], players[m - 1 - k]) for k in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _jacobi_batch(
    a: np.ndarray, tol: float, vectors: bool = True
) -> tuple[np.ndarray, np.ndarray | None]:
    """Parallel-ordered cyclic complex Jacobi on a stack of Hermitian matrices.

    Each round applies a set of disjoint plane rotations at once, and every
    matrix in the stack follows the same schedule. The stack is kept
    batch-last internally so the row and column updates are contiguous.
    Returns unsorted eigenvalues (B, n) and eigenvectors (B, n, n), or
    None in place of the eigenvectors when ``vectors`` is False.
    """
    a = np.ascontiguousarray(np.transpose(np.asarray(a, dtype=complex), (1, 2, 0)))
    n, _, nb = a.shape
    v = np.repeat(np.eye(n, dtype=complex)[:, :, None], nb if vectors else 0, axis=2)
    if n == 1:
        return a[0, 0, :].real[:, None].copy(), np.transpose(v, (2, 0, 1)) if vectors else None

    scale = np.maximum(np.sqrt(np.sum(np.abs(a) ** 2, axis=(0, 1))), 1e-300)
    iu = np.triu_indices(n, 1)
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.sqrt(2.0 * np.sum(np.abs(a[iu[0], iu[1], :]) ** 2, axis=0))
        if np.all(off <= tol * scale):
            break
        for p, q in _round_robin(n):
            apq = a[p, q]
            mag = np.abs(apq)
            live = mag > 1e-300
            if not np.any(live):
                continue
            safe = np.where(live, mag, 1.0)
            theta = (a[q, q].real - a[p, p].real) / (2.0 * safe)
            big = np.abs(theta) > 1e150
            # for huge |θ| the root is 1/(2θ) and θ² would overflow
            small = np.where(big, 0.0, theta)
            root = np.sqrt(small * small + 1.0)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0),
                         np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + root))
            t = np.where(live, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            phase = np.where(live, apq / safe, 1.0)
            # R = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on each (p, q) plane
            sp = s * np.conj(phase)
            cp = c * np.conj(phase)

            col_p = a[:, p]
            col_q = a[:, q]
            a[:, p] = c * col_p - sp * col_q
            a[:, q] = s * col_p + cp * col_q
            row_p = a[p]
            row_q = a[q]
            a[p] = c[:, None] * row_p - np.conj(sp)[:, None] * row_q
            a[q] = s[:, None] * row_p + np.conj(cp)[:, None] * row_q
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real

            if vectors:
                vp = v[:, p]
                vq = v[:, q]
                v[:, p] = c * vp - sp * vq
                v[:, q] = s * vp + cp * vq
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")
    w = np.real(np.diagonal(a, axis1=0, axis2=1)).copy()
    if not vectors:
        return w, None
    return w, np.ascontiguousarray(np.transpose(v, (2, 0, 1)))


def _check_hermitian_stack(h: np.ndarray, atol: float) -> None:
    if h.ndim != 3 or h.shape[1] != h.shape[2]:
        raise ValueError(f"expected square matrices, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    dev = float(np.max(np.abs(h - dagger(h)), initial=0.0))
    if dev > atol * scale:
        raise ValueError(f"matrix is not Hermitian (max |H - H^dag| = {dev:.3e})")


def jacobi_eigh(h, tol: float = 1e-15) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi.

    Returns ``(w, V)`` with ``w`` descending and ``h ≈ V @ diag(w) @ V^†``.
    """
    h = as_matrix(h)
    _check_hermitian_stack(h[None], HERMITIAN_TOL)
    herm = 0.5 * (h + dagger(h))
    w, v = _jacobi_batch(herm[None], tol)
    order = np.argsort(-w[0], kind="stable")
    return w[0][order], v[0][:, order]


def hermitian_eigvals_batch(h, tol: float = 1e-15) -> np.ndarray:
    """Descending eigenvalues for a stack ``(B, n, n)`` of Hermitian matrices."""
    h = as_matrix(h)
    _check_hermitian_stack(h, HERMITIAN_TOL)
    w, _ = _jacobi_batch(0.5 * (h + dagger(h)), tol, vectors=False)
    return -np.sort(-w, axis=1)


def hermitian_eigs(h, tolerance: float = NEGATIVE_TOL) -> Spectrum:
    """Spectrum of a Hermitian matrix (Jacobi oracle).

    Raises:
        ValueError: if ``h`` deviates from Hermitian by more than 1e-10.
    """
    w = hermitian_eigvals_batch(as_matrix(h)[None])[0]
    return Spectrum(w, tolerance)


def singular_values(a) -> np.ndarray:
    """Singular values, descending.

    Read off the Hermitian dilation ``[[0, a], [a^†, 0]]``, whose eigenvalues
    are ±σ; unlike ``a^† a`` this keeps small singular values accurate.
    """
    a = as_matrix(a)
    m, n = a.shape
    dil = np.zeros((m + n, m + n), dtype=complex)
    dil[:m, m:] = a
    dil[m:, :m] = dagger(a)
    w = hermitian_eigvals_batch(dil[None])[0]
    return np.clip(w[: min(m, n)], 0.0, None)


def trace_norm(a) -> float:
    """Schatten 1-norm. Uses |eigenvalues| directly for Hermitian input."""
    a = as_matrix(a)
    if not is_square(a):
        raise ValueError(f"trace_norm expects a square matrix, got shape {a.shape}")
    if is_hermitian(a, 1e-12 * max(1.0, float(np.max(np.abs(a), initial=0.0)))):
        return float(np.sum(np.abs(hermitian_eigs(a).eigenvalues)))
    return float(np.sum(singular_values(a)))


def trace_distance(r1, r2) -> float:
    """``½‖r1 − r2‖₁`` between two density matrices of equal dimension."""
    r1 = as_matrix(r1)
    r2 = as_matrix(r2)
    if r1.shape != r2.shape:
        raise ValueError(f"dimension mismatch: {r1.shape} vs {r2.shape}")
    return 0.5 * trace_norm(r1 - r2)


def trace_distances_batch(r1, r2) -> np.ndarray:
    """Trace distances for stacks of Hermitian matrix pairs ``(B, d, d)``."""
    diff = as_matrix(r1) - as_matrix(r2)
    if diff.ndim == 2:
        diff = diff[None]
    return 0.5 * np.sum(np.abs(hermitian_eigvals_batch(diff)), axis=1)


def check_density_matrix(
    rho,
    herm_tol: float = 1e-12,
    trace_tol: float = 1e-12,
    psd_tol: float = NEGATIVE_TOL,
) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Raises:
        ValueError: on non-square, non-Hermitian, wrong-trace or
            non-positive input.
    """
    rho = as_matrix(rho)
    if not is_square(rho):
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm_dev = float(np.max(np.abs(rho - dagger(rho)), initial=0.0))
    if herm_dev > herm_tol:
        raise ValueError(f"density matrix not Hermitian (deviation {herm_dev:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace is {tr.real:.15g}, expected 1")
    lo = hermitian_eigs(rho).min
    if lo < -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def is_density_matrix(rho, **tols) -> bool:
    try:
        check_density_matrix(rho, **tols)
    except ValueError:
        return False
    return True


def pure_state(psi) -> np.ndarray:
    psi = as_matrix(psi).reshape(-1)
    return np.outer(psi, np.conj(psi))
