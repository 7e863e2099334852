"""Choi and superoperator representations, intermediate maps and CP tests.

Conventions (row-major double indices):

* Choi matrix ``C = Σ_a |K_a⟩⟩⟨⟨K_a|`` so ``C[ij, kl] = ⟨i|E(|j⟩⟨l|)|k⟩``.
* Superoperator ``Ê = Σ_a K_a ⊗ conj(K_a)`` so ``Ê vec(X) = vec(E(X))``.
* ``C = reshuffle(Ê)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .channel import (
    SINGULAR_TOL,
    ChannelParams,
    KrausSet,
    SingularPointError,
    g_dot,
    g_func,
    kraus_special,
    offdiag_mask,
    singular_point,
)
from .quadrature import adaptive_simpson
from .linalg import NEGATIVE_TOL, Spectrum, as_matrix, dagger, vectorize
from .weyl import diagonal_phases

CONDITIONING_TOL = 1e-6
RHP_DELTA = 1e-4


class ConditioningWarning(UserWarning):
    """The base point of an intermediate map is close to the singular point."""


@dataclass(frozen=True)
class ChoiMatrix:
    d: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape != (self.d * self.d, self.d * self.d):
            raise ValueError(f"Choi matrix of shape {m.shape} for d={self.d}")
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def is_valid(self, herm_tol: float = 1e-10, trace_tol: float = 1e-9) -> bool:
        return linalg.is_hermitian(self.matrix, herm_tol) and abs(self.trace - self.d) <= trace_tol

    def spectrum(self) -> Spectrum:
        return linalg.hermitian_eigs(self.matrix)


@dataclass(frozen=True)
class IntermediateSpec:
    """Intermediate map E(p_star, p_base) = E(p_star) E(p_base)^-1."""

    params: ChannelParams
    p_base: float
    p_star: float

    def __post_init__(self):
        if not 0.0 <= self.p_base <= self.p_star <= 1.0:
            raise ValueError(
                f"need 0 <= p_base <= p_star <= 1, got p_base={self.p_base}, p_star={self.p_star}"
            )

    @property
    def ratio(self) -> float:
        """``R = G(p_star) / G(p_base)``; the off-diagonal scaling factor."""
        g0 = _guarded_base(self.params, self.p_base)
        return g_func(self.params, self.p_star) / g0


def _guarded_base(params: ChannelParams, p_base: float) -> float:
    g0 = g_func(params, p_base)
    if abs(g0) <= SINGULAR_TOL:
        raise SingularPointError(f"channel is not invertible at p_base={p_base} (G = {g0:.3e})")
    if abs(g0) < CONDITIONING_TOL:
        warnings.warn(
            f"G(p_base) = {g0:.3e} is close to zero; intermediate map is ill-conditioned",
            ConditioningWarning,
            stacklevel=3,
        )
    return g0


def choi_from_kraus(ks: KrausSet) -> ChoiMatrix:
    if not ks.complete:
        raise ValueError(
            f"Kraus set is not complete (max deviation {ks.completeness_error:.3e})"
        )
    n = ks.d * ks.d
    c = np.zeros((n, n), dtype=complex)
    for k in ks.operators:
        v = vectorize(k)
        c += np.outer(v, np.conj(v))
    return ChoiMatrix(ks.d, c)


def choi_from_map(channel: Callable[[np.ndarray], np.ndarray], d: int) -> ChoiMatrix:
    """``Σ_ij E(|i⟩⟨j|) ⊗ |i⟩⟨j|`` built by applying the map to matrix units.

    With ``kron(E(unit), unit)`` the entries land directly in the
    ``C[ij, kl]`` layout used by :func:`choi_from_kraus`.
    """
    n = d * d
    raw = np.zeros((n, n), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            raw += np.kron(as_matrix(channel(unit)), unit)
    return ChoiMatrix(d, raw)


def superop_from_kraus(ks: KrausSet) -> np.ndarray:
    n = ks.d * ks.d
    out = np.zeros((n, n), dtype=complex)
    for k in ks.operators:
        out += np.kron(k, np.conj(k))
    return out


def apply_superop(superop, rho) -> np.ndarray:
    rho = as_matrix(rho)
    return linalg.unvectorize(as_matrix(superop) @ vectorize(rho))


def invert_superop(superop) -> np.ndarray:
    """Inverse of a superoperator matrix.

    Diagonal matrices (the special class) are inverted entrywise; anything
    else goes through a dense linear solve.
    """
    s = as_matrix(superop)
    diag = np.diagonal(s)
    if np.count_nonzero(s - np.diag(diag)) == 0:
        if np.any(np.abs(diag) <= SINGULAR_TOL):
            raise SingularPointError("superoperator has a vanishing diagonal entry")
        return np.diag(1.0 / diag)
    return np.linalg.solve(s, np.eye(s.shape[0], dtype=complex))


def intermediate_choi(spec: IntermediateSpec) -> ChoiMatrix:
    """Block formula: ones on the ``(ii, ii)`` entries, R on ``(ii, jj)``, i≠j."""
    d = spec.params.d
    r = spec.ratio
    idx = np.arange(d) * (d + 1)
    c = np.zeros((d * d, d * d), dtype=complex)
    c[np.ix_(idx, idx)] = r
    c[idx, idx] = 1.0
    return ChoiMatrix(d, c)


def intermediate_superop(spec: IntermediateSpec) -> np.ndarray:
    _guarded_base(spec.params, spec.p_base)
    e_star = superop_from_kraus(kraus_special(spec.params, spec.p_star))
    e_base = superop_from_kraus(kraus_special(spec.params, spec.p_base))
    return e_star @ invert_superop(e_base)


def intermediate_choi_superop(spec: IntermediateSpec) -> ChoiMatrix:
    """Second route to the intermediate Choi matrix: reshuffle(Ê(p*) Ê(p⋆)⁻¹)."""
    return ChoiMatrix(spec.params.d, linalg.reshuffle(intermediate_superop(spec)))


def intermediate_eigenvalues(spec: IntermediateSpec) -> np.ndarray:
    """The d nonzero-block eigenvalues ``[1+(d-1)R, 1-R, ..., 1-R]``."""
    d = spec.params.d
    r = spec.ratio
    lam = np.full(d, 1.0 - r)
    lam[0] = 1.0 + (d - 1) * r
    return lam


def intermediate_eigs(spec: IntermediateSpec, tolerance: float = NEGATIVE_TOL) -> Spectrum:
    """Full analytic spectrum (d² values, descending) of the intermediate Choi matrix."""
    d = spec.params.d
    full = np.concatenate([intermediate_eigenvalues(spec), np.zeros(d * (d - 1))])
    return Spectrum(-np.sort(-full), tolerance)


def is_cp(spec: IntermediateSpec, tol: float = NEGATIVE_TOL) -> tuple[bool, float]:
    # the d(d-1) zero eigenvalues are included in the minimum
    lo = min(float(np.min(intermediate_eigenvalues(spec))), 0.0)
    return lo >= -tol, lo


def apply_intermediate(spec: IntermediateSpec, rho) -> np.ndarray:
    rho = as_matrix(rho)
    out = rho.copy()
    out[offdiag_mask(spec.params.d)] *= spec.ratio
    return out


def apply_intermediate_kraus(spec: IntermediateSpec, rho) -> np.ndarray:
    """``(1/d) Σ_j λ_j U_{dj} ρ U_{dj}^†`` with the analytic eigenvalues."""
    d = spec.params.d
    rho = as_matrix(rho)
    lam = intermediate_eigenvalues(spec)
    phases = diagonal_phases(d)
    out = np.zeros_like(rho)
    for j in range(d):
        out += lam[j] * np.outer(phases[j], np.conj(phases[j])) * rho
    return out / d


def normalized_trace_norm(choi: ChoiMatrix) -> float:
    return linalg.trace_norm(choi.matrix) / choi.d


def rhp_witness(params: ChannelParams, p: float, eps: float = 1e-6) -> float:
    """Finite-difference RHP witness ``(‖χ(p, p+ε)‖₁/d - 1) / ε``.

    The trace norm is taken numerically on the block-formula Choi matrix.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if p + eps > 1.0:
        raise ValueError(f"p + eps = {p + eps} exceeds 1")
    spec = IntermediateSpec(params, p, p + eps)
    return (normalized_trace_norm(intermediate_choi(spec)) - 1.0) / eps


def rhp_density(params: ChannelParams, p: float) -> float:
    """ε → 0 limit of :func:`rhp_witness`: ``2(d-1) max(0, -γ(p))``."""
    g = g_func(params, p)
    if abs(g) <= SINGULAR_TOL:
        raise SingularPointError(f"RHP witness diverges at p={p}")
    gamma = -g_dot(params, p) / (params.d * g)
    return 2.0 * (params.d - 1) * max(0.0, -gamma)


@dataclass(frozen=True)
class RhpResult:
    value: float
    delta: float
    window: tuple[float, float]
    divergent: bool
    delta_sensitivity: float
    closed_form: float
    note: str = "integral over [0,1] with a symmetric window around the singular point excised"


def rhp_integral(params: ChannelParams, delta: float = RHP_DELTA, tol: float = 1e-10) -> RhpResult:
    """Excised RHP integral ``∫ g(p) dp`` over [0, 1] minus (α₋-δ, α₋+δ).

    g(p) diverges like 1/|p - α₋| on the non-Markovian side, so the full
    integral is infinite whenever α > 0. The returned value depends on δ
    logarithmically; ``delta_sensitivity`` is value(δ/2) - value(δ).
    """
    if params.alpha == 0.0:
        return RhpResult(0.0, delta, (1.0, 1.0), False, 0.0, 0.0)
    a_minus = singular_point(params)
    lo, hi = a_minus - delta, a_minus + delta

    def integrate(upper_start: float) -> float:
        if upper_start >= 1.0:
            return 0.0
        # in u = ln(p - α₋) the 1/(p - α₋) growth becomes a smooth integrand
        return adaptive_simpson(
            lambda u: rhp_density(params, a_minus + math.exp(u)) * math.exp(u),
            math.log(upper_start - a_minus),
            math.log(1.0 - a_minus),
            tol,
        )

    value = integrate(hi)
    half = integrate(a_minus + delta / 2.0)
    d = params.d
    if hi < 1.0:
        closed = 2.0 * (d - 1) / d * math.log(abs(g_func(params, 1.0)) / abs(g_func(params, hi)))
    else:
        closed = 0.0
    return RhpResult(value, delta, (lo, hi), True, half - value, closed)


def channel_from_kraus(ks: KrausSet) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: sum(k @ x @ dagger(k) for k in ks.operators)
