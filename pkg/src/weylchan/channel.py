"""The perturbed generalized Weyl channel family.

The special class keeps the identity and the d-1 diagonal Weyl operators as
Kraus operators, with weights set by the mixing function

    κ(p) = p [1 + α (1 - (d-1) p / d)],

and acts on a state by leaving its diagonal alone and scaling every
off-diagonal entry by ``G(p) = 1 - κ(p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import as_matrix, dagger
from .weyl import diagonal_phases, weyl_diagonal_family, weyl_flat

COMPLETENESS_TOL = 1e-10
SINGULAR_TOL = 1e-12


class SingularPointError(ValueError):
    """Raised at parameter values where G vanishes and the channel is not invertible."""


@dataclass(frozen=True)
class ChannelParams:
    d: int
    alpha: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.d}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class KrausSet:
    d: int
    operators: tuple[np.ndarray, ...]
    complete: bool = field(init=False)
    completeness_error: float = field(init=False)

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.operators)
        for k in ops:
            if k.shape != (self.d, self.d):
                raise ValueError(f"Kraus operator of shape {k.shape}, expected {(self.d, self.d)}")
        object.__setattr__(self, "operators", ops)
        total = sum((dagger(k) @ k for k in ops), np.zeros((self.d, self.d), dtype=complex))
        err = float(np.max(np.abs(total - np.eye(self.d))))
        object.__setattr__(self, "completeness_error", err)
        object.__setattr__(self, "complete", err <= COMPLETENESS_TOL)

    def __len__(self) -> int:
        return len(self.operators)

    def apply(self, rho) -> np.ndarray:
        rho = as_matrix(rho)
        return sum((k @ rho @ dagger(k) for k in self.operators), np.zeros_like(rho))


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def kappa(params: ChannelParams, p: float) -> float:
    _check_p(p)
    d, a = params.d, params.alpha
    return p * (1.0 + a * (1.0 - (d - 1) * p / d))


def g_func(params: ChannelParams, p: float) -> float:
    """``G(p) = 1 - κ(p)``, evaluated for any real p."""
    d, a = params.d, params.alpha
    return (d - 1) / d * a * p * p - (1.0 + a) * p + 1.0


def g_dot(params: ChannelParams, p: float) -> float:
    d, a = params.d, params.alpha
    return 2.0 * (d - 1) / d * a * p - (1.0 + a)


def g_roots(params: ChannelParams) -> tuple[float, float]:
    """Roots ``(α₋, α₊)`` of G.

    α₊ comes from the additive branch and α₋ from the root product
    ``d / ((d-1) α)``, which stays accurate for small α.

    Raises:
        ValueError: for α = 0, where G is linear. Use :func:`singular_point`
            for the α → 0⁺ limit.
    """
    d, a = params.d, params.alpha
    if a == 0.0:
        raise ValueError("G(p) = 1 - p has no quadratic roots at alpha = 0")
    disc = (1.0 + a) ** 2 - 4.0 * a * (d - 1) / d
    plus = d / (d - 1) * (1.0 + a + math.sqrt(disc)) / (2.0 * a)
    minus = (d / ((d - 1) * a)) / plus
    return minus, plus


def singular_point(params: ChannelParams) -> float:
    """α₋, or its α → 0⁺ limit 1 for the unperturbed channel."""
    if params.alpha == 0.0:
        return 1.0
    return g_roots(params)[0]


def kraus_special(params: ChannelParams, p: float) -> KrausSet:
    """d Kraus operators ``K_0 ∝ 1`` and ``K_{d·i} = sqrt(κ/d) U_{d·i}``.

    Operators are listed in the order K_0, K_d, K_{2d}, ...; the remaining
    d² - d Weyl components vanish and are not stored.
    """
    d = params.d
    k = kappa(params, p)
    w0 = 1.0 - (d - 1) * k / d
    wi = k / d
    if w0 < -1e-15 or wi < -1e-15:
        raise ValueError(f"negative Kraus weight at p={p}: ({w0}, {wi})")
    fam = weyl_diagonal_family(d)
    ops = [math.sqrt(max(w0, 0.0)) * fam[0]]
    ops += [math.sqrt(max(wi, 0.0)) * u for u in fam[1:]]
    return KrausSet(d, tuple(ops))


def kraus_full(params: ChannelParams, p: float, lambdas: Sequence[float]) -> KrausSet:
    """All d² Weyl-proportional Kraus operators with perturbations Λ_a.

    ``K_0 = sqrt((1+Λ_0)(1 - (d²-1)p/d²)) 1`` and
    ``K_a = sqrt((1+Λ_a) p/d²) U_a``. Completeness is measured on the
    result, not enforced; inspect ``KrausSet.complete``.

    Raises:
        ValueError: if any radicand is negative.
    """
    d = params.d
    _check_p(p)
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (d * d,):
        raise ValueError(f"expected {d * d} perturbation values, got {lam.shape}")
    weights = np.empty(d * d)
    weights[0] = (1.0 + lam[0]) * (1.0 - (d * d - 1) * p / (d * d))
    weights[1:] = (1.0 + lam[1:]) * p / (d * d)
    if np.any(weights < -1e-15):
        bad = int(np.argmin(weights))
        raise ValueError(f"negative radicand {weights[bad]:.3e} for Kraus operator {bad}")
    ops = tuple(math.sqrt(max(w, 0.0)) * weyl_flat(d, a) for a, w in enumerate(weights))
    return KrausSet(d, ops)


def special_lambdas(params: ChannelParams, p: float) -> tuple[float, np.ndarray]:
    """Perturbations (Λ_0, Λ_i) of the special class, i = 1..d-1."""
    d, a = params.d, params.alpha
    lam0 = -(d - 1) * a * p / d
    lam_i = np.full(d - 1, a * (1.0 - (d - 1) * p / d))
    return lam0, lam_i


def offdiag_mask(d: int) -> np.ndarray:
    return ~np.eye(d, dtype=bool)


def evolve(params: ChannelParams, p: float, rho0) -> np.ndarray:
    """Closed-form action: diagonal kept, off-diagonals scaled by G(p)."""
    _check_p(p)
    rho0 = as_matrix(rho0)
    out = rho0.copy()
    mask = offdiag_mask(params.d)
    out[mask] *= g_func(params, p)
    return out


def dephasing_component(params: ChannelParams, p: float, i: int, rho) -> np.ndarray:
    """One of the d-1 generalized Weyl dephasing channels averaged by the family."""
    d = params.d
    if not 1 <= i < d:
        raise ValueError(f"dephasing index must be in 1..{d - 1}, got {i}")
    k = kappa(params, p)
    rho = as_matrix(rho)
    phases = diagonal_phases(d)[i]
    rotated = np.outer(phases, np.conj(phases)) * rho
    return (1.0 - (d - 1) * k / d) * rho + (d - 1) * k / d * rotated
