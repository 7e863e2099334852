"""Fixed-step integration of the canonical master equation.

    dρ/dp = Σ_i γ(p) [U_{d·i} ρ U_{d·i}^† - ρ],   i = 1..d-1.

The rate γ diverges at the singular point α₋, but the solution does not:
every off-diagonal entry obeys dρ_jk/dp = (Ġ/G) ρ_jk, solved exactly by
ρ_jk(p) ∝ G(p). A small window around α₋ is bridged with that solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    SINGULAR_TOL,
    ChannelParams,
    SingularPointError,
    g_dot,
    g_func,
    offdiag_mask,
    singular_point,
)
from .linalg import as_matrix, check_density_matrix
from .reps import IntermediateSpec, apply_intermediate
from .weyl import diagonal_phases

BRIDGE_HALF_WIDTH = 1e-3
DIAGONAL_TOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    params: ChannelParams
    samples: tuple[tuple[float, np.ndarray], ...]
    start: float

    @property
    def ps(self) -> np.ndarray:
        return np.array([p for p, _ in self.samples])

    @property
    def states(self) -> np.ndarray:
        return np.array([rho for _, rho in self.samples])

    @property
    def final(self) -> np.ndarray:
        return self.samples[-1][1]

    def state_at(self, p: float, tol: float = 1e-12) -> np.ndarray:
        """The stored sample at ``p``; raises KeyError if none lies within ``tol``."""
        ps = self.ps
        k = int(np.argmin(np.abs(ps - p)))
        if abs(ps[k] - p) > tol:
            raise KeyError(f"no sample at p={p}")
        return self.samples[k][1]


def _generator(d: int) -> np.ndarray:
    """Entrywise form of Σ_i (U_i ρ U_i^† - ρ) for the diagonal Weyl operators."""
    phases = diagonal_phases(d)
    total = sum(np.outer(phases[i], np.conj(phases[i])) for i in range(1, d)) - (d - 1)
    # |phase|² = 1 up to rounding; pin the diagonal so populations stay exact
    np.fill_diagonal(total, 0.0)
    return total


def _rate(params: ChannelParams, p: float) -> float:
    return -g_dot(params, p) / (params.d * g_func(params, p))


def _rk4(params, gen, rho, a, b, step, samples):
    n = max(1, math.ceil((b - a) / step - 1e-9))
    h = (b - a) / n

    def rhs(p, x):
        return _rate(params, p) * gen * x

    for k in range(n):
        p = a + k * h
        k1 = rhs(p, rho)
        k2 = rhs(p + 0.5 * h, rho + 0.5 * h * k1)
        k3 = rhs(p + 0.5 * h, rho + 0.5 * h * k2)
        k4 = rhs(p + h, rho + h * k3)
        rho = rho + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        # land the last step exactly on b
        samples.append((b if k == n - 1 else a + (k + 1) * h, rho))
    return rho


def _bridge(params, rho, a, points, samples):
    """Exact scalar solution from ``a``: off-diagonals scaled by G(p)/G(a)."""
    g0 = g_func(params, a)
    mask = offdiag_mask(params.d)
    for p in points:
        out = rho.copy()
        out[mask] *= g_func(params, p) / g0
        samples.append((p, out))
    return samples[-1][1]


def integrate_master(
    params: ChannelParams,
    rho0,
    p_start: float,
    p_end: float,
    step: float,
    bridge: float = BRIDGE_HALF_WIDTH,
) -> Trajectory:
    """RK4 with fixed step from ``p_start`` to ``p_end``.

    Inside ``(α₋ - bridge, α₋ + bridge)`` the exact off-diagonal solution
    takes over, with a sample placed exactly at α₋. Steps are shrunk
    slightly so that they land on the window edges and on ``p_end``.

    Raises:
        ValueError: for ``step <= 0`` or an interval outside [0, 1].
        SingularPointError: if ``p_start`` is the singular point itself and
            ``rho0`` has coherences, which no state at α₋ can carry.
    """
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    if bridge <= 0.0:
        raise ValueError(f"bridge half-width must be positive, got {bridge}")
    if not 0.0 <= p_start <= p_end <= 1.0:
        raise ValueError(f"need 0 <= p_start <= p_end <= 1, got [{p_start}, {p_end}]")
    rho = as_matrix(rho0).astype(complex)
    check_density_matrix(rho)

    d = params.d
    gen = _generator(d)
    s = singular_point(params)
    lo, hi = s - bridge, s + bridge
    samples: list[tuple[float, np.ndarray]] = [(p_start, rho)]

    if abs(g_func(params, p_start)) <= SINGULAR_TOL:
        if np.max(np.abs(rho[offdiag_mask(d)]), initial=0.0) > DIAGONAL_TOL:
            raise SingularPointError(
                f"p_start={p_start} is the singular point; only diagonal states can sit there"
            )
        # diagonal states are fixed points of the whole family
        for p in _bridge_points(p_start, p_end, s, step):
            samples.append((p, rho.copy()))
        return Trajectory(params, tuple(samples), p_start)

    if p_end <= lo or p_start >= hi:
        if p_end > p_start:
            _rk4(params, gen, rho, p_start, p_end, step, samples)
        return Trajectory(params, tuple(samples), p_start)

    p = p_start
    if p < lo:
        rho = _rk4(params, gen, rho, p, lo, step, samples)
        p = lo
    end = min(hi, p_end)
    rho = _bridge(params, rho, p, _bridge_points(p, end, s, step), samples)
    if end < p_end:
        _rk4(params, gen, rho, end, p_end, step, samples)
    return Trajectory(params, tuple(samples), p_start)


def _bridge_points(a: float, b: float, s: float, step: float) -> list[float]:
    """Sample points in (a, b] on the step grid, plus the singular point s."""
    n = max(1, math.ceil((b - a) / step - 1e-9))
    pts = {a + k * (b - a) / n for k in range(1, n)} | {b}
    if a < s < b:
        pts.add(s)
    return sorted(p for p in pts if p > a)


@dataclass(frozen=True)
class SingularityReport:
    alpha_minus: float
    state: np.ndarray
    offdiag_max: float
    is_diagonal: bool
    fixed_point_residual: float
    revival_factor: float


def singularity_report(
    params: ChannelParams, rho0, step: float = 1e-3
) -> SingularityReport:
    """Evolve from p = 0 to α₋ and check the state there.

    ``fixed_point_residual`` is the largest entrywise change of ρ(α₋) under
    a spread of intermediate maps; ``revival_factor`` = G(1)/G(0) is the
    signed factor by which coherences return at p = 1.

    Raises:
        ValueError: if α₋ >= 1 (α = 0), so there is no interior singular point.
    """
    s = singular_point(params)
    if s >= 1.0:
        raise ValueError(f"no interior singular point for alpha={params.alpha}")
    traj = integrate_master(params, rho0, 0.0, s, step)
    state = traj.state_at(s)
    off = float(np.max(np.abs(state[offdiag_mask(params.d)]), initial=0.0))

    residual = 0.0
    for p_base in (0.0, 0.5 * s):
        for p_star in (s, 0.5 * (s + 1.0), 1.0):
            moved = apply_intermediate(IntermediateSpec(params, p_base, p_star), state)
            residual = max(residual, float(np.max(np.abs(moved - state))))
    phases = diagonal_phases(params.d)
    for i in range(1, params.d):
        rot = np.outer(phases[i], np.conj(phases[i]))
        np.fill_diagonal(rot, 1.0)
        rotated = rot * state
        residual = max(residual, float(np.max(np.abs(rotated - state))))

    revival = g_func(params, 1.0) / g_func(params, 0.0)
    return SingularityReport(s, state, off, off <= DIAGONAL_TOL, residual, revival)
