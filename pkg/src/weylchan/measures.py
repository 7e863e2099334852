"""Decoherence rates and non-Markovianity measures of the special Weyl family.

Covers the canonical-rate criterion, the normalized HCLA measure, the
MUB-restricted BLP measure and the circulant spectra behind the
trace-distance closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .channel import (
    SINGULAR_TOL,
    ChannelParams,
    SingularPointError,
    g_dot,
    g_func,
    g_roots,
    singular_point,
)
from .linalg import Spectrum
from .mubs import MubFamily, PairId, check_pair, format_pair, mub_family, pair_iterator
from .quadrature import adaptive_simpson
from .reps import IntermediateSpec, is_cp
from .weyl import diagonal_phases, omega_pow

RATE_NEGATIVE_TOL = 1e-12
QUAD_TOL = 1e-9
BLP_TIE_TOL = 1e-9
EDGE_TRIM = 1e-10


# -- decoherence rates -------------------------------------------------------


def decoherence_rate(params: ChannelParams, p: float) -> float:
    """Common canonical rate ``γ(p) = -Ġ(p) / (d G(p))`` of all d-1 dissipators."""
    g = g_func(params, p)
    if abs(g) <= SINGULAR_TOL:
        raise SingularPointError(f"decoherence rate diverges at p={p}")
    return -g_dot(params, p) / (params.d * g)


def h_func(params: ChannelParams, p: float) -> float:
    """``h = d G + Ġ``, the denominator of the normalized rate."""
    d, a = params.d, params.alpha
    return (d - 1) * a * p * p - ((d - 2 * (d - 1) / d) * a + d) * p + d - 1 - a


def gamma_normalized(params: ChannelParams, p: float) -> float:
    """``γ' = -γ / (1 - γ) = Ġ / h``; finite at the singular point."""
    h = h_func(params, p)
    if abs(h) <= SINGULAR_TOL:
        raise SingularPointError(f"normalized rate undefined where h(p)=0, p={p}")
    return g_dot(params, p) / h


def is_markovian_rate(
    params: ChannelParams, p_grid: Iterable[float]
) -> tuple[bool, float | None]:
    """Rate criterion on a grid: non-Markovian iff some γ(p) < -1e-12.

    Returns ``(markovian, first_violation)``.
    """
    for p in p_grid:
        if decoherence_rate(params, float(p)) < -RATE_NEGATIVE_TOL:
            return False, float(p)
    return True, None


@dataclass(frozen=True)
class RateProfile:
    params: ChannelParams
    samples: tuple[tuple[float, float, float], ...]


def rate_profile(params: ChannelParams, p_grid: Iterable[float]) -> RateProfile:
    rows = []
    for p in p_grid:
        gamma = decoherence_rate(params, float(p))
        rows.append((float(p), gamma, -gamma / (1.0 - gamma)))
    return RateProfile(params, tuple(rows))


# -- criteria cross-check ------------------------------------------------------


def cp_matrix(params: ChannelParams, points: Sequence[float]) -> np.ndarray:
    """``ok[i, j]`` is True when the intermediate map points[i] -> points[j] is CP (i <= j)."""
    n = len(points)
    ok = np.ones((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            ok[i, j] = is_cp(IntermediateSpec(params, points[i], points[j]))[0]
    return ok


def short_step_cp(params: ChannelParams, points: Sequence[float], eps: float = 1e-7) -> np.ndarray:
    """CP status of the short intermediate maps (t - eps) -> t ending at each point."""
    out = np.ones(len(points), dtype=bool)
    for k, t in enumerate(points):
        if t - eps >= 0.0:
            out[k] = is_cp(IntermediateSpec(params, t - eps, t))[0]
    return out


@dataclass(frozen=True)
class CriteriaComparison:
    points: np.ndarray
    cp_verdict: np.ndarray
    rate_verdict: np.ndarray

    @property
    def agree(self) -> bool:
        iu = np.triu_indices(len(self.points), 1)
        return bool(np.all(self.cp_verdict[iu] == self.rate_verdict[iu]))

    @property
    def disagreements(self) -> list[tuple[float, float]]:
        iu = np.triu_indices(len(self.points), 1)
        bad = self.cp_verdict[iu] != self.rate_verdict[iu]
        return [(self.points[i], self.points[j]) for i, j in zip(iu[0][bad], iu[1][bad])]


def compare_criteria(
    params: ChannelParams, points: Sequence[float], eps: float = 1e-7
) -> CriteriaComparison:
    """Markovian verdicts on every cell [points[i], points[j]] under both criteria.

    The divisibility verdict for a cell requires every grid intermediate map
    inside the cell to be CP, together with the short maps (t - eps) -> t
    ending at grid points of the cell. The rate verdict requires γ >= 0 at
    every grid point of the cell.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    pair_ok = cp_matrix(params, pts)
    step_ok = short_step_cp(params, pts, eps)
    rate_ok = np.array([decoherence_rate(params, p) >= -RATE_NEGATIVE_TOL for p in pts])
    cp_verdict = np.zeros((n, n), dtype=bool)
    rate_verdict = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            cp_verdict[i, j] = pair_ok[i : j + 1, i : j + 1].all() and step_ok[i + 1 : j + 1].all()
            rate_verdict[i, j] = rate_ok[i : j + 1].all()
    return CriteriaComparison(pts, cp_verdict, rate_verdict)


# -- HCLA ----------------------------------------------------------------------


@dataclass(frozen=True)
class HclaResult:
    closed_form: float
    numeric: float
    h_roots: tuple[float, float]
    discriminant: float


def hcla_discriminant(params: ChannelParams) -> float:
    d, a = params.d, params.alpha
    b = (d - 2 * (d - 1) / d) * a + d
    return b * b - 4.0 * (d - 1) * a * (d - 1 - a)


def h_roots(params: ChannelParams) -> tuple[float, float]:
    d, a = params.d, params.alpha
    if a == 0.0:
        return math.nan, math.nan
    b = (d - 2 * (d - 1) / d) * a + d
    sq = math.sqrt(hcla_discriminant(params))
    return (b - sq) / (2.0 * (d - 1) * a), (b + sq) / (2.0 * (d - 1) * a)


def hcla_closed_form(params: ChannelParams) -> float:
    """Normalized HCLA measure in closed form; 0 for α = 0 by convention."""
    d, a = params.d, params.alpha
    if a == 0.0:
        return 0.0
    a_minus = g_roots(params)[0]
    p_minus, p_plus = h_roots(params)
    disc = hcla_discriminant(params)
    first = math.log(abs(h_func(params, 1.0) / h_func(params, a_minus))) / d
    coeff = 2.0 * (d - 1) * a / (d * d * math.sqrt(disc))
    ratio = ((1.0 - p_minus) * (a_minus - p_plus)) / ((1.0 - p_plus) * (a_minus - p_minus))
    return first + coeff * math.log(abs(ratio))


def hcla_measure(params: ChannelParams, tol: float = QUAD_TOL) -> HclaResult:
    """Closed form plus adaptive-Simpson quadrature of γ' over [α₋, 1].

    Raises:
        SingularPointError: if h has a root inside [α₋, 1], where γ' is
            unbounded.
    """
    disc = hcla_discriminant(params)
    roots = h_roots(params)
    if params.alpha == 0.0:
        return HclaResult(0.0, 0.0, roots, disc)
    a_minus = singular_point(params)
    for r in roots:
        if a_minus <= r <= 1.0:
            raise SingularPointError(f"h has a root at p={r} inside [{a_minus}, 1]")
    numeric = adaptive_simpson(lambda p: gamma_normalized(params, p), a_minus, 1.0, tol)
    return HclaResult(hcla_closed_form(params), float(numeric), roots, disc)


# -- BLP -----------------------------------------------------------------------


def blp_trace_distance(
    params: ChannelParams, p: float, pair: PairId, fam: MubFamily | None = None
) -> float:
    """Closed-form trace distance of an evolved same-basis MUB pair."""
    fam = fam or mub_family(params.d)
    basis, _, _ = check_pair(fam, pair)
    if basis == 0:
        return 1.0
    if params.alpha == 0.0:
        return abs(1.0 - p)
    a_minus, a_plus = g_roots(params)
    d, a = params.d, params.alpha
    return (d - 1) * a / d * abs((p - a_minus) * (p - a_plus))


def sigma_rate(
    params: ChannelParams, p: float, pair: PairId, fam: MubFamily | None = None
) -> float:
    """``dD/dp`` of :func:`blp_trace_distance`; 0 exactly at the kink p = α₋."""
    fam = fam or mub_family(params.d)
    basis, _, _ = check_pair(fam, pair)
    if basis == 0:
        return 0.0
    if params.alpha == 0.0:
        return -1.0
    a_minus, a_plus = g_roots(params)
    d, a = params.d, params.alpha
    slope = (d - 1) * a / d * (a_plus + a_minus - 2.0 * p)
    if p > a_minus:
        return slope
    if p < a_minus:
        return -slope
    return 0.0


def _kraus_factor(params: ChannelParams, ps: np.ndarray) -> np.ndarray:
    """Entrywise multipliers of Σ_a K_a ρ K_a^† for the diagonal Kraus set, per p."""
    d, a = params.d, params.alpha
    kap = ps * (1.0 + a * (1.0 - (d - 1) * ps / d))
    w0 = 1.0 - (d - 1) * kap / d
    wi = kap / d
    phases = diagonal_phases(d)
    rot = sum(np.outer(phases[i], np.conj(phases[i])) for i in range(1, d))
    return w0[:, None, None] * np.ones((d, d)) + wi[:, None, None] * rot


def evolved_distances(params: ChannelParams, rho1: np.ndarray, rho2: np.ndarray, ps) -> np.ndarray:
    """Oracle trace distances after applying the Kraus operators at p (batched).

    ``rho1``/``rho2`` are stacks (P, d, d); ``ps`` has one value per pair.
    """
    ps = np.asarray(ps, dtype=float)
    factor = _kraus_factor(params, ps)
    return linalg.trace_distances_batch(factor * rho1, factor * rho2)


def _pair_stack(fam: MubFamily, pairs: Sequence[PairId]) -> tuple[np.ndarray, np.ndarray]:
    v1 = np.array([fam.bases[b][i] for b, i, _ in pairs])
    v2 = np.array([fam.bases[b][j] for b, _, j in pairs])
    return (
        np.einsum("pi,pj->pij", v1, v1.conj()),
        np.einsum("pi,pj->pij", v2, v2.conj()),
    )


def _sigma_numeric(params, rho1, rho2, ps, lo=0.0, hi=1.0, h: float = 1e-6) -> np.ndarray:
    """Finite-difference dD/dp of the oracle distance.

    Stencils never leave ``[lo, hi]``: central inside, 3-point one-sided at
    the edges. Both are exact on quadratics, so only round-off remains.
    """
    ps = np.asarray(ps, dtype=float)
    lo = np.broadcast_to(lo, ps.shape)
    hi = np.broadcast_to(hi, ps.shape)
    forward = ps - h < lo
    backward = ~forward & (ps + h > hi)
    central = ~forward & ~backward
    step = np.where(backward, -h, h)
    pts = np.where(
        central[:, None],
        np.stack([ps - h, ps + h, ps + h], 1),
        np.stack([ps, ps + step, ps + 2.0 * step], 1),
    )
    n = len(ps)
    dist = evolved_distances(
        params, np.tile(rho1, (3, 1, 1)), np.tile(rho2, (3, 1, 1)), pts.T.reshape(-1)
    ).reshape(3, n)
    one_sided = (-3.0 * dist[0] + 4.0 * dist[1] - dist[2]) / (2.0 * step)
    return np.where(central, (dist[1] - dist[0]) / (2.0 * h), one_sided)


def _refine_extremum(params, rho1, rho2, a, b, minimum, coarse: float = 1e-3) -> np.ndarray:
    """Batched search for the kink or turning point of D in [a, b].

    Golden-section narrows each bracket to ``coarse``; two polish steps then
    intersect secant lines taken on either side of the estimate. At a kink
    the branches are smooth, so each step squares the error; at a smooth
    turning point the location error only enters the integral quadratically.
    """
    sign = np.where(minimum, 1.0, -1.0)

    def dist(p, n=1):
        r1 = np.repeat(rho1, n, 0) if n > 1 else rho1
        r2 = np.repeat(rho2, n, 0) if n > 1 else rho2
        return np.repeat(sign, n) * evolved_distances(params, r1, r2, p)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    c, e = b - invphi * (b - a), a + invphi * (b - a)
    fc, fe = dist(c), dist(e)
    while np.max(b - a) > coarse:
        left = fc < fe
        b = np.where(left, e, b)
        a = np.where(left, a, c)
        new_c = np.where(left, b - invphi * (b - a), e)
        new_e = np.where(left, c, a + invphi * (b - a))
        probe = dist(np.where(left, new_c, new_e))
        fc, fe = np.where(left, probe, fe), np.where(left, fc, probe)
        c, e = new_c, new_e

    x = 0.5 * (a + b)
    w = b - a
    for _ in range(2):
        lo, hi = np.maximum(x - 2.0 * w, 0.0), np.minimum(x + 2.0 * w, 1.0)
        pts = np.stack([lo, x - w, x + w, hi], 1)
        y = dist(pts.reshape(-1), 4).reshape(-1, 4)
        s_left = (y[:, 1] - y[:, 0]) / (pts[:, 1] - pts[:, 0])
        s_right = (y[:, 3] - y[:, 2]) / (pts[:, 3] - pts[:, 2])
        denom = s_right - s_left
        safe = np.where(np.abs(denom) > 0.0, denom, 1.0)
        cross = (y[:, 0] - y[:, 2] + s_right * pts[:, 2] - s_left * pts[:, 0]) / safe
        spans = (pts[:, 1] > pts[:, 0]) & (pts[:, 3] > pts[:, 2])
        ok = spans & (np.abs(denom) > 0.0) & (np.abs(cross - x) <= w)
        x = np.where(ok, cross, x)
        w = np.where(ok, np.maximum(w * w * 10.0, 1e-12), w)
    return x


def _positive_intervals(params, rho1, rho2, n_scan: int = 17) -> list[tuple[int, float, float]]:
    """Intervals of [0, 1] where D increases, per pair index.

    The slope pattern is read from D on an ``n_scan`` grid plus one-sided
    slopes at 0 and 1; each change of sign brackets an extremum, which is
    then located on D itself. Stretches shorter than the grid spacing can be
    missed; for this channel family D has one kink and one turning point at
    most, far apart.
    """
    n_pairs = len(rho1)
    grid = np.linspace(0.0, 1.0, n_scan)
    dist = evolved_distances(
        params, np.repeat(rho1, n_scan, 0), np.repeat(rho2, n_scan, 0), np.tile(grid, n_pairs)
    ).reshape(n_pairs, n_scan)
    ends = _sigma_numeric(
        params, np.repeat(rho1, 2, 0), np.repeat(rho2, 2, 0), np.tile([0.0, 1.0], n_pairs)
    ).reshape(n_pairs, 2)
    # slope signs at 0, on every cell, and at 1; bracket k spans states k and k+1
    rising = np.concatenate(
        [ends[:, :1] > 0.0, np.diff(dist, axis=1) > 0.0, ends[:, 1:] > 0.0], axis=1
    )
    bracket_lo = np.concatenate([[0.0], grid[:-1]])
    bracket_hi = np.concatenate([grid[1:], [1.0]])

    flips = [(k, m) for k in range(n_pairs) for m in range(n_scan) if rising[k, m] != rising[k, m + 1]]
    roots = {}
    if flips:
        idx = np.array([k for k, _ in flips])
        pos = np.array([m for _, m in flips])
        refined = _refine_extremum(
            params, rho1[idx], rho2[idx], bracket_lo[pos], bracket_hi[pos], rising[idx, pos + 1]
        )
        roots = dict(zip(flips, refined))

    intervals = []
    for k in range(n_pairs):
        start = 0.0 if rising[k, 0] else None
        for m in range(n_scan):
            if (k, m) not in roots:
                continue
            if rising[k, m + 1]:
                start = roots[(k, m)]
            else:
                intervals.append((k, start, roots[(k, m)]))
                start = None
        if start is not None:
            intervals.append((k, start, 1.0))
    return intervals


def blp_numeric_per_pair(
    params: ChannelParams, fam: MubFamily, pairs: Sequence[PairId], tol: float = QUAD_TOL
) -> np.ndarray:
    """``∫_{σ>0} σ dp`` for each pair, with σ from the oracle trace distance."""
    rho1, rho2 = _pair_stack(fam, pairs)
    intervals = _positive_intervals(params, rho1, rho2)
    out = np.zeros(len(pairs))
    if not intervals:
        return out
    k = np.array([iv[0] for iv in intervals])
    a = np.array([iv[1] for iv in intervals])
    b = np.array([iv[2] for iv in intervals])
    # located extrema are good to ~1e-9; stay clear so no stencil straddles a kink
    a = np.where(a > 0.0, a + EDGE_TRIM, a)
    b = np.where(b < 1.0, b - EDGE_TRIM, b)
    width = b - a

    def integrand(t: float) -> np.ndarray:
        return _sigma_numeric(params, rho1[k], rho2[k], a + t * width, a, b) * width

    vals = adaptive_simpson(integrand, 0.0, 1.0, tol)
    np.add.at(out, k, vals)
    return out


@dataclass(frozen=True)
class BlpResult:
    closed_form: float
    numeric: float
    basis_pair_id: str
    per_pair: dict[str, float] = field(default_factory=dict)
    label: str = "MUB-restricted BLP"


def blp_measure(params: ChannelParams, fam: MubFamily | None = None) -> BlpResult:
    """BLP measure maximized over same-basis pairs of non-computational MUBs.

    Ties (within 1e-9) go to the lowest basis index, then the lowest pair.
    """
    fam = fam or mub_family(params.d)
    pairs = [pid for pid, _, _ in pair_iterator(fam, exclude_computational=True)]
    values = blp_numeric_per_pair(params, fam, pairs)
    best = float(np.max(values))
    winner = next(pid for pid, v in zip(pairs, values) if v >= best - BLP_TIE_TOL)
    per_pair = {format_pair(pid): float(v) for pid, v in zip(pairs, values)}
    return BlpResult(params.alpha / params.d, best, format_pair(winner), per_pair)


# -- circulant machinery ------------------------------------------------------


def shift_power(d: int, i: int) -> np.ndarray:
    """Basic circulant ``J^i`` with ones at (r, r + i mod d)."""
    j = np.zeros((d, d))
    r = np.arange(d)
    j[r, (r + i) % d] = 1.0
    return j


def circulant_difference(d: int, kappa_val: float) -> np.ndarray:
    """``A = ((1-κ)/d) Σ_i (1 - ω^{d-i}) J^i``, the evolved Fourier-pair difference."""
    a = sum((1.0 - omega_pow(d, d - i)) * shift_power(d, i) for i in range(d))
    return (1.0 - kappa_val) / d * a


def circulant_difference_closed(d: int, kappa_val: float) -> np.ndarray:
    vals = np.zeros(d)
    vals[:2] = (1.0 - kappa_val) ** 2
    return vals


def circulant_difference_spectrum(d: int, kappa_val: float) -> Spectrum:
    """Jacobi spectrum of ``A²`` for the circulant difference matrix."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    a = circulant_difference(d, kappa_val)
    return linalg.hermitian_eigs(a @ a)


def lemma1_values(d: int) -> np.ndarray:
    """Brute-force polynomial ``Σ_k Σ_{i+j≡k} (1-ω^{d-i})(1-ω^{d-j}) x^k`` at x = ω^s."""
    coeff = np.zeros(d, dtype=complex)
    for i in range(d):
        for j in range(d):
            coeff[(i + j) % d] += (1.0 - omega_pow(d, d - i)) * (1.0 - omega_pow(d, d - j))
    out = np.zeros(d, dtype=complex)
    for s in range(d):
        out[s] = sum(coeff[k] * omega_pow(d, s * k) for k in range(d))
    return out


def lemma1_check(d: int, tol: float = 1e-9) -> bool:
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    expected = np.zeros(d)
    expected[:2] = d * d
    return bool(np.max(np.abs(lemma1_values(d) - expected)) <= tol)
