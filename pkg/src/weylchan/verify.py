"""Self-check suites run by ``weylchan verify``.

Each suite returns a :class:`SuiteResult` with the worst deviation it saw.
Random trials draw from a generator seeded by ``WEYLCHAN_SEED`` (default 0).
"""

from __future__ import annotations

import os
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg, measures, mubs, reps
from .channel import ChannelParams, evolve, g_func, kraus_full, kraus_special
from .dynamics import integrate_master
from .weyl import omega_pow, weyl_kl

TIME_BUDGET = 60.0


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    detail: str
    seconds: float


def seed_from_env() -> int:
    return int(os.environ.get("WEYLCHAN_SEED", "0"))


def _random_params(rng, d_lo: int, d_hi: int, alpha_lo: float = 0.0) -> ChannelParams:
    return ChannelParams(int(rng.integers(d_lo, d_hi + 1)), float(rng.uniform(alpha_lo, 1.0)))


def random_density(rng, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _random_full_kraus(rng, d: int):
    """Complete d²-operator Weyl channel with random weights."""
    p = float(rng.uniform(0.1, 0.9))
    lam = rng.uniform(-0.5, 0.5, size=d * d)
    rest = np.sum((1.0 + lam[1:]) * p / d**2)
    lam[0] = (1.0 - rest) / (1.0 - (d * d - 1) * p / d**2) - 1.0
    return kraus_full(ChannelParams(d, 0.0), p, lam)


def weyl_algebra(max_d: int = 5, **_) -> SuiteResult:
    worst = 0.0
    for d in range(2, max_d + 1):
        ops = {(k, l): weyl_kl(d, k, l) for k in range(d) for l in range(d)}
        for (k, l), u in ops.items():
            adj = omega_pow(d, k * l) * ops[(-k % d, -l % d)]
            worst = max(worst, float(np.max(np.abs(u.conj().T - adj))))
            for (r, s), v in ops.items():
                prod = omega_pow(d, l * r) * ops[((k + r) % d, (l + s) % d)]
                worst = max(worst, float(np.max(np.abs(u @ v - prod))))
                overlap = np.trace(u.conj().T @ v)
                expected = d if (k, l) == (r, s) else 0.0
                worst = max(worst, abs(overlap - expected))
    return SuiteResult("weyl-algebra", worst <= 1e-12, worst, f"d=2..{max_d} exhaustive", 0.0)


def representation_roundtrip(rng=None, trials: int = 40, max_d: int = 5, **_) -> SuiteResult:
    """Choi matrices built three ways must agree.

    Goes through ``linalg.reshuffle`` by attribute so a swapped index
    convention there shows up here.
    """
    rng = rng or np.random.default_rng(seed_from_env())
    worst = 0.0
    for _ in range(trials):
        params = _random_params(rng, 2, max_d)
        p = float(rng.uniform(0.0, 1.0))
        ks = kraus_special(params, p)
        choi = reps.choi_from_kraus(ks).matrix
        via_superop = linalg.reshuffle(reps.superop_from_kraus(ks))
        via_map = reps.choi_from_map(reps.channel_from_kraus(ks), params.d).matrix
        worst = max(worst, float(np.max(np.abs(choi - via_superop))))
        worst = max(worst, float(np.max(np.abs(choi - via_map))))
        # the special class has a diagonal superoperator, which hides index
        # mix-ups; a full-family channel does not
        full = _random_full_kraus(rng, params.d)
        full_choi = reps.choi_from_kraus(full).matrix
        worst = max(worst, float(np.max(np.abs(full_choi - linalg.reshuffle(reps.superop_from_kraus(full))))))
        rho = random_density(rng, params.d)
        out = reps.apply_superop(reps.superop_from_kraus(ks), rho)
        worst = max(worst, float(np.max(np.abs(out - evolve(params, p, rho)))))
    return SuiteResult("representation", worst <= 1e-10, worst, f"{trials} random channels", 0.0)


def spectra(rng=None, trials: int = 200, max_d: int = 6, **_) -> SuiteResult:
    """Analytic intermediate spectra against the Jacobi oracle on the reshuffled Choi."""
    rng = rng or np.random.default_rng(seed_from_env())
    worst = 0.0
    trace_worst = 0.0
    done = 0
    while done < trials:
        params = _random_params(rng, 2, max_d, alpha_lo=0.05)
        p_base, p_star = np.sort(rng.uniform(0.0, 1.0, 2))
        if abs(g_func(params, p_base)) <= 1e-3:
            continue
        spec = reps.IntermediateSpec(params, float(p_base), float(p_star))
        choi = reps.intermediate_choi_superop(spec)
        oracle = choi.spectrum().eigenvalues
        analytic = reps.intermediate_eigs(spec).eigenvalues
        worst = max(worst, float(np.max(np.abs(analytic - oracle))))
        trace_worst = max(trace_worst, abs(choi.trace - params.d))
        done += 1
    ok = worst <= 1e-9 and trace_worst <= 1e-9
    return SuiteResult("spectra", ok, max(worst, trace_worst), f"{trials} random intermediate maps", 0.0)


def circulant_identity(max_d: int = 12, **_) -> SuiteResult:
    worst = 0.0
    for d in range(2, max(12, max_d) + 1):
        expected = np.zeros(d)
        expected[:2] = d * d
        worst = max(worst, float(np.max(np.abs(measures.lemma1_values(d) - expected))))
        for kappa in (0.0, 0.4, 1.0):
            got = measures.circulant_difference_spectrum(d, kappa).eigenvalues
            want = measures.circulant_difference_closed(d, kappa)
            worst = max(worst, float(np.max(np.abs(got - want))))
    return SuiteResult("circulant", worst <= 1e-9, worst, "d=2..12 polynomial and circulant spectra", 0.0)


def mub_checks(max_d: int = 8, **_) -> SuiteResult:
    worst = 0.0
    ok = True
    for d in range(2, max_d + 1):
        fam = mubs.mub_family(d)
        good, dev = mubs.verify_mub(fam)
        ok &= good and (fam.complete == (d == 2 or mubs.is_prime(d)))
        worst = max(worst, dev)
    ref = mubs.qutrit_reference_family()
    built = mubs.mub_family(3)
    for b in range(ref.count):
        dev = mubs.projector_distance(ref, b, built, b)
        worst = max(worst, dev)
        ok &= dev <= 1e-10
    return SuiteResult("mubs", bool(ok), worst, f"d=2..{max_d} plus qutrit reference", 0.0)


def ode_convergence(rng=None, **_) -> SuiteResult:
    """Endpoint error through α₋ at three step sizes; each halving should gain ~16x."""
    rng = rng or np.random.default_rng(seed_from_env())
    params = ChannelParams(3, 0.5)
    rho0 = random_density(rng, 3)
    exact = evolve(params, 1.0, rho0)
    errs = []
    for step in (1e-3, 5e-4, 2.5e-4):
        traj = integrate_master(params, rho0, 0.0, 1.0, step)
        errs.append(float(np.max(np.abs(traj.final - exact))))
    ratios = [errs[k] / errs[k + 1] for k in range(len(errs) - 1)]
    ok = all(10.0 <= r <= 24.0 for r in ratios) and errs[-1] <= 1e-8
    detail = "ratios " + ", ".join(f"{r:.1f}" for r in ratios)
    return SuiteResult("ode-convergence", ok, errs[-1], detail, 0.0)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "weyl-algebra": weyl_algebra,
    "representation": representation_roundtrip,
    "spectra": spectra,
    "circulant": circulant_identity,
    "mubs": mub_checks,
    "ode-convergence": ode_convergence,
}


def run_all(max_d: int = 6, seed: int | None = None) -> list[SuiteResult]:
    """Run every suite; failures are recorded, not raised."""
    seed = seed_from_env() if seed is None else seed
    results = []
    start = time.perf_counter()
    for name, suite in SUITES.items():
        t0 = time.perf_counter()
        try:
            res = suite(rng=np.random.default_rng(seed), max_d=max_d)
        except Exception as exc:  # a crashing suite is a failing suite
            res = SuiteResult(name, False, float("nan"), f"error: {exc}", 0.0)
        results.append(
            SuiteResult(res.name, res.passed, res.worst, res.detail, time.perf_counter() - t0)
        )
    elapsed = time.perf_counter() - start
    if elapsed > TIME_BUDGET:
        warnings.warn(f"verification took {elapsed:.1f} s (budget {TIME_BUDGET:.0f} s)")
    return results
