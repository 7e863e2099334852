"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (shown in the terminal summary and on
stdout) and fails if its runtime budget is exceeded.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_density
from weylchan import cli, linalg
from weylchan.channel import ChannelParams, evolve, g_func, g_roots, singular_point
from weylchan.dynamics import integrate_master, singularity_report
from weylchan.measures import (
    blp_measure,
    blp_trace_distance,
    circulant_difference_closed,
    circulant_difference_spectrum,
    compare_criteria,
    decoherence_rate,
    hcla_measure,
    lemma1_check,
)
from weylchan.mubs import mub_family, pair_iterator
from weylchan.reps import IntermediateSpec, intermediate_choi_superop, intermediate_eigs, intermediate_eigenvalues

ALPHAS = np.round(np.arange(1, 11) / 10, 10)


@contextmanager
def criterion(number, name, budget):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed <= budget, f"took {elapsed:.2f} s, budget {budget} s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        line = f"AC{number:02d} {status} {name} ({elapsed:.2f} s, budget {budget} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)


def test_ac01_roots():
    with criterion(1, "roots of G", 1.0):
        lo, hi = g_roots(ChannelParams(3, 0.5))
        assert abs(lo - 0.814) <= 0.005 and abs(hi - 3.686) <= 0.005
        lo, hi = g_roots(ChannelParams(3, 0.8))
        assert abs(lo - 0.701) <= 0.005 and abs(hi - 2.674) <= 0.005


def _crossing(params, p_base, a, b):
    """Bisect for λ₀ = λ₁ on [a, b]."""
    def gap(p):
        lam = intermediate_eigenvalues(IntermediateSpec(params, p_base, p))
        return lam[0] - lam[1]
    fa = gap(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        if np.sign(gap(m)) == np.sign(fa):
            a, fa = m, gap(m)
        else:
            b = m
        if b - a < 1e-15:
            break
    return 0.5 * (a + b)


def test_ac02_markovian_spectrum():
    with criterion(2, "nonnegative spectrum and crossings", 1.0):
        params = ChannelParams(3, 0.5)
        grid = np.linspace(0.3, 1.0, 701)
        lam = np.array([intermediate_eigenvalues(IntermediateSpec(params, 0.3, p)) for p in grid])
        assert np.all(lam >= 0)
        s = singular_point(params)
        assert np.allclose(intermediate_eigenvalues(IntermediateSpec(params, 0.3, s)), 1.0, atol=1e-9)
        assert abs(_crossing(params, 0.3, 0.3, 1.0) - s) <= 1e-9
        base = ChannelParams(3, 0.0)
        assert np.allclose(intermediate_eigenvalues(IntermediateSpec(base, 0.0, 1.0)), 1.0, atol=1e-12)
        lam0 = np.array([intermediate_eigenvalues(IntermediateSpec(base, 0.0, p)) for p in grid])
        assert np.all(lam0[:-1, 0] > lam0[:-1, 1])


def test_ac03_ncp_spectrum():
    with criterion(3, "negative spectrum after 0.85", 1.0):
        params = ChannelParams(3, 0.5)
        for p in np.arange(851, 1001) / 1000:
            lam = intermediate_eigenvalues(IntermediateSpec(params, 0.85, float(p)))
            assert lam[1] == lam[2] and lam[1] < 0


def test_ac04_spectrum_oracle():
    with criterion(4, "analytic spectrum vs Jacobi oracle", 10.0):
        rng = np.random.default_rng(2024)
        worst = trace_worst = 0.0
        done = 0
        while done < 200:
            params = ChannelParams(int(rng.integers(2, 7)), float(rng.uniform(0.05, 1.0)))
            pb, ps = np.sort(rng.uniform(size=2))
            if abs(g_func(params, pb)) <= 1e-3:
                continue
            spec = IntermediateSpec(params, float(pb), float(ps))
            choi = intermediate_choi_superop(spec)
            oracle = choi.spectrum().eigenvalues
            worst = max(worst, np.max(np.abs(intermediate_eigs(spec).eigenvalues - oracle)))
            trace_worst = max(trace_worst, abs(choi.trace - params.d))
            done += 1
        assert worst <= 1e-9 and trace_worst <= 1e-9


def test_ac05_criteria_equivalence():
    with criterion(5, "CP and rate criteria agree", 30.0):
        grid = np.round(np.arange(0, 41) / 40, 12)
        for d in (2, 3, 4):
            for alpha in (0.2, 0.5, 0.8):
                params = ChannelParams(d, alpha)
                pts = grid[np.abs([g_func(params, p) for p in grid]) > 1e-9]
                cmp = compare_criteria(params, pts)
                assert cmp.agree, (d, alpha, cmp.disagreements[:3])


def test_ac06_rate_sign():
    with criterion(6, "rate sign change at the singular point", 1.0):
        params = ChannelParams(3, 0.8)
        s = singular_point(params)
        grid = np.arange(0, 1001) / 1000
        grid = grid[np.abs(grid - s) > 1e-9]
        gamma = np.array([decoherence_rate(params, p) for p in grid])
        change = grid[np.argmax(gamma < 0)]
        assert abs(change - s) <= 1e-3
        assert np.all(gamma[grid > s] < 0) and np.all(gamma[grid < s] > 0)
        base = ChannelParams(3, 0.0)
        for p in np.arange(0, 1000) / 1000:
            assert abs(decoherence_rate(base, p) - 1 / (3 * (1 - p))) <= 1e-12 * max(1.0, 1 / (1 - p))


def test_ac07_hcla():
    with criterion(7, "HCLA closed form vs quadrature", 10.0):
        for d in (2, 3, 4, 5):
            for a in ALPHAS:
                res = hcla_measure(ChannelParams(d, float(a)))
                assert abs(res.closed_form - res.numeric) <= 1e-6, (d, a)
        vals = [hcla_measure(ChannelParams(3, float(a))).closed_form for a in ALPHAS]
        assert np.all(np.diff(vals) >= 0)


def test_ac08_blp():
    with criterion(8, "BLP numeric equals alpha/d", 10.0):
        for d in (2, 3, 5, 7):
            for a in ALPHAS:
                res = blp_measure(ChannelParams(d, float(a)))
                assert abs(res.numeric - a / d) <= 1e-6, (d, a, res.numeric)
                if d == 3:
                    assert len(res.per_pair) == 9
                    assert all(abs(v - a / 3) <= 1e-6 for v in res.per_pair.values())


def test_ac09_trace_distance():
    with criterion(9, "trace-distance closed forms", 10.0):
        ps = np.linspace(0, 1, 20)
        for d in (2, 3, 5, 7):
            fam = mub_family(d)
            for a in (0.0, 0.5, 1.0):
                params = ChannelParams(d, a)
                e1, e2, closed = [], [], []
                for pid, v1, v2 in pair_iterator(fam, exclude_computational=False):
                    r1, r2 = linalg.pure_state(v1), linalg.pure_state(v2)
                    for p in ps:
                        dc = blp_trace_distance(params, p, pid, fam)
                        if pid[0] == 0:
                            assert dc == 1.0
                        elif a == 0.0:
                            assert dc == 1.0 - p
                        e1.append(evolve(params, p, r1))
                        e2.append(evolve(params, p, r2))
                        closed.append(dc)
                oracle = linalg.trace_distances_batch(np.array(e1), np.array(e2))
                assert np.max(np.abs(oracle - np.array(closed))) <= 1e-10


def test_ac10_circulant_identity():
    with criterion(10, "circulant identity and spectrum", 5.0):
        for d in range(2, 13):
            assert lemma1_check(d)
            for kap in (0.0, 0.4, 1.0):
                got = circulant_difference_spectrum(d, kap).eigenvalues
                assert np.max(np.abs(got - circulant_difference_closed(d, kap))) <= 1e-9


def test_ac11_dynamics():
    with criterion(11, "dynamics through the singular point", 10.0):
        rng = np.random.default_rng(7)
        params = ChannelParams(3, 0.5)
        rho = random_density(rng, 3)
        exact = evolve(params, 1.0, rho)
        errs = []
        for step in (4e-4, 2e-4, 1e-4):
            traj = integrate_master(params, rho, 0.0, 1.0, step)
            errs.append(np.max(np.abs(traj.final - exact)))
        assert errs[-1] <= 1e-8
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all((orders > 3.5) & (orders < 4.5)), orders
        states = traj.states
        assert np.max(np.abs(np.trace(states, axis1=1, axis2=2) - 1)) <= 1e-12
        assert np.max(np.abs(states - np.conj(np.swapaxes(states, 1, 2)))) <= 1e-12
        assert np.min(linalg.hermitian_eigvals_batch(states)) >= -1e-10
        assert singularity_report(params, rho).is_diagonal
        diag = np.diag(rng.dirichlet(np.ones(3))).astype(complex)
        assert np.all(integrate_master(params, diag, 0.0, 1.0, 1e-3).states == diag)


COMMANDS = [
    ["spectrum", "--p-base", "0.3", "--grid", "0.3:1:0.05"],
    ["rates", "--alpha", "0.8"],
    ["measures", "--grid", "0:1:0.25"],
    ["distance", "--pair", "2:0:1"],
    ["verify", "--d", "3"],
]


def test_ac12_determinism(tmp_path, capsys):
    with criterion(12, "byte-identical CLI output", 10.0):
        for k, argv in enumerate(COMMANDS):
            outs = []
            for run in range(2):
                path = tmp_path / f"{k}-{run}.csv"
                assert cli.main(argv + ["--out", str(path)]) == 0
                outs.append(path.read_bytes())
            assert outs[0] == outs[1], argv[0]
