import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_hermitian
from weylchan import linalg
from weylchan.channel import ChannelParams, kraus_special, kraus_full
from weylchan.linalg import (
    dagger,
    hermitian_eigs,
    jacobi_eigh,
    kron,
    reshuffle,
    trace_distance,
    trace_norm,
    unvectorize,
    vectorize,
)
from weylchan.weyl import omega_pow, weyl_kl


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_diagonal_phases():
    u = np.diag(omega_pow(3, np.arange(3)))
    out = kron(u, np.conj(u))
    assert np.allclose(out, np.diag(np.diag(out)))
    expected = [omega_pow(3, k - l) for k in range(3) for l in range(3)]
    assert np.allclose(np.diag(out), expected, atol=1e-15)
    assert np.allclose(out @ out.conj().T, np.eye(9))


def test_kron_trace_factorizes(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    brute = sum(a[i, i] * b[j, j] for i in range(3) for j in range(3))
    assert np.isclose(np.trace(kron(a, b)), brute)
    assert np.isclose(np.trace(kron(a, b)), np.trace(a) * np.trace(b))


def test_vectorize_readoff():
    assert np.array_equal(vectorize(np.eye(2)), [1, 0, 0, 1])
    assert np.array_equal(vectorize([[1, 2], [3, 4]]), [1, 2, 3, 4])


def test_vectorize_sandwich_identity(rng):
    x, z, y = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(vectorize(x @ z @ y), kron(x, y.T) @ vectorize(z), atol=1e-12)


def test_vectorize_rejects_non_square():
    with pytest.raises(ValueError):
        vectorize(np.zeros((2, 3)))


def test_unvectorize_roundtrip(rng):
    x = rng.normal(size=(4, 4))
    assert np.array_equal(unvectorize(vectorize(x)), x)
    with pytest.raises(ValueError):
        unvectorize(np.zeros(5))


def test_reshuffle_identity_superop():
    out = reshuffle(np.eye(4))
    expected = np.zeros((4, 4))
    expected[np.ix_([0, 3], [0, 3])] = 1.0
    assert np.array_equal(out, expected)


def test_reshuffle_index_rule(rng):
    d = 3
    m = rng.normal(size=(9, 9))
    c = reshuffle(m)
    for i, j, k, l in np.ndindex(d, d, d, d):
        assert c[i * d + j, k * d + l] == m[i * d + k, j * d + l]


def test_reshuffle_errors():
    with pytest.raises(ValueError):
        reshuffle(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        reshuffle(np.zeros((4, 2)))


@settings(max_examples=30, deadline=None)
@given(d=st.integers(2, 4), seed=st.integers(0, 2**32 - 1))
def test_reshuffle_involution(d, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(d * d, d * d)) + 1j * rng.normal(size=(d * d, d * d))
    assert np.array_equal(reshuffle(reshuffle(m)), m)


def test_reshuffle_superop_gives_choi_matrix():
    # a channel's reshuffled superoperator is the Choi matrix, PSD with trace d
    ks = kraus_special(ChannelParams(3, 0.5), 0.6)
    sup = sum(np.kron(k, np.conj(k)) for k in ks.operators)
    choi = reshuffle(sup)
    spec = hermitian_eigs(choi)
    assert spec.is_psd and np.isclose(np.trace(choi).real, 3.0)


def test_hermitian_eigs_diagonal():
    spec = hermitian_eigs(np.diag([1.0, 3.0, 1.0]))
    assert np.allclose(spec.eigenvalues, [3, 1, 1])
    assert spec.max == 3 and spec.min == 1 and len(spec) == 3 and spec.is_psd


def test_hermitian_eigs_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigs(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_spectrum_negativity_tolerance():
    spec = linalg.Spectrum(np.array([1.0, -5e-11, -2e-10]))
    assert spec.n_negative == 1 and not spec.is_psd


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_jacobi_reconstruction_and_trace(n, seed):
    h = random_hermitian(np.random.default_rng(seed), n)
    w, v = jacobi_eigh(h)
    assert np.all(np.diff(w) <= 0)
    resid = np.linalg.norm(h - v @ np.diag(w) @ v.conj().T)
    assert resid <= 1e-9 * max(np.linalg.norm(h), 1.0)
    assert abs(w.sum() - np.trace(h).real) <= 1e-10


def test_jacobi_matches_lapack(rng):
    h = random_hermitian(rng, 20)
    w, _ = jacobi_eigh(h)
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(h), atol=1e-12)


def test_jacobi_handles_degenerate_and_zero():
    w, v = jacobi_eigh(np.zeros((4, 4)))
    assert np.array_equal(w, np.zeros(4)) and np.allclose(v, np.eye(4))
    w, _ = jacobi_eigh(np.ones((5, 5)))
    assert np.allclose(w, [5, 0, 0, 0, 0], atol=1e-13)


def test_jacobi_huge_dynamic_range():
    h = np.array([[1e-200, 1e-300], [1e-300, 1.0]])
    w, _ = jacobi_eigh(h)
    assert np.allclose(w, [1.0, 1e-200], rtol=1e-12, atol=0)


def test_batched_eigvals_match_single(rng):
    stack = np.array([random_hermitian(rng, 5) for _ in range(30)])
    batch = linalg.hermitian_eigvals_batch(stack)
    for h, w in zip(stack, batch):
        assert np.allclose(w, jacobi_eigh(h)[0], atol=1e-13)


def test_trace_norm_examples():
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)
    assert trace_norm(np.array([[0.0, 2.0], [0.0, 0.0]])) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        trace_norm(np.zeros((2, 3)))


def test_singular_values_of_circulant_difference():
    # the κ = 0 difference of two evolved Fourier states in d = 3
    w = omega_pow(3, 1)
    psi1 = np.ones(3) / np.sqrt(3)
    psi2 = np.array([1, w, w**2]) / np.sqrt(3)
    a = np.outer(psi1, psi1.conj()) - np.outer(psi2, psi2.conj())
    assert np.allclose(linalg.singular_values(a), [1, 1, 0], atol=1e-12)


def test_trace_distance_examples(rng):
    e0, e1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert trace_distance(e0, e1) == pytest.approx(1.0)
    rho = random_density(rng, 3)
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        trace_distance(e0, np.eye(3) / 3)


def random_kraus_set(rng, d):
    """Complete Kraus set from the columns of a random isometry."""
    n = int(rng.integers(1, 4))
    z = rng.normal(size=(n * d, d)) + 1j * rng.normal(size=(n * d, d))
    q, _ = np.linalg.qr(z)
    return [q[k * d:(k + 1) * d] for k in range(n)]


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_trace_distance_contracts_under_channels(d):
    rng = np.random.default_rng(d)
    for _ in range(30):
        ks = random_kraus_set(rng, d)
        assert np.allclose(sum(k.conj().T @ k for k in ks), np.eye(d), atol=1e-10)
        r1, r2 = random_density(rng, d), random_density(rng, d)
        before = trace_distance(r1, r2)
        after = trace_distance(*(sum(k @ r @ k.conj().T for k in ks) for r in (r1, r2)))
        assert after <= before + 1e-10


def test_trace_distance_contracts_under_weyl_family(rng):
    for _ in range(100):
        d = int(rng.integers(2, 6))
        params = ChannelParams(d, float(rng.uniform()))
        ks = kraus_special(params, float(rng.uniform()))
        r1, r2 = random_density(rng, d), random_density(rng, d)
        assert trace_distance(ks.apply(r1), ks.apply(r2)) <= trace_distance(r1, r2) + 1e-10


def test_density_matrix_checks(rng):
    rho = random_density(rng, 3)
    assert linalg.check_density_matrix(rho) is not None
    assert not linalg.is_density_matrix(rho * 1.1)
    assert not linalg.is_density_matrix(np.diag([1.5, -0.5]))
    assert not linalg.is_density_matrix(np.array([[0.5, 0.1], [0.0, 0.5]]))
    assert linalg.is_density_matrix(linalg.pure_state([1, 1j]) / 2)


def test_dagger_on_stack(rng):
    stack = rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2))
    assert np.array_equal(dagger(stack)[1], stack[1].conj().T)


def test_full_family_is_a_channel_too(rng):
    # any complete full-family set also contracts
    params = ChannelParams(2, 0.0)
    ks = kraus_full(params, 0.4, np.zeros(4))
    assert ks.complete
    r1, r2 = random_density(rng, 2), random_density(rng, 2)
    assert trace_distance(ks.apply(r1), ks.apply(r2)) <= trace_distance(r1, r2) + 1e-12


def test_weyl_unitary_eigs_via_hermitian_parts():
    u = weyl_kl(3, 1, 1)
    w = hermitian_eigs(u + u.conj().T).eigenvalues
    assert np.allclose(np.sort(w), np.sort(2 * np.cos(np.angle(np.linalg.eigvals(u)))), atol=1e-12)
