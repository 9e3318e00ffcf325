import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rakeroom.errors import NotPositiveDefinite
from rakeroom.numerics import (
    check_covariance,
    cholesky,
    cholesky_solve,
    dominant_eigpair,
    fix_phase,
    hermitian_solve,
    is_hermitian,
)

from conftest import random_hpd


@pytest.mark.parametrize("M", [1, 2, 5, 12, 32, 64])
def test_cholesky_reconstructs(rng, M):
    K = random_hpd(rng, M, cond=1e4)
    C = cholesky(K)
    assert np.allclose(np.tril(C, -1), 0)
    assert np.all(np.diag(C).real > 0)
    np.testing.assert_allclose(C.conj().T @ C, K, atol=1e-12 * np.abs(K).max())


def test_cholesky_matches_lapack(rng):
    K = random_hpd(rng, 8)
    np.testing.assert_allclose(cholesky(K), np.linalg.cholesky(K).conj().T, atol=1e-12)


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        cholesky(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefinite):
        cholesky(np.ones((3, 3)))


@pytest.mark.parametrize("M", [3, 12, 40])
def test_solve_residual(rng, M):
    K = random_hpd(rng, M, cond=1e3)
    b = rng.standard_normal((M, 3)) + 1j * rng.standard_normal((M, 3))
    x = hermitian_solve(K, b)
    np.testing.assert_allclose(K @ x, b, atol=1e-10)
    np.testing.assert_allclose(cholesky_solve(cholesky(K), b[:, 0]), x[:, 0], atol=1e-12)


def test_hermitian_checks(rng):
    K = random_hpd(rng, 4)
    assert is_hermitian(K)
    check_covariance(K)
    bad = K.copy()
    bad[0, 1] += 1.0
    assert not is_hermitian(bad)
    with pytest.raises(ValueError):
        check_covariance(bad)
    with pytest.raises(ValueError):
        check_covariance(-K)


def test_fix_phase():
    v = np.array([0.1j, -2.0, 0.5])
    u = fix_phase(v)
    assert u[1] == pytest.approx(2.0)
    np.testing.assert_allclose(np.abs(u), np.abs(v))


@pytest.mark.parametrize("M", [2, 6, 12])
def test_dominant_eigpair_matches_eigh(rng, M):
    K = random_hpd(rng, M, cond=50)
    lam, v = dominant_eigpair(K)
    ev, V = np.linalg.eigh(K)
    assert lam == pytest.approx(ev[-1], rel=1e-10)
    assert abs(np.vdot(V[:, -1], v)) == pytest.approx(1.0, abs=1e-8)
    np.testing.assert_allclose(K @ v, lam * v, atol=1e-9 * lam)
    i = np.argmax(np.abs(v))
    assert v[i].imag == 0 and v[i].real >= 0


def test_dominant_eigpair_near_degenerate(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    ev = np.array([1.0, 0.5, 0.3, 0.2, 1.0 - 1e-7, 0.1])
    K = (Q * ev) @ Q.conj().T
    lam, v = dominant_eigpair(K)
    assert lam == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(np.linalg.norm(K @ v - lam * v), 0, atol=1e-6)


def test_dominant_eigpair_rank_one_orthogonal_to_ones():
    u = np.array([1.0, -1.0, 0, 0], dtype=complex) / np.sqrt(2)
    lam, v = dominant_eigpair(3.0 * np.outer(u, u.conj()))
    assert lam == pytest.approx(3.0)
    assert abs(np.vdot(u, v)) == pytest.approx(1.0)


def test_rayleigh_quotient_sampling(rng):
    """No sampled vector beats the reported maximum Rayleigh quotient."""
    K = random_hpd(rng, 8, cond=30)
    lam, _ = dominant_eigpair(K)
    X = rng.standard_normal((8, 100_000)) + 1j * rng.standard_normal((8, 100_000))
    rq = np.real(np.einsum("ij,ij->j", X.conj(), K @ X)) / np.sum(np.abs(X) ** 2, axis=0)
    assert rq.max() <= lam * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_cholesky_property(M, seed):
    K = random_hpd(np.random.default_rng(seed), M, cond=100)
    C = cholesky(K)
    np.testing.assert_allclose(C.conj().T @ C, K, atol=1e-12)


@pytest.mark.parametrize("c", [1e-6, 3.0, 1e4])
def test_dominant_eigpair_scale_equivariant(rng, c):
    K = random_hpd(rng, 6, cond=20)
    lam, v = dominant_eigpair(K)
    lam_c, v_c = dominant_eigpair(c * K)
    assert lam_c == pytest.approx(c * lam, rel=1e-10)
    np.testing.assert_allclose(v_c, v, atol=1e-8)
