"""Dense complex Hermitian kernels for small (M <= 64) matrices.

Conventions: ``cholesky`` returns the upper-triangular ``C`` with
``K = C^H C``.  Eigenvectors are normalised to unit length and rotated so
that their largest-modulus entry is real and non-negative.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NoConvergence, NotPositiveDefinite


def hermitian_part(K: np.ndarray) -> np.ndarray:
    return 0.5 * (K + K.conj().T)


def is_hermitian(K: np.ndarray, rtol: float = 1e-12) -> bool:
    K = np.asarray(K)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        return False
    scale = max(np.max(np.abs(K)), np.finfo(float).tiny)
    return bool(np.max(np.abs(K - K.conj().T)) <= rtol * scale)


def check_covariance(K: np.ndarray) -> None:
    """Raise ``ValueError`` unless ``K`` is Hermitian and numerically PSD."""
    if not is_hermitian(K):
        raise ValueError("matrix is not Hermitian")
    M = K.shape[0]
    floor = -1e-10 * np.real(np.trace(K)) / M
    if np.min(np.linalg.eigvalsh(hermitian_part(K))) < floor:
        raise ValueError("matrix is not positive semi-definite")


def cholesky(K: np.ndarray) -> np.ndarray:
    """Upper-triangular ``C`` such that ``C^H C = K``.

    Row-oriented Cholesky-Banachiewicz on the Hermitian part of ``K``.
    Raises :class:`NotPositiveDefinite` on the first non-positive pivot.
    """
    A = hermitian_part(np.asarray(K, dtype=complex))
    M = A.shape[0]
    C = np.zeros_like(A)
    for j in range(M):
        pivot = A[j, j].real - np.vdot(C[:j, j], C[:j, j]).real
        if not pivot > 0.0:
            raise NotPositiveDefinite(f"pivot {j} is {pivot:.3e}")
        C[j, j] = np.sqrt(pivot)
        if j + 1 < M:
            # row j of C: (A[j, k] - sum_i conj(C[i, j]) C[i, k]) / C[j, j]
            C[j, j + 1 :] = (A[j, j + 1 :] - C[:j, j].conj() @ C[:j, j + 1 :]) / C[j, j]
    return C


def cholesky_solve(C: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``(C^H C) x = b`` given the factor from :func:`cholesky`."""
    y = solve_triangular(C, b, trans="C", lower=False)
    return solve_triangular(C, y, lower=False)


def hermitian_solve(K: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``K x = b`` for Hermitian positive definite ``K``.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    return cholesky_solve(cholesky(K), np.asarray(b, dtype=complex))


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-modulus entry is real and non-negative."""
    i = int(np.argmax(np.abs(v)))
    if abs(v[i]) == 0:
        return v
    u = v * (abs(v[i]) / v[i])
    u[i] = abs(v[i])
    return u


def dominant_eigpair(
    H: np.ndarray, max_iter: int = 10_000, tol: float = 1e-12, squarings: int = 40
) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and its eigenvector for a Hermitian PSD matrix.

    Power iteration from the normalised all-ones vector.  Plain power
    iteration stalls when the top two eigenvalues are close, so the start
    vector is first pushed through ``H^(2^j)`` built by repeated squaring
    (each square renormalised by its trace); the ordinary iteration then
    only polishes the result.  Convergence is declared when successive
    Rayleigh quotients agree to ``tol`` relative.
    """
    H = hermitian_part(np.asarray(H, dtype=complex))
    M = H.shape[0]
    scale = np.real(np.trace(H))
    if not scale > 0:
        v = np.zeros(M, dtype=complex)
        v[0] = 1.0
        return 0.0, v
    A = H / scale

    P = A.copy()
    for _ in range(squarings):
        Q = hermitian_part(P @ P)
        tr = np.real(np.trace(Q))
        if not tr > 0:
            break
        Q /= tr
        done = np.max(np.abs(Q - P)) < 1e-15
        P = Q
        if done:
            break

    start = np.ones(M, dtype=complex) / np.sqrt(M)
    v = P @ start
    if np.linalg.norm(v) < 1e-8:
        # all-ones start is (nearly) orthogonal to the dominant eigenspace
        v = P[:, int(np.argmax(np.linalg.norm(P, axis=0)))]
    v = v / np.linalg.norm(v)

    rq = np.real(np.vdot(v, A @ v))
    for _ in range(max_iter):
        u = A @ v
        nu = np.linalg.norm(u)
        if nu == 0:
            break
        v = u / nu
        rq_new = np.real(np.vdot(v, A @ v))
        if abs(rq_new - rq) <= tol * abs(rq_new):
            rq = rq_new
            break
        rq = rq_new
    else:
        raise NoConvergence(f"power iteration did not converge in {max_iter} steps")

    return float(rq * scale), fix_phase(v)
