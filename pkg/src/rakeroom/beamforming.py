"""Per-frequency beamformer designs, with and without raking of early echoes.

Every design takes steering vectors and a noise-plus-interference covariance
for one frequency and returns a weight vector ``w``; the beamformer output is
``w^H y``.  ``A_s`` is the ``(M, K + 1)`` matrix whose first column is the
direct path of the desired source and the remaining columns its images.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .acoustics import MicArray, Medium, green, steering_matrix
from .errors import (
    CancellingSteeringVectors,
    ConfigError,
    IllConditionedConstraints,
    TooManyConstraints,
    ZeroSteeringVector,
)
from .geometry import ImageSourceSet
from .numerics import cholesky, dominant_eigpair, hermitian_solve

RIDGE = 1e-10
MAX_CONSTRAINT_COND = 1e8

DESIGNS = ("ds", "max-sinr", "rake-ds", "rake-of", "rake-max-sinr", "rake-max-udr")
RAKE_DESIGNS = frozenset({"rake-ds", "rake-of", "rake-max-sinr", "rake-max-udr"})


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Sensor-noise covariance and flat source powers used in every design."""

    K_n: np.ndarray
    sigma_x2: float = 1.0
    sigma_z2: float = 1.0

    @classmethod
    def white(cls, M: int, variance: float = 1e-3, sigma_x2: float = 1.0, sigma_z2: float = 1.0) -> NoiseModel:
        return cls(variance * np.eye(M), sigma_x2, sigma_z2)


@dataclass(frozen=True, eq=False)
class BeamWeights:
    """One weight vector per frequency bin, stacked as ``w[bin, mic]``."""

    w: np.ndarray
    design: str
    K: int = 0
    K_prime: int = 0
    frequencies: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not np.all(np.isfinite(self.w)):
            raise ValueError("beamformer weights contain non-finite values")


def build_covariance(K_n, A_q=None, sigma_z2: float = 1.0, ridge: float = RIDGE) -> np.ndarray:
    """Noise plus coherently summed interferer covariance, with a small diagonal ridge.

    ``A_q`` holds the steering vectors of the interferer and its images
    (``None`` when there is no interferer).  The ridge is ``ridge * trace / M``.
    """
    K = np.array(K_n, dtype=complex)
    if A_q is not None and sigma_z2:
        A_q = np.asarray(A_q)
        q = A_q.sum(axis=1) if A_q.ndim == 2 else A_q
        K = K + sigma_z2 * np.outer(q, q.conj())
    K = 0.5 * (K + K.conj().T)
    M = K.shape[0]
    K += ridge * np.real(np.trace(K)) / M * np.eye(M)
    return K


def weights_ds(a_s) -> np.ndarray:
    """Delay-and-sum: the normalised steering vector."""
    a_s = np.asarray(a_s, dtype=complex)
    n = np.linalg.norm(a_s)
    if n == 0:
        raise ZeroSteeringVector("steering vector is zero")
    return a_s / n


def weights_max_sinr(a_s, K_nq) -> np.ndarray:
    """Distortionless SINR maximiser, ``w^H a_s = 1``."""
    a_s = np.asarray(a_s, dtype=complex)
    x = hermitian_solve(K_nq, a_s)
    return x / np.vdot(a_s, x)


def _summed(A_s) -> np.ndarray:
    A_s = np.atleast_2d(np.asarray(A_s, dtype=complex).T).T
    s = A_s.sum(axis=1)
    if np.linalg.norm(s) < 1e-12 * np.linalg.norm(A_s):
        raise CancellingSteeringVectors("steering vectors of the images cancel out")
    return s


def weights_rake_ds(A_s) -> np.ndarray:
    """Sum of the delay-and-sum beamformers of every image, unit norm."""
    return weights_ds(_summed(A_s))


def weights_rake_of(A_s, K_nq) -> np.ndarray:
    """One-Forcing: unit response toward every image, minimum noise and interference.

    Solves the LCMV problem ``min w^H K_nq w`` s.t. ``w^H a(s_k) = 1`` for all k.
    Works in the whitened space ``B = C^{-H} A_s`` with a QR factorisation
    of ``B`` instead of the Gram matrix ``A_s^H K_nq^{-1} A_s``, whose
    condition number is the square of that of ``B``.
    """
    A_s = np.asarray(A_s, dtype=complex)
    M, n = A_s.shape
    if n > M:
        raise TooManyConstraints(f"{n} constraints exceed {M} degrees of freedom")
    C = cholesky(K_nq)
    B = solve_triangular(C, A_s, trans="C", lower=False)
    sv = np.linalg.svd(B, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] >= MAX_CONSTRAINT_COND:
        raise IllConditionedConstraints("image steering vectors are nearly linearly dependent")
    Q, R = np.linalg.qr(B)
    # B^H w~ = 1 with w~ in range(B): w~ = Q R^{-H} 1
    w_white = Q @ solve_triangular(R, np.ones(n, dtype=complex), trans="C", lower=False)
    return solve_triangular(C, w_white, lower=False)


def weights_rake_max_sinr(A_s, K_nq) -> np.ndarray:
    """Max-SINR on the summed steering vector, ``w^H A_s 1 = 1``."""
    return weights_max_sinr(_summed(A_s), K_nq)


def max_udr(A_s, K_nq) -> tuple[np.ndarray, float]:
    """Maximiser of ``w^H A_s A_s^H w / w^H K_nq w`` and the maximum itself."""
    A_s = np.atleast_2d(np.asarray(A_s, dtype=complex).T).T
    if not np.any(A_s):
        raise ZeroSteeringVector("all steering vectors are zero")
    C = cholesky(K_nq)
    B = solve_triangular(C, A_s, trans="C", lower=False)
    lam, v = dominant_eigpair(B @ B.conj().T)
    return solve_triangular(C, v, lower=False), lam


def weights_rake_max_udr(A_s, K_nq) -> np.ndarray:
    return max_udr(A_s, K_nq)[0]


def design(name: str, A_s, K_nq) -> np.ndarray:
    """Weights of design ``name``; non-raking designs use the first column only."""
    A_s = np.atleast_2d(np.asarray(A_s, dtype=complex).T).T
    if name == "ds":
        return weights_ds(A_s[:, 0])
    if name == "max-sinr":
        return weights_max_sinr(A_s[:, 0], K_nq)
    if name == "rake-ds":
        return weights_rake_ds(A_s)
    if name == "rake-of":
        return weights_rake_of(A_s, K_nq)
    if name == "rake-max-sinr":
        return weights_rake_max_sinr(A_s, K_nq)
    if name == "rake-max-udr":
        return weights_rake_max_udr(A_s, K_nq)
    raise ConfigError(f"unknown design {name!r}, choose from {', '.join(DESIGNS)}")


def normalize_response(w, A_s) -> np.ndarray:
    """Rescale ``w`` so the response to the summed steering vector is exactly 1.

    Left unchanged when that response vanishes.
    """
    w = np.asarray(w, dtype=complex)
    g = np.vdot(w, np.atleast_2d(np.asarray(A_s).T).T.sum(axis=1))
    if abs(g) < 1e-12 * np.linalg.norm(w) * np.linalg.norm(A_s):
        return w
    return w / np.conj(g)


def design_models(name: str, K: int, K_prime: int) -> tuple[int, int]:
    """Numbers of desired and interferer images a design actually sees."""
    return (K, K_prime) if name in RAKE_DESIGNS else (0, 0)


def design_weights(
    name: str,
    array: MicArray,
    source_images: ImageSourceSet,
    interferer_images: ImageSourceSet | None,
    medium: Medium,
    frequencies,
    K: int,
    K_prime: int,
    noise: NoiseModel,
    normalize: bool = True,
) -> BeamWeights:
    """Design ``name`` at every frequency in ``frequencies`` (Hz).

    Raking designs use ``K`` desired and ``K_prime`` interferer images; the
    conventional designs see only the direct paths.  With ``normalize`` the
    weights are rescaled to unit response on the summed desired steering
    vector, which makes outputs of different designs comparable.
    """
    if name not in DESIGNS:
        raise ConfigError(f"unknown design {name!r}, choose from {', '.join(DESIGNS)}")
    k, kq = design_models(name, K, K_prime)
    freqs = np.asarray(frequencies, dtype=float)
    W = np.zeros((len(freqs), array.M), dtype=complex)
    for i, f in enumerate(freqs):
        omega = 2.0 * np.pi * f
        A_s = steering_matrix(array, source_images, omega, medium, k)
        A_q = None if interferer_images is None else steering_matrix(array, interferer_images, omega, medium, kq)
        K_nq = build_covariance(noise.K_n, A_q, noise.sigma_z2)
        w = design(name, A_s, K_nq)
        W[i] = normalize_response(w, A_s) if normalize else w
    return BeamWeights(W, name, k, kq, freqs)


def beampattern(w, array: MicArray, omega: float, medium: Medium, angles, radius: float, center=None) -> np.ndarray:
    """Normalised magnitude response toward points on a circle around the array.

    ``angles`` in radians, measured from the +x axis around ``center``
    (default: the array centroid).
    """
    angles = np.asarray(angles, dtype=float)
    c = array.center if center is None else np.asarray(center, dtype=float)
    points = c + radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    A = green(array.positions, points, 1.0, omega, medium)
    resp = np.abs(np.asarray(w, dtype=complex).conj() @ A)
    peak = resp.max()
    return resp / peak if peak > 0 else resp
