"""Random scenarios shared by the beamforming, metrics and acceptance tests."""

import numpy as np

from rakeroom.acoustics import Medium, MicArray, steering_matrix
from rakeroom.beamforming import NoiseModel, build_covariance
from rakeroom.geometry import Room, images_for_count

ROOM = Room.shoebox(4.0, 6.0, 0.9)
CIRC12 = MicArray.circular((2.0, 1.5), 12, 0.15)
MEDIUM = Medium()
NOISE = NoiseModel.white(12)


def random_point(rng, margin=0.1):
    while True:
        p = np.array([rng.uniform(margin, 4.0 - margin), rng.uniform(margin, 6.0 - margin)])
        if np.min(np.linalg.norm(CIRC12.positions - p, axis=1)) >= margin:
            return p


def random_scenario(rng, K, K_prime=None, freq=1000.0, array=CIRC12):
    """Steering matrix of a random desired source and ``K_nq`` of a random interferer."""
    K_prime = K if K_prime is None else K_prime
    s, q = random_point(rng), random_point(rng)
    omega = 2 * np.pi * freq
    A = steering_matrix(array, images_for_count(ROOM, s, K + 1), omega, MEDIUM, K)
    Q = steering_matrix(array, images_for_count(ROOM, q, K_prime + 1), omega, MEDIUM, K_prime)
    K_nq = build_covariance(NoiseModel.white(array.M).K_n, Q, 1.0)
    return A, K_nq


def random_unit_weights(rng, M, n):
    W = rng.standard_normal((M, n)) + 1j * rng.standard_normal((M, n))
    return W / np.linalg.norm(W, axis=0)


def sinr_many(W, a, K_nq):
    """Rake-SINR objective ``|w^H a|^2 / w^H K w`` for every column of ``W``."""
    num = np.abs(W.conj().T @ a) ** 2
    den = np.real(np.einsum("ij,ij->j", W.conj(), K_nq @ W))
    return num / den


def cosine(u, v):
    return abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
