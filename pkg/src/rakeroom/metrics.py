"""Output SINR and UDR, raking-gain predictions, and their Monte-Carlo checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acoustics import Medium, MicArray, green
from .errors import ZeroDenominator
from .stft import StftConfig, analyze

SPECTROGRAM_FLOOR_DB = -120.0
SPEECH_BAND = (300.0, 3400.0)


@dataclass
class GainReport:
    beta: float
    predicted_gain_db: float
    empirical_gain_db: float | None = None
    num_trials: int = 0


def _as_matrix(A_s) -> np.ndarray:
    return np.atleast_2d(np.asarray(A_s, dtype=complex).T).T


def _noise_power(w, K_nq) -> float:
    den = float(np.real(np.vdot(w, K_nq @ w)))
    if not den > 0:
        raise ZeroDenominator("noise-plus-interference output power is zero")
    return den


def output_sinr(w, A_s, K_nq, sigma_x2: float = 1.0) -> float:
    """Linear SINR with the desired signal arriving along every column of ``A_s``."""
    w = np.asarray(w, dtype=complex)
    g = np.vdot(w, _as_matrix(A_s).sum(axis=1))
    return sigma_x2 * abs(g) ** 2 / _noise_power(w, K_nq)


def udr(w, A_s, K_nq, sigma_x2: float = 1.0) -> float:
    """Useful-to-detrimental ratio: image output powers summed, over noise and interference."""
    w = np.asarray(w, dtype=complex)
    g = _as_matrix(A_s).conj().T @ w
    return sigma_x2 * float(np.sum(np.abs(g) ** 2)) / _noise_power(w, K_nq)


def db(x):
    return 10.0 * np.log10(x)


def predicted_gain(alphas) -> GainReport:
    """Expected SINR gain ``1 + beta`` from raking images of strengths ``alphas``.

    ``alphas[0]`` is the direct path.
    """
    a = np.asarray(alphas, dtype=float)
    if not a[0] > 0:
        raise ValueError("direct-path strength must be positive")
    beta = float(np.sum((a[1:] / a[0]) ** 2))
    return GainReport(beta, float(db(1.0 + beta)))


def empirical_norm_gain(
    array: MicArray,
    medium: Medium,
    omega: float,
    K: int,
    num_trials: int,
    seed: int,
    radius_range: tuple[float, float] = (5.0, 5.2),
) -> float:
    """Monte-Carlo estimate of ``E||A_s 1||^2 / E||a(s_0)||^2``.

    The ``K + 1`` sources are placed independently at uniform angles and
    uniform distances in ``radius_range`` around the array centre, each
    scaled so that it arrives with the same power.  Tends to ``K + 1`` as
    the frequency grows; the excess at low frequency comes from phases that
    have not yet decorrelated over the spread of distances, so a narrower
    ``radius_range`` slows the convergence.
    """
    if num_trials < 100:
        raise ValueError("num_trials must be at least 100")
    rng = np.random.Generator(np.random.Philox(seed))
    a, b = radius_range
    theta = rng.uniform(0.0, 2.0 * np.pi, (num_trials, K + 1))
    r = rng.uniform(a, b, (num_trials, K + 1))
    num = den = 0.0
    for t in range(num_trials):
        pts = array.center + r[t, :, None] * np.stack([np.cos(theta[t]), np.sin(theta[t])], axis=1)
        A = green(array.positions, pts, 4.0 * np.pi * r[t], omega, medium)
        num += float(np.sum(np.abs(A.sum(axis=1)) ** 2))
        den += float(np.sum(np.abs(A[:, 0]) ** 2))
    return num / den


def bessel_j0(z):
    """Bessel function of the first kind, order zero.

    Power series for ``|z| < 8``, Hankel asymptotic expansion beyond
    (truncated at its smallest term); absolute error below 1e-9.
    """
    z = np.abs(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    small = z < 8.0

    zs = z[small]
    q = -((zs / 2.0) ** 2)
    term = np.ones_like(zs)
    total = np.ones_like(zs)
    for k in range(1, 60):
        term = term * q / (k * k)
        total += term
    out[small] = total

    zl = z[~small]
    if zl.size:
        coef = [1.0]
        for k in range(1, 40):
            coef.append(coef[-1] * -((2 * k - 1) ** 2) / (k * 8.0))
        P = np.zeros_like(zl)
        Q = np.zeros_like(zl)
        prev = np.full_like(zl, np.inf)
        active = np.ones(zl.shape, dtype=bool)
        for k, c in enumerate(coef):
            t = c / zl**k
            active &= np.abs(t) <= prev
            sign = -1.0 if (k // 2) % 2 else 1.0
            if k % 2 == 0:
                P += np.where(active, sign * t, 0.0)
            else:
                Q += np.where(active, sign * t, 0.0)
            prev = np.where(active, np.abs(t), prev)
        chi = zl - np.pi / 4.0
        out[~small] = np.sqrt(2.0 / (np.pi * zl)) * (P * np.cos(chi) - Q * np.sin(chi))
    return out if out.ndim else float(out)


def pairwise_coherence_expectation(m: float, d: float, kappa: float, delta: float) -> float:
    """Expected cross term between two independent random far-field sources.

    Mean of ``exp(i kappa m d (sin th_l - sin th_k)) exp(i kappa (r_l - r_k))``
    with angles uniform on the circle and distances uniform over an interval
    of length ``delta``.
    """
    if not delta > 0 or kappa < 0:
        raise ValueError("need delta > 0 and kappa >= 0")
    x = delta * kappa
    # 2 (1 - cos x) / x^2, via the half-angle form to avoid cancellation
    radial = 1.0 if x == 0 else (np.sin(x / 2.0) / (x / 2.0)) ** 2
    return float(bessel_j0(m * d * kappa) ** 2 * radial)


def spectrogram(signal, cfg: StftConfig) -> np.ndarray:
    """Magnitude STFT in dB, ``(T, num_bins)``, floored at -120 dB."""
    mag = np.abs(analyze(signal, cfg).data)
    floor = 10.0 ** (SPECTROGRAM_FLOOR_DB / 20.0)
    return 20.0 * np.log10(np.maximum(mag, floor))


def band_mask(frequencies, band=SPEECH_BAND) -> np.ndarray:
    f = np.asarray(frequencies)
    return (f >= band[0]) & (f <= band[1])


def wideband_median_db(frequencies, values_db, band=SPEECH_BAND) -> float:
    """Median of per-bin dB values over the bins inside ``band``."""
    return float(np.median(np.asarray(values_db)[band_mask(frequencies, band)]))
