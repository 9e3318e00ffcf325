"""Steering vectors, sampled room impulse responses and microphone rendering."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .errors import ConfigError, EmptySignal, NotEnoughImages, SourceOnMicrophone
from .geometry import ImageSource, ImageSourceSet

SPEED_OF_SOUND = 343.0
MIN_DISTANCE = 1e-6
DEFAULT_TRUNC_HALFWIDTH = 81


@dataclass(frozen=True)
class Medium:
    speed_of_sound: float = SPEED_OF_SOUND
    sampling_rate: float = 8000.0

    def __post_init__(self):
        if not self.speed_of_sound > 0 or not self.sampling_rate > 0:
            raise ConfigError("speed of sound and sampling rate must be positive")

    def wavenumber(self, omega: float) -> float:
        return omega / self.speed_of_sound


@dataclass(frozen=True, eq=False)
class MicArray:
    """Microphone positions as an ``(M, 2)`` array."""

    positions: np.ndarray
    layout: str = "custom"

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if R.ndim != 2 or R.shape[1] != 2 or R.shape[0] < 1:
            raise ConfigError("microphone positions must have shape (M, 2)")
        if len(R) > 1:
            d = np.linalg.norm(R[:, None, :] - R[None, :, :], axis=-1)
            if np.min(d[np.triu_indices(len(R), 1)]) <= 0:
                raise ConfigError("microphone positions must be pairwise distinct")
        object.__setattr__(self, "positions", R)

    @classmethod
    def linear(cls, center, M: int, spacing: float, angle: float = 0.0) -> MicArray:
        """``M`` microphones on a line through ``center`` at ``angle`` radians."""
        u = np.array([np.cos(angle), np.sin(angle)])
        offsets = spacing * (np.arange(M) - (M - 1) / 2.0)
        return cls(np.asarray(center, dtype=float) + offsets[:, None] * u, "linear")

    @classmethod
    def circular(cls, center, M: int, radius: float, phase: float = 0.0) -> MicArray:
        phi = phase + 2.0 * np.pi * np.arange(M) / M
        R = np.asarray(center, dtype=float) + radius * np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return cls(R, "circular")

    @property
    def M(self) -> int:
        return len(self.positions)

    @property
    def center(self) -> np.ndarray:
        return self.positions.mean(axis=0)


@dataclass(frozen=True, eq=False)
class SampledRIR:
    """Impulse response taps; ``taps[j]`` is the response at sample ``j + offset``."""

    taps: np.ndarray
    offset: int

    def at(self, n) -> np.ndarray:
        n = np.asarray(n)
        idx = n - self.offset
        out = np.zeros(n.shape)
        ok = (idx >= 0) & (idx < len(self.taps))
        out[ok] = self.taps[idx[ok]]
        return out


def _distances(mics: np.ndarray, points: np.ndarray) -> np.ndarray:
    d = np.linalg.norm(mics[:, None, :] - points[None, :, :], axis=-1)
    if np.min(d) < MIN_DISTANCE:
        raise SourceOnMicrophone("a source coincides with a microphone")
    return d


def green(mics, points, attenuations, omega: float, medium: Medium) -> np.ndarray:
    """``(M, N)`` matrix of scaled free-field Green's functions."""
    mics = np.atleast_2d(np.asarray(mics, dtype=float))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    d = _distances(mics, points)
    kappa = medium.wavenumber(omega)
    att = np.broadcast_to(np.asarray(attenuations, dtype=float), (points.shape[0],))
    return att / (4.0 * np.pi * d) * np.exp(-1j * kappa * d)


def steering_vector(array: MicArray, src, omega: float, medium: Medium) -> np.ndarray:
    """Response of every microphone to a point source at angular frequency ``omega``.

    ``src`` is an :class:`ImageSource` (its attenuation is used) or a bare
    position (attenuation 1).
    """
    if omega < 0:
        raise ValueError("omega must be non-negative")
    if isinstance(src, ImageSource):
        pos, att = src.position, src.attenuation
    else:
        pos, att = np.asarray(src, dtype=float), 1.0
    return green(array.positions, pos[None, :], att, omega, medium)[:, 0]


def steering_matrix(array: MicArray, image_set: ImageSourceSet, omega: float, medium: Medium, K: int) -> np.ndarray:
    """``(M, K + 1)`` steering vectors of the first ``K + 1`` entries of ``image_set``."""
    if K < 0:
        raise ValueError("K must be non-negative")
    if K + 1 > len(image_set):
        raise NotEnoughImages(f"need {K + 1} sources, the image set holds {len(image_set)}")
    entries = image_set.entries[: K + 1]
    points = np.array([e.position for e in entries])
    att = np.array([e.attenuation for e in entries])
    if omega < 0:
        raise ValueError("omega must be non-negative")
    return green(array.positions, points, att, omega, medium)


def tapered_sinc(u: np.ndarray, halfwidth: int) -> np.ndarray:
    """``sinc(u)`` multiplied by a Hann taper that reaches zero at ``|u| = halfwidth``."""
    u = np.asarray(u, dtype=float)
    taper = np.where(np.abs(u) < halfwidth, 0.5 * (1.0 + np.cos(np.pi * u / halfwidth)), 0.0)
    return np.sinc(u) * taper


def synthesize_rir(mic, image_set: ImageSourceSet, medium: Medium, trunc_halfwidth: int = DEFAULT_TRUNC_HALFWIDTH) -> SampledRIR:
    """Band-limited impulse response from every entry of ``image_set`` to ``mic``.

    Each image contributes a sinc centred on its fractional propagation
    delay, scaled by ``attenuation / (4 pi d)`` and truncated to
    ``trunc_halfwidth`` samples on either side.
    """
    if trunc_halfwidth < 16:
        raise ValueError("trunc_halfwidth must be at least 16 samples")
    H = int(trunc_halfwidth)
    mic = np.asarray(mic, dtype=float).reshape(1, 2)
    d = _distances(mic, image_set.positions)[0]
    gains = image_set.attenuations / (4.0 * np.pi * d)
    delays = medium.sampling_rate * d / medium.speed_of_sound

    offset = -H
    length = int(np.ceil(delays.max())) + 2 * H + 1
    taps = np.zeros(length)
    for g, tau in zip(gains, delays):
        lo = int(np.ceil(tau - H))
        hi = int(np.floor(tau + H))
        n = np.arange(lo, hi + 1)
        taps[n - offset] += g * tapered_sinc(n - tau, H)
    return SampledRIR(taps, offset)


def direct_gain(position, point) -> float:
    return 1.0 / (4.0 * np.pi * np.linalg.norm(np.asarray(position) - np.asarray(point)))


def noise_std_for_snr(source_position, array: MicArray, signal, snr_db: float) -> float:
    """White-noise level giving the requested direct-path SNR at the array centre."""
    x = np.asarray(signal, dtype=float)
    if x.size == 0:
        raise EmptySignal("signal is empty")
    p_direct = direct_gain(source_position, array.center) ** 2 * np.mean(x**2)
    return float(np.sqrt(p_direct / 10.0 ** (snr_db / 10.0)))


def noise_generators(seed: int, M: int) -> list[np.random.Generator]:
    """One independent Philox stream per microphone, derived from ``seed``."""
    return [np.random.Generator(np.random.Philox(ss)) for ss in np.random.SeedSequence(seed).spawn(M)]


def render_mic_signals(
    sources: Sequence[tuple[ImageSourceSet, np.ndarray]],
    array: MicArray,
    medium: Medium,
    noise_std=0.0,
    seed: int = 0,
    trunc_halfwidth: int = DEFAULT_TRUNC_HALFWIDTH,
    length: int | None = None,
) -> np.ndarray:
    """Microphone signals as an ``(M, N)`` array, sample 0 at emission time 0.

    Each source signal is convolved with its impulse response to every
    microphone; white Gaussian noise of standard deviation ``noise_std``
    (scalar or per microphone) is added once at the end.
    """
    if not sources:
        raise EmptySignal("no sources to render")
    rendered = []
    for image_set, x in sources:
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            raise EmptySignal("source signal is empty")
        chans = []
        for r in array.positions:
            rir = synthesize_rir(r, image_set, medium, trunc_halfwidth)
            y = sps.fftconvolve(x, rir.taps)
            # drop the pre-ringing that falls before time 0
            chans.append(y[-rir.offset :] if rir.offset < 0 else np.concatenate([np.zeros(rir.offset), y]))
        rendered.append(chans)

    N = length or max(len(c) for chans in rendered for c in chans)
    out = np.zeros((array.M, N))
    for chans in rendered:
        for m, c in enumerate(chans):
            n = min(N, len(c))
            out[m, :n] += c[:n]

    std = np.broadcast_to(np.asarray(noise_std, dtype=float), (array.M,))
    if np.any(std > 0):
        for m, g in enumerate(noise_generators(seed, array.M)):
            out[m] += std[m] * g.standard_normal(N)
    return out


def high_pass(x, sampling_rate: float, cutoff: float = 300.0, order: int = 4) -> np.ndarray:
    """Butterworth high-pass along the last axis."""
    sos = sps.butter(order, cutoff, btype="highpass", fs=sampling_rate, output="sos")
    return sps.sosfilt(sos, np.asarray(x, dtype=float), axis=-1)
