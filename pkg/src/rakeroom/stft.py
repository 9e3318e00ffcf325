"""Frame-based frequency-domain processing: analysis, per-bin weighting, overlap-add.

Analysis uses a periodic Hann window on frames of ``L`` samples, zero-padded
to ``fft_length`` (default ``2L``) before a real FFT; the signal is padded
with ``L/2`` zeros on both ends.  Synthesis is plain (rectangular) overlap-add
of the full ``fft_length`` inverse transforms, divided by the constant
overlap-add sum of the analysis window.  The extra ``L`` samples of each
frame hold the tail of whatever per-bin filter was applied in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .errors import ConfigError, ShapeMismatch


@dataclass(frozen=True)
class StftConfig:
    frame_length: int = 4096
    hop: int | None = None
    fft_length: int | None = None
    window: str = "hann"

    def __post_init__(self):
        L = self.frame_length
        if L < 2 or L % 2:
            raise ConfigError("frame_length must be an even integer >= 2")
        if self.hop is None:
            object.__setattr__(self, "hop", L // 2)
        if self.fft_length is None:
            object.__setattr__(self, "fft_length", 2 * L)
        if not 0 < self.hop <= L:
            raise ConfigError("hop must be in (0, frame_length]")
        if self.fft_length < L:
            raise ConfigError("fft_length must be at least frame_length")
        if self.window != "hann":
            raise ConfigError(f"unsupported window {self.window!r}")
        sums = self.overlap_sums()
        if np.max(np.abs(sums - sums[0])) > 1e-12 * sums[0]:
            raise ConfigError("window and hop do not satisfy constant overlap-add")

    @property
    def num_bins(self) -> int:
        return self.fft_length // 2 + 1

    def analysis_window(self) -> np.ndarray:
        return get_window(self.window, self.frame_length, fftbins=True)

    def overlap_sums(self) -> np.ndarray:
        """Sum of window values landing on each of the ``hop`` sample phases."""
        w = self.analysis_window()
        return np.array([w[j :: self.hop].sum() for j in range(self.hop)])

    @property
    def cola_gain(self) -> float:
        return float(self.overlap_sums()[0])

    def bin_frequencies(self, sampling_rate: float) -> np.ndarray:
        return np.arange(self.num_bins) * sampling_rate / self.fft_length

    def num_frames(self, num_samples: int) -> int:
        return -(-(num_samples + self.frame_length) // self.hop)


@dataclass(frozen=True, eq=False)
class SpectralFrames:
    """STFT coefficients shaped ``(..., T, num_bins)`` plus what is needed to invert them."""

    data: np.ndarray
    num_samples: int
    fft_length: int

    @property
    def num_frames(self) -> int:
        return self.data.shape[-2]

    def bin_frequencies(self, sampling_rate: float) -> np.ndarray:
        return np.arange(self.data.shape[-1]) * sampling_rate / self.fft_length


def analyze(signal, cfg: StftConfig) -> SpectralFrames:
    """STFT of a ``(N,)`` signal or a ``(channels, N)`` stack."""
    x = np.asarray(signal, dtype=float)
    N = x.shape[-1]
    if N == 0:
        raise ValueError("signal is empty")
    L, hop = cfg.frame_length, cfg.hop
    T = cfg.num_frames(N)
    padded = np.zeros(x.shape[:-1] + ((T - 1) * hop + L,))
    padded[..., L // 2 : L // 2 + N] = x
    idx = np.arange(T)[:, None] * hop + np.arange(L)[None, :]
    frames = padded[..., idx] * cfg.analysis_window()
    return SpectralFrames(np.fft.rfft(frames, n=cfg.fft_length, axis=-1), N, cfg.fft_length)


def synthesize(frames: SpectralFrames, cfg: StftConfig) -> np.ndarray:
    """Overlap-add inverse of :func:`analyze`, trimmed to the original length."""
    X = np.asarray(frames.data)
    if X.shape[-1] != cfg.num_bins or frames.fft_length != cfg.fft_length:
        raise ShapeMismatch(f"frames have {X.shape[-1]} bins, config expects {cfg.num_bins}")
    N = frames.num_samples
    T = X.shape[-2]
    if T != cfg.num_frames(N):
        raise ShapeMismatch(f"{T} frames cannot come from a {N}-sample signal")
    L, hop, F = cfg.frame_length, cfg.hop, cfg.fft_length
    blocks = np.fft.irfft(X, n=F, axis=-1)
    out = np.zeros(X.shape[:-2] + ((T - 1) * hop + F,))
    for t in range(T):
        out[..., t * hop : t * hop + F] += blocks[..., t, :]
    return out[..., L // 2 : L // 2 + N] / cfg.cola_gain


def apply_weights(frames: SpectralFrames, weights) -> SpectralFrames:
    """Beamformer output ``w(i)^H y(t, i)`` for every frame ``t`` and bin ``i``.

    ``frames.data`` is ``(M, T, B)``; ``weights`` is a ``(B, M)`` array or an
    object with such a ``.w`` attribute.
    """
    W = np.asarray(getattr(weights, "w", weights))
    Y = np.asarray(frames.data)
    if Y.ndim != 3:
        raise ShapeMismatch("expected multichannel frames of shape (M, T, B)")
    M, _, B = Y.shape
    if W.shape != (B, M):
        raise ShapeMismatch(f"weights have shape {W.shape}, frames need {(B, M)}")
    return SpectralFrames(np.einsum("bm,mtb->tb", W.conj(), Y), frames.num_samples, frames.fft_length)
