"""WAV input/output for 16-bit PCM and 32-bit float files."""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

from .errors import SampleRateMismatch, WavFormatError

FORMATS = ("pcm16", "float32")


def read_wav(path, expected_rate: float | None = None) -> tuple[int, np.ndarray]:
    """Return ``(rate, data)`` with data as float64 in ``[-1, 1]``.

    Mono files give shape ``(N,)``; multichannel files give ``(channels, N)``.
    """
    try:
        rate, data = wavfile.read(path)
    except (ValueError, OSError) as exc:
        raise WavFormatError(f"{path}: {exc}") from exc
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        x = data.astype(np.float64)
    else:
        raise WavFormatError(f"{path}: unsupported sample type {data.dtype}, expected 16-bit PCM or 32-bit float")
    if x.ndim == 2:
        x = x.T
    if expected_rate is not None and rate != expected_rate:
        raise SampleRateMismatch(f"{path}: sampling rate {rate} Hz, expected {expected_rate:g} Hz")
    if x.shape[-1] == 0:
        raise WavFormatError(f"{path}: no samples")
    return int(rate), x


def write_wav(path, rate: float, data, fmt: str = "float32") -> None:
    """Write mono ``(N,)`` or multichannel ``(channels, N)`` data."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 2:
        x = x.T
    if fmt == "float32":
        out = x.astype(np.float32)
    elif fmt == "pcm16":
        out = np.round(np.clip(x, -1.0, 32767 / 32768) * 32768.0).astype(np.int16)
    else:
        raise WavFormatError(f"unknown WAV format {fmt!r}, choose from {FORMATS}")
    wavfile.write(path, int(rate), out)
