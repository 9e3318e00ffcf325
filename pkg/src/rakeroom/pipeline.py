"""End-to-end processing: render a scenario, beamform it in the STFT domain, write results."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acoustics import high_pass, noise_std_for_snr, render_mic_signals
from .beamforming import BeamWeights, design_weights
from .config import Scenario
from .experiments import write_csv
from .geometry import enumerate_images
from .metrics import db, spectrogram
from .stft import analyze, apply_weights, synthesize
from .wavio import read_wav, write_wav

BASELINE = "max-sinr"


@dataclass
class Rendered:
    """Microphone signals split into their additive parts, each ``(M, N)``."""

    desired: np.ndarray
    interferer: np.ndarray
    noise: np.ndarray
    clean: np.ndarray

    @property
    def mixture(self) -> np.ndarray:
        return self.desired + self.interferer + self.noise


@dataclass
class ProcessResult:
    outputs: dict[str, np.ndarray]
    output_sinr_db: dict[str, float]
    weights: dict[str, BeamWeights]
    rendered: Rendered
    paths: dict[str, Path] = field(default_factory=dict)


def _synthetic_signal(seed: int, stream: int, n: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(0x5EED, stream))
    return np.random.Generator(np.random.Philox(ss)).standard_normal(n)


def load_source_signal(sc: Scenario, spec, stream: int) -> np.ndarray:
    """Mono source signal scaled to unit RMS.

    Reads the WAV named in the scenario, or draws seeded white noise of the
    requested duration when no file is given.
    """
    fs = sc.medium.sampling_rate
    if spec.wav:
        _, x = read_wav(sc.resolve(spec.wav), expected_rate=fs)
        if x.ndim == 2:
            x = x[0]
    else:
        x = _synthetic_signal(sc.seed, stream, int(round(spec.duration * fs)))
    rms = np.sqrt(np.mean(x**2))
    return x / rms if rms > 0 else x


def render_scenario(sc: Scenario, desired=None, interferer=None) -> Rendered:
    """Render desired, interferer and noise parts separately (noise seeded by ``sc.seed``)."""
    x = load_source_signal(sc, sc.source, 0) if desired is None else np.asarray(desired, dtype=float)
    src = enumerate_images(sc.room, sc.source.position, sc.max_order)
    parts = [(src, x)]
    z = None
    if sc.interferer is not None:
        z = load_source_signal(sc, sc.interferer, 1) if interferer is None else np.asarray(interferer, dtype=float)
        parts.append((enumerate_images(sc.room, sc.interferer.position, sc.max_order), z))

    med, arr, H = sc.medium, sc.array, sc.trunc_halfwidth
    yd = render_mic_signals([parts[0]], arr, med, 0.0, sc.seed, H)
    N = yd.shape[1]
    if z is not None:
        yi = render_mic_signals([parts[1]], arr, med, 0.0, sc.seed, H)
        N = max(N, yi.shape[1])
        yi = np.pad(yi, ((0, 0), (0, N - yi.shape[1])))
        yd = np.pad(yd, ((0, 0), (0, N - yd.shape[1])))
    else:
        yi = np.zeros_like(yd)

    std = noise_std_for_snr(sc.source.position, arr, x, sc.noise.snr_db) if np.isfinite(sc.noise.snr_db) else 0.0
    yn = render_mic_signals([(src, np.zeros(1))], arr, med, std, sc.seed, H, length=N)

    clean = np.pad(x, (0, max(0, N - len(x))))[:N]
    hp = sc.noise.high_pass_hz
    if hp:
        fs = med.sampling_rate
        yd, yi, yn, clean = (high_pass(s, fs, hp) for s in (yd, yi, yn, clean))
    return Rendered(yd, yi, yn, clean)


def scenario_weights(sc: Scenario, name: str) -> BeamWeights:
    """Per-bin weights of design ``name`` over every positive STFT bin."""
    src = enumerate_images(sc.room, sc.source.position, sc.max_order)
    intf = None
    if sc.interferer is not None:
        intf = enumerate_images(sc.room, sc.interferer.position, sc.max_order)
    freqs = sc.stft.bin_frequencies(sc.medium.sampling_rate)
    return design_weights(name, sc.array, src, intf, sc.medium, freqs, sc.K, sc.K_prime, sc.noise_model())


def beamform(signals: np.ndarray, weights: BeamWeights, sc: Scenario) -> np.ndarray:
    return synthesize(apply_weights(analyze(signals, sc.stft), weights), sc.stft)


def output_sinr_db(rendered: Rendered, weights: BeamWeights, sc: Scenario) -> float:
    """Wideband output SINR measured on the separately beamformed signal parts."""
    sig = beamform(rendered.desired, weights, sc)
    bad = beamform(rendered.interferer + rendered.noise, weights, sc)
    return float(db(np.sum(sig**2) / np.sum(bad**2)))


def _write_spectrogram(path: Path, x: np.ndarray, sc: Scenario) -> None:
    S = spectrogram(x, sc.stft)
    freqs = sc.stft.bin_frequencies(sc.medium.sampling_rate)
    times = np.arange(S.shape[0]) * sc.stft.hop / sc.medium.sampling_rate
    cols = ["time_s"] + [f"{f:.4f}Hz" for f in freqs]
    write_csv(path, cols, [(t, *row) for t, row in zip(times, S)])


def process_audio(sc: Scenario, out_dir=None, designs=None) -> ProcessResult:
    """Render ``sc``, beamform with its design (and the Max-SINR baseline), report SINRs.

    With ``out_dir`` writes ``output.wav`` (the scenario's design),
    ``output_<design>.wav`` for every design, ``degraded.wav`` (microphone
    0), spectrogram CSVs of the clean, degraded and processed signals, and
    ``summary.json``.
    """
    names = list(dict.fromkeys(designs or [sc.design, BASELINE]))
    rendered = render_scenario(sc)
    mix = rendered.mixture
    weights, outputs, sinrs = {}, {}, {}
    for name in names:
        w = scenario_weights(sc, name)
        weights[name] = w
        outputs[name] = beamform(mix, w, sc)
        sinrs[name] = output_sinr_db(rendered, w, sc)
    result = ProcessResult(outputs, sinrs, weights, rendered)
    if out_dir is None:
        return result

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fs = sc.medium.sampling_rate
    paths = {"output": out / "output.wav", "degraded": out / "degraded.wav"}
    write_wav(paths["output"], fs, outputs[names[0]])
    write_wav(paths["degraded"], fs, mix[0])
    for name in names:
        paths[f"output_{name}"] = out / f"output_{name}.wav"
        write_wav(paths[f"output_{name}"], fs, outputs[name])
    for label, x in (("clean", rendered.clean), ("degraded", mix[0]), ("processed", outputs[names[0]])):
        paths[f"spectrogram_{label}"] = out / f"spectrogram_{label}.csv"
        _write_spectrogram(paths[f"spectrogram_{label}"], x, sc)
    paths["summary"] = out / "summary.json"
    summary = {
        "design": names[0],
        "K": sc.K,
        "K_prime": sc.K_prime,
        "seed": sc.seed,
        "config_hash": sc.fingerprint(),
        "output_sinr_db": {k: round(v, 6) for k, v in sinrs.items()},
        "input_sinr_db": round(float(db(np.sum(rendered.desired[0] ** 2)
                                        / np.sum((rendered.interferer[0] + rendered.noise[0]) ** 2))), 6),
    }
    paths["summary"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    result.paths = paths
    return result
