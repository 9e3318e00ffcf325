"""Monte-Carlo experiment runners (SNR gain, SINR/UDR versus K, SINR versus frequency).

Each trial draws its geometry from its own Philox stream, spawned from the
experiment seed by trial index, so results do not depend on the number of
workers and a shorter run is a prefix of a longer one.  Within a trial all
designs are evaluated on the same geometry.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .acoustics import Medium, MicArray, steering_matrix
from .beamforming import (
    DESIGNS,
    RAKE_DESIGNS,
    NoiseModel,
    build_covariance,
    design,
    weights_max_sinr,
    weights_rake_max_sinr,
)
from .errors import ConfigError, IllConditionedConstraints, TooManyConstraints
from .geometry import Room, images_for_count
from .metrics import db, output_sinr, predicted_gain, udr

DEFAULT_ROOM = (4.0, 6.0)
ARRAY_CENTER = (2.0, 1.5)


@dataclass
class Setup:
    """Everything a trial needs besides its random stream."""

    room: Room
    array: MicArray
    medium: Medium = field(default_factory=Medium)
    noise: NoiseModel | None = None
    margin: float = 0.1

    def __post_init__(self):
        if self.noise is None:
            self.noise = NoiseModel.white(self.array.M)

    @classmethod
    def default(cls, **kw) -> Setup:
        """4 x 6 m room, reflectivity 0.9, 12-microphone circular array of 30 cm diameter."""
        room = Room.shoebox(*DEFAULT_ROOM, 0.9)
        return cls(room, MicArray.circular(ARRAY_CENTER, 12, 0.15), **kw)

    @classmethod
    def from_scenario(cls, sc) -> Setup:
        return cls(sc.room, sc.array, sc.medium, sc.noise_model(), sc.experiment.margin)


@dataclass
class ExperimentResult:
    """Per-trial records, a summary table and the provenance of a run."""

    name: str
    columns: list[str]
    summary: list[tuple]
    records: list[dict]
    provenance: dict

    def rows(self, **match) -> list[dict]:
        out = [dict(zip(self.columns, row)) for row in self.summary]
        return [r for r in out if all(r[k] == v for k, v in match.items())]

    def column(self, name: str, **match) -> np.ndarray:
        return np.array([r[name] for r in self.rows(**match)], dtype=float)

    def write(self, out_dir) -> list[Path]:
        """Write ``<name>.csv``, ``<name>_trials.csv`` and ``<name>_provenance.json``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"{self.name}.csv", out / f"{self.name}_trials.csv", out / f"{self.name}_provenance.json"]
        write_csv(paths[0], self.columns, self.summary)
        if self.records:
            cols = list(self.records[0])
            write_csv(paths[1], cols, [tuple(r[c] for c in cols) for r in self.records])
        else:
            write_csv(paths[1], [], [])
        paths[2].write_text(json.dumps(self.provenance, indent=2, sort_keys=True) + "\n")
        return paths


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "nan" if np.isnan(x) else f"{float(x):.10g}"
    return str(x)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def trial_generators(seed: int, trials: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(trials)


def _run_trials(fn, seed: int, trials: int, workers: int = 1) -> list:
    seqs = trial_generators(seed, trials)
    jobs = list(enumerate(seqs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(fn, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        results = [fn(job) for job in jobs]
    results.sort(key=lambda r: r[0])
    return [rec for _, recs in results for rec in recs]


def random_position(rng: np.random.Generator, room: Room, margin: float, array: MicArray) -> np.ndarray:
    """Uniform point at least ``margin`` from every wall and every microphone."""
    while True:
        p = np.array([rng.uniform(margin, room.width - margin), rng.uniform(margin, room.height - margin)])
        if np.min(np.linalg.norm(array.positions - p, axis=1)) >= margin:
            return p


def _quartiles(values) -> tuple[float, float, float]:
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return (np.nan, np.nan, np.nan)
    q25, q50, q75 = np.percentile(v, [25, 50, 75])
    return float(q25), float(q50), float(q75)


def _provenance(name: str, seed: int, trials: int, params: dict, config_hash: str | None) -> dict:
    blob = json.dumps(params, sort_keys=True, default=str)
    return {
        "experiment": name,
        "seed": int(seed),
        "num_trials": int(trials),
        "parameters": json.loads(blob),
        "config_hash": config_hash or hashlib.sha256(blob.encode()).hexdigest()[:16],
        "tool_version": __version__,
    }


# ---------------------------------------------------------------------------
# SNR gain without interferers


def _snr_gain_trial(job, setup: Setup, K_values, frequency: float):
    idx, seq = job
    rng = np.random.Generator(np.random.Philox(seq))
    s = random_position(rng, setup.room, setup.margin, setup.array)
    Kmax = max(K_values)
    images = images_for_count(setup.room, s, Kmax + 1)
    A = steering_matrix(setup.array, images, 2 * np.pi * frequency, setup.medium, Kmax)
    # same received power for every image
    A = A / np.linalg.norm(A, axis=0) * np.linalg.norm(A[:, 0])
    K_nq = build_covariance(setup.noise.K_n, None)
    sx = setup.noise.sigma_x2
    base = output_sinr(weights_max_sinr(A[:, 0], K_nq), A[:, :1], K_nq, sx)
    recs = []
    for K in K_values:
        rake = output_sinr(weights_rake_max_sinr(A[:, : K + 1], K_nq), A[:, : K + 1], K_nq, sx)
        recs.append({"trial": idx, "K": K, "src_x": s[0], "src_y": s[1], "sinr_max_sinr": base, "sinr_rake_max_sinr": rake})
    return idx, recs


def run_snr_gain(setup: Setup, K_values=(0, 8, 16), frequency: float = 1000.0, trials: int = 2000,
                 seed: int = 0, workers: int = 1, config_hash: str | None = None) -> ExperimentResult:
    """White-noise SINR gain of Rake-Max-SINR over Max-SINR with equal-power images.

    The empirical gain is the ratio of mean output SINRs, compared with the
    prediction ``10 log10(K + 1)``.
    """
    K_values = sorted(set(int(k) for k in K_values))
    fn = partial(_snr_gain_trial, setup=setup, K_values=K_values, frequency=frequency)
    records = _run_trials(fn, seed, trials, workers)
    summary = []
    for K in K_values:
        recs = [r for r in records if r["K"] == K]
        rake = np.array([r["sinr_rake_max_sinr"] for r in recs])
        base = np.array([r["sinr_max_sinr"] for r in recs])
        rep = predicted_gain(np.ones(K + 1))
        summary.append((K, rep.beta, rep.predicted_gain_db, float(db(rake.mean() / base.mean())),
                        float(np.median(db(rake / base))), len(recs)))
    params = {"K_values": K_values, "frequency_hz": frequency, "M": setup.array.M}
    return ExperimentResult(
        "snr_gain",
        ["K", "beta", "predicted_gain_db", "empirical_gain_db", "median_trial_gain_db", "num_trials"],
        summary, records, _provenance("snr-gain", seed, trials, params, config_hash),
    )


# ---------------------------------------------------------------------------
# SINR / UDR with one interferer


def _designs_at(setup: Setup, A_full, Q_full, K: int, designs):
    """Weights, SINR and UDR of every design for ``K = K' = K``.

    Conventional designs only see direct paths; their SINR is measured on
    that same model, so it does not depend on K.  UDR is measured for every
    design on the raking model, so the designs can be compared on it.
    """
    noise = setup.noise
    A = A_full[:, : K + 1]
    K_nq = build_covariance(noise.K_n, Q_full[:, : K + 1], noise.sigma_z2)
    K_nq0 = build_covariance(noise.K_n, Q_full[:, :1], noise.sigma_z2)
    out = {}
    for name in designs:
        rake = name in RAKE_DESIGNS
        try:
            w = design(name, A if rake else A[:, :1], K_nq if rake else K_nq0)
        except (TooManyConstraints, IllConditionedConstraints):
            out[name] = (None, np.nan, np.nan)
            continue
        sinr = output_sinr(w, A, K_nq, noise.sigma_x2) if rake else output_sinr(w, A[:, :1], K_nq0, noise.sigma_x2)
        out[name] = (w, sinr, udr(w, A, K_nq, noise.sigma_x2))
    return out


def _sweep_trial(job, setup: Setup, K_values, frequencies, designs):
    idx, seq = job
    rng = np.random.Generator(np.random.Philox(seq))
    s = random_position(rng, setup.room, setup.margin, setup.array)
    q = random_position(rng, setup.room, setup.margin, setup.array)
    Kmax = max(K_values)
    src = images_for_count(setup.room, s, Kmax + 1)
    intf = images_for_count(setup.room, q, Kmax + 1)
    recs = []
    for f in frequencies:
        omega = 2 * np.pi * f
        A_full = steering_matrix(setup.array, src, omega, setup.medium, Kmax)
        Q_full = steering_matrix(setup.array, intf, omega, setup.medium, Kmax)
        for K in K_values:
            for name, (_, sinr, u) in _designs_at(setup, A_full, Q_full, K, designs).items():
                recs.append({
                    "trial": idx, "frequency_hz": float(f), "K": K, "design": name,
                    "src_x": s[0], "src_y": s[1], "int_x": q[0], "int_y": q[1],
                    "sinr_db": float(db(sinr)), "udr_db": float(db(u)),
                })
    return idx, recs


def _sweep(setup, K_values, frequencies, designs, trials, seed, workers):
    for d in designs:
        if d not in DESIGNS:
            raise ConfigError(f"unknown design {d!r}")
    fn = partial(_sweep_trial, setup=setup, K_values=list(K_values), frequencies=list(frequencies), designs=list(designs))
    return _run_trials(fn, seed, trials, workers)


def _versus_k(metric: str, setup, K_values, frequency, designs, trials, seed, workers, config_hash):
    K_values = sorted(set(int(k) for k in K_values))
    records = _sweep(setup, K_values, [frequency], designs, trials, seed, workers)
    summary = []
    for K in K_values:
        for name in designs:
            vals = [r[f"{metric}_db"] for r in records if r["K"] == K and r["design"] == name]
            q25, q50, q75 = _quartiles(vals)
            summary.append((K, name, q50, q25, q75))
    params = {"K_values": K_values, "frequency_hz": frequency, "designs": list(designs), "M": setup.array.M}
    label = f"{metric}-vs-k"
    return ExperimentResult(
        label.replace("-", "_"),
        ["K", "design", f"median_{metric}_db", "q25_db", "q75_db"],
        summary, records, _provenance(label, seed, trials, params, config_hash),
    )


def run_sinr_vs_k(setup: Setup, K_values=range(11), frequency: float = 1000.0, designs=DESIGNS,
                  trials: int = 2000, seed: int = 0, workers: int = 1, config_hash: str | None = None) -> ExperimentResult:
    """Median output SINR per design as a function of the number of images (K = K')."""
    return _versus_k("sinr", setup, K_values, frequency, designs, trials, seed, workers, config_hash)


def run_udr_vs_k(setup: Setup, K_values=range(11), frequency: float = 1000.0, designs=DESIGNS,
                 trials: int = 2000, seed: int = 0, workers: int = 1, config_hash: str | None = None) -> ExperimentResult:
    """Median output UDR per design as a function of the number of images (K = K')."""
    return _versus_k("udr", setup, K_values, frequency, designs, trials, seed, workers, config_hash)


def default_frequencies(n: int = 32, band=(300.0, 3400.0)) -> np.ndarray:
    return np.linspace(band[0], band[1], n)


def run_sinr_vs_freq(setup: Setup, frequencies=None, K: int = 10, designs=DESIGNS, trials: int = 2000,
                     seed: int = 0, workers: int = 1, config_hash: str | None = None) -> ExperimentResult:
    """Output SINR per design and frequency for fixed K = K', averaged in dB."""
    freqs = default_frequencies() if frequencies is None else np.asarray(frequencies, dtype=float)
    records = _sweep(setup, [K], freqs, designs, trials, seed, workers)
    summary = []
    for f in freqs:
        for name in designs:
            vals = np.array([r["sinr_db"] for r in records if r["frequency_hz"] == float(f) and r["design"] == name])
            vals = vals[np.isfinite(vals)]
            summary.append((float(f), name, float(vals.mean()) if vals.size else np.nan))
    params = {"K": K, "frequencies_hz": [float(f) for f in freqs], "designs": list(designs), "M": setup.array.M}
    return ExperimentResult(
        "sinr_vs_freq", ["frequency_hz", "design", "mean_sinr_db"],
        summary, records, _provenance("sinr-vs-freq", seed, trials, params, config_hash),
    )
