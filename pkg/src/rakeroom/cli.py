"""Command-line interface.

    rakeroom simulate SCENARIO --out-dir DIR
    rakeroom design SCENARIO [--design NAME] --out-dir DIR
    rakeroom beampattern SCENARIO [--design NAME] [--freq HZ] --out-dir DIR
    rakeroom experiment {snr-gain,sinr-vs-k,udr-vs-k,sinr-vs-freq} [SCENARIO] [--trials N] [--k K ...]
    rakeroom process SCENARIO [--design NAME] --out-dir DIR

Exit status: 0 on success, 2 for usage and configuration errors, 1 for
failures while running.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .beamforming import DESIGNS, beampattern
from .config import DEFAULT_SEED, SEED_ENV, load_scenario
from .errors import ConfigError, RakeRoomError
from .experiments import (
    Setup,
    run_sinr_vs_freq,
    run_sinr_vs_k,
    run_snr_gain,
    run_udr_vs_k,
    write_csv,
)
from .pipeline import process_audio, render_scenario, scenario_weights
from .wavio import write_wav

log = logging.getLogger("rakeroom")

EXPERIMENTS = ("snr-gain", "sinr-vs-k", "udr-vs-k", "sinr-vs-freq")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rakeroom", description="Acoustic rake receiver simulation toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, scenario_required=True):
        if scenario_required:
            sp.add_argument("scenario", type=Path, help="scenario YAML file")
        else:
            sp.add_argument("scenario", type=Path, nargs="?", help="scenario YAML file (default: built-in circular-array setup)")
        sp.add_argument("--out-dir", type=Path, default=Path("."))
        sp.add_argument("--seed", type=int)
        sp.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    sp = sub.add_parser("simulate", help="render microphone signals to WAV")
    common(sp)

    sp = sub.add_parser("design", help="write per-bin beamformer weights as JSON")
    common(sp)
    sp.add_argument("--design", choices=DESIGNS)
    sp.add_argument("--k", type=int, dest="K")
    sp.add_argument("--k-prime", type=int, dest="K_prime")

    sp = sub.add_parser("beampattern", help="write a beampattern CSV")
    common(sp)
    sp.add_argument("--design", choices=DESIGNS)
    sp.add_argument("--freq", type=float, default=1000.0, help="frequency in Hz")
    sp.add_argument("--radius", type=float, default=5.0, help="evaluation circle radius in metres")
    sp.add_argument("--points", type=int, default=360)
    sp.add_argument("--k", type=int, dest="K")
    sp.add_argument("--k-prime", type=int, dest="K_prime")

    sp = sub.add_parser("experiment", help="run a Monte-Carlo experiment")
    sp.add_argument("name", choices=EXPERIMENTS)
    common(sp, scenario_required=False)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--k", type=int, action="append", dest="K", help="number of images (repeatable)")
    sp.add_argument("--freq", type=float, help="frequency in Hz")
    sp.add_argument("--workers", type=int)

    sp = sub.add_parser("process", help="beamform a scenario end to end")
    common(sp)
    sp.add_argument("--design", choices=DESIGNS)
    sp.add_argument("--k", type=int, dest="K")
    sp.add_argument("--k-prime", type=int, dest="K_prime")
    return p


def _seed(args, fallback=None) -> int:
    if args.seed is not None:
        return args.seed
    if fallback is not None:
        return fallback
    return int(os.environ.get(SEED_ENV, DEFAULT_SEED))


def _scenario(args):
    sc = load_scenario(args.scenario)
    overrides = {"seed": args.seed}
    for key in ("design", "K", "K_prime"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if getattr(args, "K", None) is not None and getattr(args, "K_prime", None) is None:
        overrides["K_prime"] = args.K
    return sc.with_overrides(**overrides)


def cmd_simulate(args) -> None:
    sc = _scenario(args)
    r = render_scenario(sc)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    fs = sc.medium.sampling_rate
    write_wav(args.out_dir / "mics.wav", fs, r.mixture)
    write_wav(args.out_dir / "clean.wav", fs, r.clean)
    log.info("wrote %d-channel microphone signals to %s", sc.array.M, args.out_dir / "mics.wav")


def cmd_design(args) -> None:
    sc = _scenario(args)
    bw = scenario_weights(sc, sc.design)
    doc = {
        "design": bw.design,
        "K": bw.K,
        "K_prime": bw.K_prime,
        "sampling_rate": sc.medium.sampling_rate,
        "frequencies_hz": [float(f) for f in bw.frequencies],
        "weights": [[[float(c.real), float(c.imag)] for c in row] for row in bw.w],
    }
    args.out_dir.mkdir(parents=True, exist_ok=True)
    path = args.out_dir / f"weights_{bw.design}.json"
    path.write_text(json.dumps(doc) + "\n")
    log.info("wrote %s", path)


def cmd_beampattern(args) -> None:
    sc = _scenario(args)
    from .beamforming import design_weights
    from .geometry import enumerate_images

    src = enumerate_images(sc.room, sc.source.position, sc.max_order)
    intf = enumerate_images(sc.room, sc.interferer.position, sc.max_order) if sc.interferer else None
    bw = design_weights(sc.design, sc.array, src, intf, sc.medium, [args.freq], sc.K, sc.K_prime, sc.noise_model())
    angles = np.arange(args.points) * 360.0 / args.points
    resp = beampattern(bw.w[0], sc.array, 2 * np.pi * args.freq, sc.medium, np.deg2rad(angles), args.radius)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    path = args.out_dir / f"beampattern_{sc.design}_{args.freq:g}Hz.csv"
    write_csv(path, ["angle_deg", "magnitude"], zip(angles.tolist(), resp.tolist()))
    log.info("wrote %s", path)


def cmd_experiment(args) -> None:
    if args.scenario is not None:
        sc = _scenario(args)
        setup = Setup.from_scenario(sc)
        exp = sc.experiment
        seed, config_hash = sc.seed, sc.fingerprint()
        trials, freq, K_values, workers = exp.trials, exp.frequency, exp.K_values, exp.workers
        freqs, designs = exp.frequencies, exp.designs
        n_freqs = exp.num_frequencies
    else:
        setup = Setup.default()
        seed, config_hash = _seed(args), None
        trials, freq, K_values, workers = 2000, 1000.0, list(range(11)), 1
        freqs, designs, n_freqs = None, list(DESIGNS), 32
    if args.trials is not None:
        trials = args.trials
    if args.freq is not None:
        freq = args.freq
    if args.workers is not None:
        workers = args.workers
    if args.K:
        K_values = args.K
    if trials < 1:
        raise ConfigError("--trials must be positive")

    if args.name == "snr-gain":
        ks = sorted(set([0, *args.K])) if args.K else [0, 8, 16]
        res = run_snr_gain(setup, ks, freq, trials, seed, workers, config_hash)
    elif args.name == "sinr-vs-k":
        res = run_sinr_vs_k(setup, K_values, freq, designs, trials, seed, workers, config_hash)
    elif args.name == "udr-vs-k":
        res = run_udr_vs_k(setup, K_values, freq, designs, trials, seed, workers, config_hash)
    else:
        from .experiments import default_frequencies

        K = args.K[-1] if args.K else 10
        f = default_frequencies(n_freqs) if freqs is None else freqs
        res = run_sinr_vs_freq(setup, f, K, designs, trials, seed, workers, config_hash)
    paths = res.write(args.out_dir)
    log.info("wrote %s", ", ".join(str(p) for p in paths))


def cmd_process(args) -> None:
    sc = _scenario(args)
    res = process_audio(sc, args.out_dir)
    for name, v in res.output_sinr_db.items():
        log.info("%s: wideband output SINR %.2f dB", name, v)


COMMANDS = {
    "simulate": cmd_simulate,
    "design": cmd_design,
    "beampattern": cmd_beampattern,
    "experiment": cmd_experiment,
    "process": cmd_process,
}


def cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"rakeroom: configuration error: {exc}", file=sys.stderr)
        return 2
    except (RakeRoomError, OSError, ValueError) as exc:
        print(f"rakeroom: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(cli())
