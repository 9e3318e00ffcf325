"""Scenario files: a versioned YAML tree describing one simulated experiment.

Minimal example::

    schema_version: 1
    room: {width: 4.0, height: 6.0, reflectivity: 0.9, max_order: 10}
    array: {layout: linear, center: [2.0, 1.5], M: 8, spacing: 0.08}
    source: {position: [1.0, 4.5], wav: singer.wav}
    interferer: {position: [1.5, 3.0], wav: speech.wav}
    design: {name: rake-max-sinr, K: 4, K_prime: 4}
    seed: 1

Every section except ``room``, ``array`` and ``source`` is optional; the
defaults are listed in the dataclasses below.  Relative WAV paths are
resolved against the directory of the scenario file.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .acoustics import Medium, MicArray
from .beamforming import DESIGNS, NoiseModel
from .errors import ConfigError
from .geometry import Room
from .stft import StftConfig

SCHEMA_VERSION = 1
SEED_ENV = "RAKEROOM_SEED"
DEFAULT_SEED = 20140101


@dataclass
class SourceSpec:
    position: tuple[float, float]
    wav: str | None = None
    duration: float = 10.0  # seconds of synthetic signal when no WAV is given


@dataclass
class NoiseSpec:
    variance: float = 1e-3
    sigma_x2: float = 1.0
    sigma_z2: float = 1.0
    snr_db: float = 20.0
    high_pass_hz: float | None = 300.0


@dataclass
class ExperimentSpec:
    trials: int = 2000
    frequency: float = 1000.0
    K_values: list[int] = field(default_factory=lambda: list(range(11)))
    frequencies: list[float] | None = None
    num_frequencies: int = 32
    margin: float = 0.1
    designs: list[str] = field(default_factory=lambda: list(DESIGNS))
    workers: int = 1


@dataclass
class Scenario:
    room: Room
    array: MicArray
    medium: Medium
    source: SourceSpec
    interferer: SourceSpec | None = None
    design: str = "rake-max-sinr"
    K: int = 4
    K_prime: int = 4
    max_order: int = 10
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    stft: StftConfig = field(default_factory=StftConfig)
    experiment: ExperimentSpec = field(default_factory=ExperimentSpec)
    seed: int = DEFAULT_SEED
    trunc_halfwidth: int = 81
    raw: dict = field(default_factory=dict, repr=False)
    base_dir: Path = field(default_factory=Path.cwd, repr=False)

    def noise_model(self) -> NoiseModel:
        return NoiseModel.white(self.array.M, self.noise.variance, self.noise.sigma_x2, self.noise.sigma_z2)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def fingerprint(self) -> str:
        """Stable hash of the configuration that produced a result."""
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_overrides(self, **kw) -> Scenario:
        """Copy with CLI-style overrides; re-validates the result."""
        sc = self
        exp = kw.pop("experiment", {})
        if exp:
            sc = replace(sc, experiment=replace(sc.experiment, **exp))
        sc = replace(sc, **{k: v for k, v in kw.items() if v is not None})
        raw = dict(sc.raw)
        raw["_overrides"] = {"seed": sc.seed, "design": sc.design, "K": sc.K, "K_prime": sc.K_prime,
                             "experiment": asdict(sc.experiment)}
        sc = replace(sc, raw=raw)
        validate(sc)
        return sc


def _get(tree: dict, key: str, where: str, default=..., kind=None):
    if key not in tree:
        if default is ...:
            raise ConfigError(f"{where}: missing required key '{key}'")
        return default
    value = tree[key]
    if kind is not None and value is not None:
        try:
            value = kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}.{key}: {exc}") from exc
    return value


def _point(value, where: str) -> tuple[float, float]:
    try:
        p = tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: expected [x, y], got {value!r}") from exc
    if len(p) != 2:
        raise ConfigError(f"{where}: expected [x, y], got {value!r}")
    return p


def _section(tree: dict, key: str, required: bool = False) -> dict | None:
    node = tree.get(key)
    if node is None:
        if required:
            raise ConfigError(f"missing required section '{key}'")
        return None
    if not isinstance(node, dict):
        raise ConfigError(f"section '{key}' must be a mapping")
    return node


def _array(node: dict) -> MicArray:
    layout = node.get("layout", "linear")
    if layout == "custom":
        return MicArray(np.asarray(_get(node, "positions", "array"), dtype=float), "custom")
    center = _point(_get(node, "center", "array"), "array.center")
    M = _get(node, "M", "array", kind=int)
    if M < 1:
        raise ConfigError("array.M must be at least 1")
    if layout == "linear":
        return MicArray.linear(center, M, _get(node, "spacing", "array", 0.08, float), _get(node, "angle", "array", 0.0, float))
    if layout == "circular":
        if "diameter" in node:
            radius = float(node["diameter"]) / 2.0
        else:
            radius = _get(node, "radius", "array", 0.15, float)
        return MicArray.circular(center, M, radius, _get(node, "phase", "array", 0.0, float))
    raise ConfigError(f"array.layout: unknown layout {layout!r} (linear, circular, custom)")


def _source(node: dict, where: str) -> SourceSpec:
    return SourceSpec(
        _point(_get(node, "position", where), f"{where}.position"),
        node.get("wav"),
        _get(node, "duration", where, 10.0, float),
    )


def scenario_from_dict(tree: dict, base_dir=None) -> Scenario:
    if not isinstance(tree, dict):
        raise ConfigError("scenario must be a mapping")
    version = tree.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version {version!r} is not supported (expected {SCHEMA_VERSION})")

    med_node = _section(tree, "medium") or {}
    medium = Medium(_get(med_node, "speed_of_sound", "medium", 343.0, float),
                    _get(med_node, "sampling_rate", "medium", 8000.0, float))

    room_node = _section(tree, "room", required=True)
    room = Room.shoebox(
        _get(room_node, "width", "room", kind=float),
        _get(room_node, "height", "room", kind=float),
        room_node.get("reflectivity", 0.9),
    )

    array = _array(_section(tree, "array", required=True))
    source = _source(_section(tree, "source", required=True), "source")
    int_node = _section(tree, "interferer")
    interferer = _source(int_node, "interferer") if int_node else None

    design_node = _section(tree, "design") or {}
    noise_node = _section(tree, "noise") or {}
    stft_node = _section(tree, "stft") or {}
    exp_node = _section(tree, "experiment") or {}

    noise = NoiseSpec(**{k: noise_node[k] for k in noise_node if k in NoiseSpec.__dataclass_fields__})
    unknown = set(noise_node) - set(NoiseSpec.__dataclass_fields__)
    unknown |= set(exp_node) - set(ExperimentSpec.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    try:
        stft = StftConfig(**stft_node)
    except TypeError as exc:
        raise ConfigError(f"stft: {exc}") from exc
    experiment = ExperimentSpec(**exp_node)

    seed = tree.get("seed")
    if seed is None:
        seed = int(os.environ.get(SEED_ENV, DEFAULT_SEED))

    K = _get(design_node, "K", "design", 4, int)
    sc = Scenario(
        room=room,
        array=array,
        medium=medium,
        source=source,
        interferer=interferer,
        design=design_node.get("name", "rake-max-sinr"),
        K=K,
        K_prime=_get(design_node, "K_prime", "design", K, int),
        max_order=_get(room_node, "max_order", "room", 10, int),
        noise=noise,
        stft=stft,
        experiment=experiment,
        seed=int(seed),
        trunc_halfwidth=_get(tree, "trunc_halfwidth", "scenario", 81, int),
        raw=tree,
        base_dir=Path(base_dir) if base_dir else Path.cwd(),
    )
    validate(sc)
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        tree = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return scenario_from_dict(tree, path.parent)


def _num_images(order: int) -> int:
    return 2 * order * order + 2 * order + 1


def validate(sc: Scenario) -> None:
    """Reject inconsistent scenarios with a message naming the offending value."""
    room = sc.room
    for name, spec in (("source", sc.source), ("interferer", sc.interferer)):
        if spec is not None and not room.contains(spec.position):
            raise ConfigError(
                f"{name} position {spec.position} is outside the {room.width:g} x {room.height:g} m room"
            )
    for m, r in enumerate(sc.array.positions):
        if not room.contains(r):
            raise ConfigError(f"microphone {m} at ({r[0]:g}, {r[1]:g}) is outside the room")
    if sc.design not in DESIGNS:
        raise ConfigError(f"design {sc.design!r} is unknown; choose from {', '.join(DESIGNS)}")
    if sc.K < 0 or sc.K_prime < 0:
        raise ConfigError("K and K_prime must be non-negative")
    if sc.max_order < 0:
        raise ConfigError("room.max_order must be non-negative")
    available = _num_images(sc.max_order)
    if sc.K + 1 > available:
        raise ConfigError(f"K + 1 = {sc.K + 1} exceeds the {available} sources available up to order {sc.max_order}")
    if sc.interferer is not None and sc.K_prime + 1 > available:
        raise ConfigError(
            f"K_prime + 1 = {sc.K_prime + 1} exceeds the {available} sources available up to order {sc.max_order}"
        )
    if sc.design == "rake-of" and sc.K + 1 > sc.array.M:
        raise ConfigError(f"rake-of needs K + 1 <= M, got K + 1 = {sc.K + 1} with M = {sc.array.M}")
    exp = sc.experiment
    if exp.trials < 1:
        raise ConfigError("experiment.trials must be positive")
    if any(k < 0 for k in exp.K_values):
        raise ConfigError("experiment.K_values must be non-negative")
    if not 0 <= exp.margin < min(room.width, room.height) / 2:
        raise ConfigError("experiment.margin must leave room for sources")
    bad = [d for d in exp.designs if d not in DESIGNS]
    if bad:
        raise ConfigError(f"experiment.designs: unknown design(s) {', '.join(bad)}")
    if sc.noise.variance < 0 or sc.noise.sigma_x2 < 0 or sc.noise.sigma_z2 < 0:
        raise ConfigError("noise powers must be non-negative")
