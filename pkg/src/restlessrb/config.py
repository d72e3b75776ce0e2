"""Experiment configuration: schema, JSON loading, hashing and seed derivation.

The configuration is one JSON document.  Top-level keys:

    physics        object, fields of PhysicsConfig (all optional)
    optimizer      object, tuneup-protocol knobs (all optional)
    shots          int, measurement outcomes per cost evaluation
    n_sequences    int, size of the fixed random-sequence pool
    master_seed    int, root of every derived random stream
    rng            string, must be "pcg64" (the pinned generator)
    out_dir        string, default output directory

Unknown keys are rejected with the offending path so typos cannot silently
fall back to defaults.  Every output file embeds the SHA-256 of the canonical
(sorted, compact) JSON form together with the master seed and tool version,
and all randomness is derived from (master_seed, fixed stream keys), so
re-running a command with identical inputs reproduces identical data.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .simulator import PhysicsConfig, PulseParams

PINNED_RNG = "pcg64"


class ConfigError(Exception):
    """Invalid configuration file or value."""


@dataclass
class OptimizerSettings:
    """Tuneup-protocol knobs shared by both optimization stages."""

    max_iterations: int = 500
    budget_per_step: int = 300
    cost_spread_rtol: float = 1e-2
    coefficients: tuple[float, float, float, float] = (1.0, 2.0, 0.5, 0.5)
    overhead_s: float = 0.042

    def __post_init__(self):
        self.coefficients = tuple(float(c) for c in self.coefficients)
        if len(self.coefficients) != 4:
            raise ConfigError("optimizer.coefficients must have 4 entries")
        if self.max_iterations < 1 or self.budget_per_step < 3:
            raise ConfigError("optimizer budgets must be positive")
        if self.cost_spread_rtol <= 0 or self.overhead_s < 0:
            raise ConfigError("optimizer tolerances must be positive")


@dataclass
class ExperimentConfig:
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    shots: int = 8000
    n_sequences: int = 200
    master_seed: int = 1234
    rng: str = PINNED_RNG
    out_dir: str = "out"

    def __post_init__(self):
        if self.rng != PINNED_RNG:
            raise ConfigError(f"rng must be {PINNED_RNG!r} (pinned generator)")
        if self.shots < 2:
            raise ConfigError("shots must be at least 2")
        if self.n_sequences < 1:
            raise ConfigError("n_sequences must be at least 1")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["optimizer"]["coefficients"] = list(self.optimizer.coefficients)
        return data

    def canonical_json(self) -> str:
        # out_dir does not influence any data, so it stays out of the identity.
        data = self.to_dict()
        data.pop("out_dir")
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
    return data


def _pulse_params(data: dict, path: str) -> PulseParams:
    _build(PulseParams, data, path)
    try:
        return PulseParams(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a validated configuration; errors carry the offending key path."""
    if not isinstance(data, dict):
        raise ConfigError("top level: expected an object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"top level: unknown key(s) {sorted(unknown)}")

    kwargs: dict = {}
    if "physics" in data:
        pdata = dict(_build(PhysicsConfig, data["physics"], "physics"))
        if "opt" in pdata:
            pdata["opt"] = _pulse_params(pdata["opt"], "physics.opt")
        try:
            kwargs["physics"] = PhysicsConfig(**pdata)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"physics: {exc}") from exc
    if "optimizer" in data:
        odata = _build(OptimizerSettings, data["optimizer"], "optimizer")
        try:
            kwargs["optimizer"] = OptimizerSettings(**odata)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"optimizer: {exc}") from exc
    for key in ("shots", "n_sequences", "master_seed"):
        if key in data:
            value = data[key]
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{key}: expected an integer")
            kwargs[key] = value
    for key in ("rng", "out_dir"):
        if key in data:
            if not isinstance(data[key], str):
                raise ConfigError(f"{key}: expected a string")
            kwargs[key] = data[key]
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    """Load and validate a JSON configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)


def derive_seed(master_seed: int, *key: int) -> int:
    """Deterministic child seed for a named random stream."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
