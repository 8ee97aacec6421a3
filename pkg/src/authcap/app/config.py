"""
Run configuration and seeded random streams.

Values resolve as command-line flags, then the ``--config`` JSON file, then
the defaults declared on ``RunConfig``.
"""

import json
import zlib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from app.errors import ValidationError

COMMANDS = ("region", "sweep", "project", "lfunc", "transform", "simulate-simmons", "simulate-code")
THEOREMS = ("1", "3", "gungor", "backoff")
SWEEP_MODES = ("r-vs-alpha", "alpha-vs-kappa", "alpha-vs-lambda_t")
QUANTITIES = ("epsilon", "omega", "substitution", "impersonation")


def rng_stream(seed: int, module: str, purpose: str) -> np.random.Generator:
    """
    An independent PCG64 stream per (seed, module, purpose).

    The same triple gives the same draws on every platform and numpy release
    that keeps PCG64 and SeedSequence stable.
    """
    if seed < 0:
        raise ValidationError(f"seed must be non-negative, got {seed}")
    entropy = [seed, zlib.crc32(module.encode()), zlib.crc32(purpose.encode())]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class RunConfig:
    command: str = "region"

    # channels: BSC parameters, or kernel JSON files that override them
    lt: float = 0.1
    lq: float = 0.3
    t_path: str | None = None
    q_path: str | None = None

    # auxiliary choice
    lambda_rho: float = 0.0
    cloud: str = "single-cloud"
    rho_path: str | None = None
    sigma_path: str | None = None
    tau_path: str | None = None
    j: int = 1

    # region / transform
    theorem: str = "3"
    point: str | None = None
    beta: float = 0.0
    gamma1: float = 0.01
    gamma2: float = 0.01
    tol: float = 1e-9

    # sweeps
    mode: str = "r-vs-alpha"
    r: float | None = None
    kappa: float | None = None
    x_min: float = 0.0
    x_max: float = 1.0
    points: int = 21
    rho_steps: int = 10
    tau_steps: int = 10
    refine: bool = True
    compare: str | None = None
    relaxed: bool = False

    # projection and nu search
    projection: str = "both"
    target_path: str | None = None
    resolution: int = 100
    family: str = "bsc"
    kappa_step: float = 1e-3
    strict: bool = False

    # simulation
    n: int = 4
    message_count: int = 8
    cloud_count: int = 1
    key_count: int = 4
    x_size: int = 2
    weight: int | None = None
    rho_flips: int = 0
    quantity: str = "omega"
    round_i: int = 1
    codes: int = 1
    samples: int = 0
    reduced_count: int | None = None
    seed: int = 0
    budget: int = 100_000_000

    # output
    output: str | None = None
    format: str = "json"
    svg: str | None = None
    threads: int | None = None
    progress: bool = False

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in fields(cls)}

    @classmethod
    def resolve(cls, flags: dict[str, Any], config_file: str | None = None) -> "RunConfig":
        """Merge defaults, the JSON file and the flags that were actually given."""
        merged: dict[str, Any] = {}
        if config_file:
            merged.update(load_config_file(config_file))
        merged.update({k: v for k, v in flags.items() if v is not None})
        unknown = set(merged) - cls.field_names()
        if unknown:
            raise ValidationError(f"unknown configuration keys: {sorted(unknown)}")
        return replace(cls(), **merged).validate()

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        for name in ("lt", "lq"):
            value = getattr(self, name)
            if not 0.0 <= value <= 0.5:
                raise ValidationError(f"--{name} must lie in [0, 1/2], got {value}")
        if not 0.0 <= self.lambda_rho <= 1.0:
            raise ValidationError(f"--lambda-rho must lie in [0, 1], got {self.lambda_rho}")
        if self.cloud not in ("single-cloud", "binary-cloud"):
            raise ValidationError(f"unknown auxiliary family {self.cloud!r}")
        if self.theorem not in THEOREMS:
            raise ValidationError(f"--theorem must be one of {THEOREMS}")
        if self.mode not in SWEEP_MODES:
            raise ValidationError(f"--mode must be one of {SWEEP_MODES}")
        if self.projection not in ("both", "output"):
            raise ValidationError("--projection must be 'both' or 'output'")
        if self.family not in ("simplex", "bsc"):
            raise ValidationError("--family must be 'simplex' or 'bsc'")
        if self.quantity not in QUANTITIES:
            raise ValidationError(f"--quantity must be one of {QUANTITIES}")
        if self.format not in ("json", "csv"):
            raise ValidationError("--format must be 'json' or 'csv'")
        if self.compare not in (None, "gungor"):
            raise ValidationError("--compare only supports 'gungor'")
        positive = ("j", "resolution", "points", "n", "message_count", "cloud_count", "key_count",
                    "x_size", "round_i", "codes", "budget", "tau_steps")
        for name in positive:
            if getattr(self, name) < 1:
                raise ValidationError(f"--{name.replace('_', '-')} must be at least 1")
        for name in ("beta", "x_min", "x_max", "samples", "seed", "rho_steps", "rho_flips"):
            if getattr(self, name) < 0:
                raise ValidationError(f"--{name.replace('_', '-')} must be non-negative")
        for name in ("gamma1", "gamma2", "tol", "kappa_step"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"--{name.replace('_', '-')} must be positive")
        if self.x_max < self.x_min:
            raise ValidationError("--x-max must not be below --x-min")
        if self.threads is not None and self.threads < 1:
            raise ValidationError("--threads must be at least 1")
        if self.reduced_count is not None and self.reduced_count < 1:
            raise ValidationError("--reduced-count must be at least 1")
        return self

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def load_config_file(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    try:
        with open(path, "r") as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(payload, dict):
        raise ValidationError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in payload.items()}
