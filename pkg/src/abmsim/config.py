"""Run configuration: JSON config files merged with command-line flags.

Precedence is defaults < config file < flags.  Keys are validated against a
per-subcommand schema before anything runs; unknown keys are errors.  A run
manifest is itself a valid config file (its ``config`` section is used).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .rng import MASK64, SeedSpec

OUTPUT_DIR_ENV = "ABMSIM_OUTPUT_DIR"
_REQUIRED = object()


class ConfigError(ValueError):
    def __init__(self, message: str, key: str = None, location: str = None):
        self.key = key
        self.location = location
        super().__init__(message)


@dataclass(frozen=True)
class Key:
    type: type
    default: Any = _REQUIRED
    choices: tuple = None
    nullable: bool = False
    help: str = ""

    @property
    def required(self) -> bool:
        return self.default is _REQUIRED


SIR_KEYS = {
    "b": Key(float, 0.047, help="transmission probability per infectious contact"),
    "period_min": Key(int, 3, help="shortest infectious period"),
    "period_max": Key(int, 6, help="longest infectious period"),
    "contacts_min": Key(int, 1, help="fewest contacts per susceptible per step"),
    "contacts_max": Key(int, 8, help="most contacts per susceptible per step"),
    "contact_scheme": Key(str, "global", choices=("global", "neighborhood")),
    "initial_infected": Key(int, None, nullable=True, help="index case id (default: lattice centre)"),
    "width": Key(int, 20),
    "height": Key(int, 20),
    "strict_recovery": Key(bool, False, help="recover when t > recovery time instead of t >= recovery time"),
}
MODEL_KEYS = {"sir": SIR_KEYS}

_COMMON_RUN = {
    "model": Key(str, "sir", choices=tuple(MODEL_KEYS)),
    "seed": Key(int, None, nullable=True, help="master seed (default: wall clock)"),
    "policy": Key(str, "fixed", choices=("fixed", "shuffled", "synchronous")),
    "workers": Key(int, None, nullable=True, help="worker processes (default: available cores)"),
}

COMMAND_KEYS = {
    "simulate": {
        **_COMMON_RUN,
        "steps": Key(int, 120),
        "stream": Key(int, 0, help="replicate index / stream id"),
        "out": Key(str, "run.csv"),
        "final_state": Key(str, None, nullable=True, help="also write the final GlobalState JSON here"),
    },
    "ensemble": {
        **_COMMON_RUN,
        "runs": Key(int, 500),
        "steps": Key(int, 120),
        "out": Key(str, "ensemble"),
        "keep_records": Key(bool, False, help="write per-run infection records"),
    },
    "calibrate": {
        **_COMMON_RUN,
        "runs": Key(int, 500),
        "target_r0": Key(float, 1.6),
        "b_min": Key(float, 0.0),
        "b_max": Key(float, 0.2),
        "tol": Key(float, 0.05),
        "max_evals": Key(int, 30),
        "out": Key(str, "calib.json"),
    },
    "analyze": {
        "in": Key(str),
        "column": Key(str, "I"),
        "window": Key(int, 30),
        "alpha": Key(float, 0.05),
        "max_lag": Key(int, 10),
        "out": Key(str, "report.json"),
    },
    "ode": {
        "beta": Key(float, 0.4),
        "gamma": Key(float, 0.25),
        "s0": Key(float, 399.0),
        "i0": Key(float, 1.0),
        "r0": Key(float, 0.0),
        "dt": Key(float, 0.1),
        "horizon": Key(float, 120.0),
        "out": Key(str, "ode.csv"),
    },
}

_RUN_FIELDS = ("model", "policy", "steps", "seed", "runs", "out", "workers")


@dataclass
class RunConfig:
    command: str
    model: Optional[str] = None
    params: dict = field(default_factory=dict)
    policy: str = "fixed"
    steps: Optional[int] = None
    seed: Optional[int] = None
    runs: Optional[int] = None
    out: Optional[str] = None
    workers: Optional[int] = None
    options: dict = field(default_factory=dict)

    def flat(self) -> dict:
        """All resolved keys as one mapping; loadable again as a config file."""
        d = {k: getattr(self, k) for k in _RUN_FIELDS if k in COMMAND_KEYS[self.command]}
        d.update(self.params)
        d.update(self.options)
        return d

    def seed_spec(self, stream_id: int = 0) -> SeedSpec:
        return SeedSpec(self.seed, stream_id)


def schema(command: str, model: str = None) -> dict:
    keys = dict(COMMAND_KEYS[command])
    if "model" in keys:
        keys.update(MODEL_KEYS[model or "sir"])
    return keys


def _check_type(key: str, spec: Key, value, location: str):
    if value is None:
        if spec.nullable:
            return None
        raise ConfigError(f"key {key!r} may not be null ({location})", key, location)
    t = spec.type
    ok = (
        (t is bool and isinstance(value, bool))
        or (t is int and isinstance(value, int) and not isinstance(value, bool))
        or (t is float and isinstance(value, (int, float)) and not isinstance(value, bool))
        or (t is str and isinstance(value, str))
    )
    if not ok:
        raise ConfigError(
            f"key {key!r} expects {t.__name__}, got {type(value).__name__} {value!r} ({location})", key, location
        )
    if spec.choices is not None and value not in spec.choices:
        raise ConfigError(f"key {key!r} must be one of {list(spec.choices)}, got {value!r} ({location})", key, location)
    return float(value) if t is float else value


def load_config_file(path, command: str = None) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist", location=str(path))
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}", location=str(path)) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object", location=str(path))
    if "manifest_version" in data:
        if command is not None and data.get("command") != command:
            raise ConfigError(f"{path} is a manifest for {data.get('command')!r}, not {command!r}", location=str(path))
        data = data["config"]
    return data


def default_out(name: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    return str(Path(base) / name) if base else name


def parse_config(command: str, flags: dict = None, config_path=None) -> RunConfig:
    """Merge defaults, an optional config file and flags into a validated RunConfig."""
    if command not in COMMAND_KEYS:
        raise ConfigError(f"unknown command {command!r}")
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    file_values = load_config_file(config_path, command) if config_path else {}
    model = flags.get("model", file_values.get("model", "sir"))
    if "model" in COMMAND_KEYS[command] and model not in MODEL_KEYS:
        raise ConfigError(f"unknown model {model!r}", "model")
    keys = schema(command, model)

    merged, origin = {}, {}
    for k, spec in keys.items():
        if not spec.required:
            merged[k] = spec.default
            origin[k] = "default"
    for source, values in ((str(config_path), file_values), ("command line", flags)):
        for k, v in values.items():
            if k not in keys:
                raise ConfigError(f"unknown key {k!r} ({source})", k, source)
            merged[k] = _check_type(k, keys[k], v, source)
            origin[k] = source
    for k, spec in keys.items():
        if k not in merged:
            raise ConfigError(f"missing required key {k!r}", k)

    if "seed" in keys:
        if merged["seed"] is None:
            merged["seed"] = SeedSpec.from_clock().master_seed
        if not 0 <= merged["seed"] <= MASK64:
            raise ConfigError(f"seed must fit in 64 unsigned bits ({origin['seed']})", "seed", origin["seed"])
    if origin.get("out") == "default":
        merged["out"] = default_out(merged["out"])
    for k in ("steps", "runs", "window", "max_lag", "max_evals"):
        if k in merged and merged[k] < 0:
            raise ConfigError(f"key {k!r} must be non-negative ({origin[k]})", k, origin[k])
    if merged.get("runs") == 0:
        raise ConfigError("key 'runs' must be >= 1", "runs", origin["runs"])

    cfg = RunConfig(command)
    model_keys = MODEL_KEYS.get(model, {}) if "model" in keys else {}
    for k, v in merged.items():
        if k in _RUN_FIELDS and k in COMMAND_KEYS[command]:
            setattr(cfg, k, v)
        elif k in model_keys:
            cfg.params[k] = v
        else:
            cfg.options[k] = v
    return cfg


def sir_params_from(cfg: RunConfig):
    from .sir import SirParams

    try:
        return SirParams(**cfg.params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
