"""Run configuration: YAML schema, strict validation, canonical hashing.

A config file mirrors RunConfig section by section. Unknown keys are
rejected by name, missing values fall back to the reference defaults
(dt=0.1, theta=0.3, n=300, 3000 steps, window 300, bin width 0.75,
tau=0.25), and every loaded config reserializes to the identical
fully-expanded form, so (config, master_seed) pins every output byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .model import ModelConstants
from .scenarios import CODE_FACTIONS, FACTION_CODES, FACTIONS, ScenarioSpec

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunConfig",
    "load_config",
    "config_from_dict",
    "config_to_dict",
    "save_config",
    "config_hash",
    "parse_transition",
    "format_transition",
    "ALL_TRANSITIONS",
]

EXPERIMENT_MODES = ("study", "intervention", "sweep")
SWEEP_AXES = ("bin_width", "t_star", "scenario")

# the six ordered disposition switches, in the reference reporting order
ALL_TRANSITIONS = (
    ("neophilic", "conformic"),
    ("neophilic", "homophilic"),
    ("conformic", "homophilic"),
    ("conformic", "neophilic"),
    ("homophilic", "conformic"),
    ("homophilic", "neophilic"),
)


class ConfigError(ValueError):
    """Configuration file failed validation; message names the field."""


def parse_transition(raw) -> tuple[str, str]:
    """Accept 'A->H' style codes or [from, to] faction-name pairs."""
    if isinstance(raw, str):
        parts = [p.strip() for p in raw.replace("→", "->").split("->")]
        if len(parts) != 2:
            raise ConfigError(f"transition {raw!r} must look like 'A->H'")
        resolved = []
        for part in parts:
            if part.upper() in CODE_FACTIONS:
                resolved.append(CODE_FACTIONS[part.upper()])
            elif part.lower() in FACTIONS:
                resolved.append(part.lower())
            else:
                raise ConfigError(f"unknown faction {part!r} in transition {raw!r}")
        return tuple(resolved)
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return parse_transition(f"{raw[0]}->{raw[1]}")
    raise ConfigError(f"transition {raw!r} must be 'A->H' or a [from, to] pair")


def format_transition(transition: tuple[str, str]) -> str:
    return f"{FACTION_CODES[transition[0]]}->{FACTION_CODES[transition[1]]}"


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment-mode section of a run configuration."""

    mode: str = "study"
    transitions: tuple[tuple[str, str], ...] = ALL_TRANSITIONS
    t_stars: tuple[int, ...] = (600,)
    tau: float = 0.25
    focal_count: int = 1
    null_control: bool = False
    resamples: int = 10_000
    confidence: float = 0.95
    sweep_axis: str | None = None
    sweep_values: tuple = ()

    def __post_init__(self):
        if self.mode not in EXPERIMENT_MODES:
            raise ConfigError(f"experiment.mode must be one of {EXPERIMENT_MODES}, got {self.mode!r}")
        if self.tau <= 0:
            raise ConfigError(f"experiment.tau must be > 0, got {self.tau}")
        if self.focal_count < 1:
            raise ConfigError(f"experiment.focal_count must be >= 1, got {self.focal_count}")
        if self.resamples < 1000:
            raise ConfigError(f"experiment.resamples must be >= 1000, got {self.resamples}")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError(f"experiment.confidence must lie in (0, 1), got {self.confidence}")
        if any(t <= 0 for t in self.t_stars):
            raise ConfigError(f"experiment.t_stars must be positive, got {self.t_stars}")
        if self.mode == "sweep":
            if self.sweep_axis not in SWEEP_AXES:
                raise ConfigError(
                    f"experiment.sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}"
                )
            if not self.sweep_values:
                raise ConfigError("experiment.sweep_values must be non-empty for sweeps")


@dataclass(frozen=True)
class RunConfig:
    """Complete, validated description of one reproducible run."""

    scenario: ScenarioSpec
    master_seed: int
    constants: ModelConstants = ModelConstants()
    steps: int = 3000
    window_step: int = 300
    bin_width: float = 0.75
    log_base: float = 2.0
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output_dir: str = "out"

    def __post_init__(self):
        if self.master_seed < 0:
            raise ConfigError(f"master_seed must be >= 0, got {self.master_seed}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.window_step < 1:
            raise ConfigError(f"window_step must be >= 1, got {self.window_step}")
        if self.window_step > self.steps:
            raise ConfigError(
                f"window_step {self.window_step} exceeds steps {self.steps}; no window fits"
            )
        if self.bin_width <= 0:
            raise ConfigError(f"bin_width must be > 0, got {self.bin_width}")
        if self.log_base < 2:
            raise ConfigError(f"log_base must be >= 2, got {self.log_base}")


def _check_keys(section: str, raw: dict, allowed: set[str]) -> None:
    unknown = set(raw) - allowed
    if unknown:
        name = sorted(unknown)[0]
        where = f"{section}.{name}" if section else name
        raise ConfigError(f"unknown config key {where!r}")


def _build_dataclass(cls, section: str, raw: dict, casts: dict | None = None):
    allowed = {f.name for f in fields(cls)}
    _check_keys(section, raw, allowed)
    kwargs = dict(raw)
    for key, cast in (casts or {}).items():
        if key in kwargs and kwargs[key] is not None:
            kwargs[key] = cast(kwargs[key])
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        prefix = f"{section}: " if section else ""
        raise ConfigError(f"{prefix}{exc}") from exc


def config_from_dict(raw: dict) -> RunConfig:
    """Validate a nested plain dict (parsed YAML) into a RunConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    allowed = {f.name for f in fields(RunConfig)}
    _check_keys("", raw, allowed)

    scenario_raw = raw.get("scenario")
    if not isinstance(scenario_raw, dict) or "kind" not in scenario_raw:
        raise ConfigError("scenario section with a 'kind' key is required")
    scenario = _build_dataclass(
        ScenarioSpec, "scenario", scenario_raw,
        casts={"factions": lambda v: tuple(v)},
    )

    constants = _build_dataclass(ModelConstants, "constants", raw.get("constants") or {})

    experiment = _build_dataclass(
        ExperimentConfig, "experiment", raw.get("experiment") or {},
        casts={
            "transitions": lambda v: tuple(parse_transition(t) for t in v),
            "t_stars": lambda v: tuple(int(t) for t in v),
            "sweep_values": tuple,
        },
    )

    if "master_seed" not in raw:
        raise ConfigError("master_seed is required")
    top = {
        key: raw[key]
        for key in ("master_seed", "steps", "window_step", "bin_width", "log_base", "output_dir")
        if key in raw
    }
    return _build_dataclass(
        RunConfig, "", {"scenario": scenario, "constants": constants, "experiment": experiment, **top},
        casts={"master_seed": int, "steps": int, "window_step": int,
               "bin_width": float, "log_base": float, "output_dir": str},
    )


def config_to_dict(config: RunConfig) -> dict:
    """Fully expanded plain-dict form; load(dump(load(x))) == load(x)."""
    out = {
        "scenario": asdict(config.scenario),
        "constants": asdict(config.constants),
        "experiment": asdict(config.experiment),
        "master_seed": config.master_seed,
        "steps": config.steps,
        "window_step": config.window_step,
        "bin_width": config.bin_width,
        "log_base": config.log_base,
        "output_dir": config.output_dir,
    }
    scenario = out["scenario"]
    if scenario["factions"] is not None:
        scenario["factions"] = list(scenario["factions"])
    experiment = out["experiment"]
    experiment["transitions"] = [format_transition(t) for t in config.experiment.transitions]
    experiment["t_stars"] = list(config.experiment.t_stars)
    experiment["sweep_values"] = list(config.experiment.sweep_values)
    return out


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a YAML run configuration file."""
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if raw is None:
        raise ConfigError(f"{path}: empty config")
    return config_from_dict(raw)


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(config), sort_keys=True))


def config_hash(config: RunConfig) -> str:
    """Short stable digest of the fully-expanded config."""
    canonical = json.dumps(config_to_dict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]
