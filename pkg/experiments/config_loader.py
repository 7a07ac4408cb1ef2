"""
Experiment Config Module

Loads, validates and canonicalizes experiment configuration.

Precedence for every field is flag > environment > config file > settings
default. A .env file in the working directory is read into the environment
before overrides are resolved.
"""

import copy
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from dotenv import load_dotenv

import sys
sys.path.append('..')
from config.settings import (
    ENV_OVERRIDES, EXPERIMENT_DEFAULTS, MONTE_CARLO_SETTINGS, OUTPUT_SETTINGS,
    SPECTRAL_SETTINGS, SUBCOMMANDS
)
from core.errors import ConfigError, ToolkitError
from core.norms import NormSpec
from utils.logger import get_logger

logger = get_logger(__name__)

KNOWN_KEYS = {"subcommand", "seed", "samples", "specs", "alpha", "N", "out",
              "workers", "format", "gnuplot", "params"}

# fields that change where or how fast a run happens, not what it computes
NON_SEMANTIC = ("out", "workers", "format", "gnuplot")


def _as_int(name: str, value, minimum: int = None) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer (got {value!r})")
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer (got {value!r})")
    if isinstance(value, float) and number != value:
        raise ConfigError(f"{name} must be an integer (got {value!r})")
    if minimum is not None and number < minimum:
        raise ConfigError(f"{name} must be >= {minimum} (got {number})")
    return number


@dataclass
class ExperimentConfig:
    """One experiment run."""
    subcommand: str
    seed: int = MONTE_CARLO_SETTINGS['default_seed']
    samples: int = 1
    specs: List[str] = field(default_factory=list)
    alpha: float = SPECTRAL_SETTINGS['default_alpha']
    N: List[int] = field(default_factory=list)
    out: str = OUTPUT_SETTINGS['default_out']
    workers: int = MONTE_CARLO_SETTINGS['default_workers']
    format: str = OUTPUT_SETTINGS['default_format']
    gnuplot: bool = False
    params: Dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping) -> 'ExperimentConfig':
        """Validate a raw mapping, filling subcommand defaults."""
        if not isinstance(data, Mapping):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        subcommand = data.get("subcommand")
        if subcommand not in SUBCOMMANDS:
            raise ConfigError(f"subcommand must be one of {list(SUBCOMMANDS)} (got {subcommand!r})")

        defaults = copy.deepcopy(EXPERIMENT_DEFAULTS[subcommand])
        params = {**defaults.get("params", {}), **dict(data.get("params") or {})}
        dim = _as_int("params.dim", params.get("dim", 1), minimum=1)

        raw_specs = data.get("specs", defaults.get("specs", []))
        if isinstance(raw_specs, str):
            raw_specs = [raw_specs]
        try:
            specs = [str(NormSpec.parse(text, dim)) for text in raw_specs]
        except ToolkitError as e:
            raise ConfigError(f"invalid norm spec: {e.message}")

        raw_N = data.get("N", defaults.get("N", []))
        if isinstance(raw_N, (int, float)) and not isinstance(raw_N, bool):
            raw_N = [raw_N]
        Ns = [_as_int("N", n, minimum=1) for n in raw_N]

        try:
            alpha = float(data.get("alpha", SPECTRAL_SETTINGS['default_alpha']))
        except (TypeError, ValueError):
            raise ConfigError(f"alpha must be a number (got {data.get('alpha')!r})")
        if alpha < 0:
            raise ConfigError(f"alpha must be >= 0 (got {alpha})")

        fmt = str(data.get("format", OUTPUT_SETTINGS['default_format'])).lower()
        if fmt not in OUTPUT_SETTINGS['formats']:
            raise ConfigError(f"format must be csv or json (got {fmt!r})")

        seed = _as_int("seed", data.get("seed", MONTE_CARLO_SETTINGS['default_seed']), minimum=0)
        if seed >= 1 << 64:
            raise ConfigError(f"seed must fit in 64 bits (got {seed})")

        return cls(
            subcommand=subcommand,
            seed=seed,
            samples=_as_int("samples", data.get("samples", defaults.get("samples", 1)), minimum=0),
            specs=specs,
            alpha=alpha,
            N=Ns,
            out=str(data.get("out", OUTPUT_SETTINGS['default_out'])),
            workers=_as_int("workers", data.get("workers", MONTE_CARLO_SETTINGS['default_workers']),
                            minimum=1),
            format=fmt,
            gnuplot=bool(data.get("gnuplot", False)),
            params=params,
        )

    @classmethod
    def parse(cls, text: str) -> 'ExperimentConfig':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str) -> 'ExperimentConfig':
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, "r", encoding="utf-8") as handle:
            return cls.parse(handle.read())

    @property
    def dim(self) -> int:
        return int(self.params.get("dim", 1))

    def norm_specs(self) -> List[NormSpec]:
        return [NormSpec.parse(text, self.dim) for text in self.specs]

    def to_dict(self) -> Dict:
        return {
            "subcommand": self.subcommand,
            "seed": self.seed,
            "samples": self.samples,
            "specs": list(self.specs),
            "alpha": self.alpha,
            "N": list(self.N),
            "out": self.out,
            "workers": self.workers,
            "format": self.format,
            "gnuplot": self.gnuplot,
            "params": self.params,
        }

    def to_json(self) -> str:
        """Canonical text: sorted keys, normalized specs and numbers."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)

    def config_hash(self) -> str:
        """SHA-256 of the canonical config without the run-location fields."""
        semantic = {k: v for k, v in self.to_dict().items() if k not in NON_SEMANTIC}
        text = json.dumps(semantic, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def env_overrides(environ: Mapping = None, dotenv_path: str = None) -> Dict:
    """Read the BRT_* overrides (after loading .env if present)."""
    if environ is None:
        load_dotenv(dotenv_path=dotenv_path, override=False)
        environ = os.environ
    found = {}
    for key, variable in ENV_OVERRIDES.items():
        if variable in environ and environ[variable] != "":
            found[key] = environ[variable]
    if found:
        logger.debug(f"Environment overrides: {found}")
    return found


def resolve_config(subcommand: str, config_path: Optional[str] = None,
                   flags: Mapping = None, environ: Mapping = None) -> ExperimentConfig:
    """
    Merge config file, environment and CLI flags into one ExperimentConfig.

    Args:
        subcommand: Subcommand from the command line
        config_path: Optional JSON config file
        flags: CLI values; None entries are ignored
        environ: Environment mapping (defaults to os.environ plus .env)
    """
    data: Dict = {}
    if config_path:
        if not os.path.exists(config_path):
            raise ConfigError(f"config file not found: {config_path}")
        with open(config_path, "r", encoding="utf-8") as handle:
            try:
                data = json.load(handle)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if data.get("subcommand", subcommand) != subcommand:
            raise ConfigError(
                f"config file is for {data['subcommand']!r}, not {subcommand!r}"
            )

    data = {**data, **env_overrides(environ)}
    data.update({k: v for k, v in (flags or {}).items() if v is not None})
    data["subcommand"] = subcommand
    return ExperimentConfig.from_dict(data)
