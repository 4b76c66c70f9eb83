"""Experiment configuration: schema, file loading and seed precedence."""

import json
import logging
import math
import os
from pathlib import Path
from typing import List, Literal, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "QAM_SEED"
SEED_LIMIT = 2**64


class ConfigFormatError(ValueError):
    """Raised when a config file is missing or not parseable JSON/YAML."""

    pass


class ExperimentConfig(BaseModel):
    """Parameters shared by every bench experiment.

    noise_levels are radians of uniform phase jitter when noise_kind is
    "jitter", or the fraction of units given fresh random phases when it is
    "fraction".
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(0, ge=0, lt=SEED_LIMIT)
    N: PositiveInt
    P_values: List[PositiveInt] = Field(min_length=1)
    noise_levels: List[float] = Field(default_factory=lambda: [0.0], min_length=1)
    noise_kind: Literal["jitter", "fraction"] = "jitter"
    trials: PositiveInt = 1
    min_confidence: float = Field(0.8, ge=0.0, le=1.0)
    max_patterns: PositiveInt = 4096
    dimensions: Optional[List[PositiveInt]] = None
    workers: PositiveInt = 1

    @field_validator("noise_levels")
    @classmethod
    def _finite_non_negative(cls, levels: List[float]) -> List[float]:
        for level in levels:
            if not math.isfinite(level) or level < 0:
                raise ValueError(f"noise levels must be finite and non-negative, got {level}")
        return levels

    @model_validator(mode="after")
    def _within_limits(self) -> "ExperimentConfig":
        too_many = [p for p in self.P_values if p > self.max_patterns]
        if too_many:
            raise ValueError(f"P values {too_many} exceed max_patterns={self.max_patterns}")
        if self.noise_kind == "fraction" and any(level > 1.0 for level in self.noise_levels):
            raise ValueError("fraction noise levels must lie within [0, 1]")
        return self

    @property
    def timing_dimensions(self) -> List[int]:
        return list(self.dimensions) if self.dimensions else [self.N]


def resolve_seed(
    flag: Optional[int], config_seed: int, environ: Optional[Mapping[str, str]] = None
) -> int:
    """Pick the seed: --seed flag, then QAM_SEED, then the config file."""
    environ = os.environ if environ is None else environ

    if flag is not None:
        seed, source = int(flag), "flag"
    elif environ.get(SEED_ENV_VAR, "").strip():
        raw = environ[SEED_ENV_VAR].strip()
        try:
            seed = int(raw)
        except ValueError:
            raise ValueError(f"{SEED_ENV_VAR}={raw!r} is not an integer")
        source = SEED_ENV_VAR
    else:
        seed, source = config_seed, "config"

    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"seed from {source} must be an unsigned 64-bit integer, got {seed}")
    logger.debug(f"Using seed {seed} from {source}")
    return seed


def load_config(
    path: Path, seed: Optional[int] = None, environ: Optional[Mapping[str, str]] = None
) -> ExperimentConfig:
    """Load and validate an experiment config from JSON or YAML.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigFormatError: If the file is not valid JSON/YAML or not a mapping
        pydantic.ValidationError: If a field violates the schema
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigFormatError(f"{path}: cannot parse config: {e}")

    if not isinstance(data, dict):
        raise ConfigFormatError(f"{path}: config must be a mapping of field names to values")

    config = ExperimentConfig.model_validate(data)
    resolved = resolve_seed(seed, config.seed, environ)
    if resolved != config.seed:
        config = config.model_copy(update={"seed": resolved})

    logger.info(f"Loaded experiment config from {path} (seed {config.seed})")
    return config
