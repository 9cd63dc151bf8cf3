"""
Scenario configuration: validated parameter set, YAML persistence and presets.
"""
import logging
import math
import os
from typing import Any, Dict, List, Literal, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .lattice import MIN_AGENTS

logger = logging.getLogger(__name__)


class ScenarioConfig(BaseModel):
    """All model parameters of one simulation run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "A"
    n: int = Field(1024, description="number of agents, a perfect square")
    rounds: int = Field(80000, ge=0, description="decision rounds L")
    tau: int = Field(20, ge=1, description="memory depth")
    alpha: float = Field(0.01, gt=0, description="market activity calibration")
    noise_sigma: float = Field(1.0, ge=0)
    connect_probability: float = Field(0.5, ge=0, le=1, description="p for the initial Bernoulli forces")
    endowment_cash: float = Field(100.0, ge=0)
    endowment_shares: int = Field(100, ge=0)
    maker_cash: float = Field(10240.0, ge=0)
    maker_shares: int = Field(10240, ge=0)
    sell_factor: float = Field(1.5, description="a > 1")
    buy_factor: float = Field(0.667, description="0 < b < 1")
    obey_probability: float = Field(0.70, ge=0, le=1, description="pi")
    base_period: int = Field(275, ge=1, description="K")
    jitter_range: int = Field(15, ge=1, description="k drawn from 1..jitter_range")
    window: int = Field(20, ge=0, description="rho")
    fundamental_growth: float = Field(1.05 / 1500, description="multiplicative growth g per round")
    rounds_per_day: int = Field(6, ge=1)
    seed: int = Field(42, ge=0, lt=2**64)
    max_sweeps: int = Field(50, ge=1)
    fit_range: Tuple[int, int] = (1, 100)
    max_lag: int = Field(100, ge=1)
    histogram_bins: int = Field(50, ge=2)
    initial_force_mode: Literal["memory", "bernoulli"] = "memory"
    check_invariants: bool = True
    debug_memoryless: bool = False
    log_every: int = Field(1000, ge=0)

    @field_validator("n")
    @classmethod
    def _square_lattice(cls, value: int) -> int:
        side = math.isqrt(value) if value > 0 else 0
        if side * side != value:
            raise ValueError(f"must be a perfect square, got {value}")
        if value < MIN_AGENTS:
            raise ValueError(f"must be at least {MIN_AGENTS} to keep 4 distinct neighbours, got {value}")
        return value

    @model_validator(mode="after")
    def _cross_field(self) -> "ScenarioConfig":
        if not self.sell_factor > 1:
            raise ConfigError(f"must be > 1, got {self.sell_factor}", field="sell_factor")
        if not 0 < self.buy_factor < 1:
            raise ConfigError(f"must lie in (0, 1), got {self.buy_factor}", field="buy_factor")
        if not self.window < self.base_period:
            raise ConfigError(
                f"must be smaller than base_period ({self.base_period}), got {self.window}", field="window"
            )
        if not 1 + self.fundamental_growth > 0:
            raise ConfigError(f"1 + g must be positive, got g={self.fundamental_growth}", field="fundamental_growth")
        lo, hi = self.fit_range
        if lo < 1 or hi <= lo:
            raise ConfigError(f"expected 1 <= lo < hi, got {self.fit_range}", field="fit_range")
        return self

    @property
    def side_length(self) -> int:
        return math.isqrt(self.n)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def validate_config(values: Dict[str, Any]) -> ScenarioConfig:
    """Build a ScenarioConfig, turning pydantic errors into ConfigError with the field name."""
    try:
        return ScenarioConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ())) or None
        raise ConfigError(first.get("msg", str(e)), field=field) from None


def with_overrides(config: ScenarioConfig, **changes: Any) -> ScenarioConfig:
    values = config.to_dict()
    values.update(changes)
    return validate_config(values)


def load_config(config_path: str) -> ScenarioConfig:
    """Load a scenario from a flat YAML file."""
    if not os.path.exists(config_path):
        raise ConfigError(f"config file not found: {config_path}")
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            values = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"could not parse {config_path}: {e}") from None

    if not isinstance(values, dict):
        raise ConfigError(f"{config_path} must contain a key: value mapping")

    # A config file may start from a preset and override a few keys.
    base = values.pop("preset", None)
    if base is not None:
        merged = preset(str(base)).to_dict()
        merged.update(values)
        values = merged

    config = validate_config(values)
    logger.info(f"Loaded scenario '{config.name}' from {config_path}")
    return config


def dump_config(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=None)


def save_config(config: ScenarioConfig, config_path: str) -> None:
    with open(config_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dump_config(config))


def parse_config(text: str) -> ScenarioConfig:
    values = yaml.safe_load(text) or {}
    if not isinstance(values, dict):
        raise ConfigError("config text must contain a key: value mapping")
    return validate_config(values)


# Full-scale presets and scaled-down desk versions of them.
_PRESETS: Dict[str, Dict[str, Any]] = {
    "A": {},
    "B": {
        "tau": 40,
        "base_period": 200,
        "jitter_range": 10,
        "window": 30,
        "obey_probability": 0.90,
    },
    "no-esteem": {"tau": 1},
}

_SMALL = {"n": 64, "rounds": 6000}


def list_presets() -> List[str]:
    return list(_PRESETS) + [f"{name}-small" for name in _PRESETS]


def preset(name: str) -> ScenarioConfig:
    """Return the named scenario ('A', 'B', 'no-esteem' or their '-small' variants)."""
    base_name, small = name, False
    if name.endswith("-small"):
        base_name, small = name[: -len("-small")], True

    if base_name not in _PRESETS:
        raise ConfigError(f"unknown preset '{name}', expected one of {', '.join(list_presets())}", field="preset")

    values: Dict[str, Any] = {"name": name}
    values.update(_PRESETS[base_name])
    if small:
        values.update(_SMALL)
    return validate_config(values)
