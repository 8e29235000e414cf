import math
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from qcore.exceptions import ConfigError
from qcore.states import BipartitionLayout
from runner.settings import SETTINGS

SCHEMA_VERSION = 1
MAX_FACTOR_DIM = 16
MAX_JOINT_DIM = 256


# ---------- Tolleranze ----------

class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    balance: float = Field(1e-9, gt=0)
    identity: float = Field(1e-10, gt=0)
    crooks: float = Field(1e-9, gt=0)
    symmetry: float = Field(1e-12, gt=0)
    reversal: float = Field(1e-9, gt=0)
    rate: float = Field(1e-6, gt=0)


# ---------- Esperimento ----------

class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    experiment: Optional[str] = None

    seed: int = Field(0, ge=0, lt=2**64)
    trials: int = Field(100, ge=1)
    workers: int = Field(1, ge=1)

    epsilon: float = 0.1
    epsilons: List[float] = [0.01, 0.05, 0.1, 0.3]
    beta: float = 1.0
    theta: float = math.pi / 4
    collisions: int = Field(8, ge=0)
    dims: str = "2x2"

    restarts: int = Field(3, ge=1)
    max_iterations: int = Field(1500, ge=1)
    tolerance: float = Field(1e-12, gt=0)
    step: float = Field(0.3, gt=0)
    states: Literal["random", "demo", "bures"] = "random"
    delta: List[float] = [0.3]

    couplings: List[float] = [0.0, 0.5, 1.0, 2.0]
    sweep_epsilons: List[float] = [0.0, 0.1, 0.5]
    times: List[float] = [0.25, 0.5, 1.0, 2.0]
    interaction: Literal["dm", "xy"] = "dm"

    format: Literal["csv", "json"] = "csv"
    out: Optional[str] = None
    tolerances: Tolerances = Tolerances()

    @field_validator("schema_version")
    @classmethod
    def validate_schema(cls, v: int) -> int:
        if v != SCHEMA_VERSION:
            raise ValueError(f"versione di schema non supportata: {v} (attesa {SCHEMA_VERSION})")
        return v

    @field_validator("epsilon")
    @classmethod
    def validate_epsilon(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError("deve stare in [0, 1]")
        return v

    @field_validator("epsilons", "sweep_epsilons")
    @classmethod
    def validate_epsilon_list(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("lista vuota")
        if any(not 0.0 <= e <= 1.0 for e in v):
            raise ValueError("ogni valore deve stare in [0, 1]")
        return v

    @field_validator("couplings", "times")
    @classmethod
    def validate_finite_list(cls, v: List[float]) -> List[float]:
        if not v or not all(math.isfinite(x) for x in v):
            raise ValueError("servono valori finiti (lista non vuota)")
        return v

    @field_validator("beta")
    @classmethod
    def validate_beta(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError("deve essere finito e > 0")
        return v

    @field_validator("delta", mode="before")
    @classmethod
    def wrap_delta(cls, v):
        return [v] if isinstance(v, (int, float)) else v

    @field_validator("delta")
    @classmethod
    def validate_delta(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("lista vuota")
        if any(not math.isfinite(d) or d < 1e-6 for d in v):
            raise ValueError("ogni raggio deve essere finito e >= 1e-6")
        return v

    @field_validator("dims")
    @classmethod
    def validate_dims(cls, v: str) -> str:
        layout = BipartitionLayout.parse(v)
        if max(layout.dim_s, layout.dim_r) > MAX_FACTOR_DIM or layout.joint_dim > MAX_JOINT_DIM:
            raise ValueError(f"{v} oltre il limite ({MAX_FACTOR_DIM} per fattore, {MAX_JOINT_DIM} congiunta)")
        return str(layout)

    @field_validator("collisions")
    @classmethod
    def validate_collisions(cls, v: int) -> int:
        cap = SETTINGS["joint_dim_cap"]
        if 2 ** (v + 1) > cap:
            raise ValueError(f"stato congiunto 2^{v + 1} oltre joint_dim_cap={cap}")
        return v

    @property
    def layout(self) -> BipartitionLayout:
        return BipartitionLayout.parse(self.dims)

    @property
    def planned_cells(self) -> int:
        return len(self.couplings) * len(self.sweep_epsilons) * len(self.times)

    def explicitly_set(self, key: str) -> bool:
        return key in self.model_fields_set


def _to_config_error(exc: ValidationError) -> ConfigError:
    first = exc.errors()[0]
    key = ".".join(str(part) for part in first["loc"]) or "config"
    return ConfigError(key, first["msg"])


def build_config(values: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        raise _to_config_error(e) from e


def parse_config_text(raw_text: str) -> dict:
    try:
        data = yaml.safe_load(raw_text) if raw_text else None
    except yaml.YAMLError as e:
        raise ConfigError("config", f"YAML non valido: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config", "atteso un file chiave: valore")
    return data


def validate_config(raw_text: str) -> ExperimentConfig:
    """Testo chiave: valore (YAML) -> ExperimentConfig con default e controlli di intervallo."""
    return build_config(parse_config_text(raw_text))
