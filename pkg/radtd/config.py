"""
Run configuration.

Defaults are the benchmark setup: w=15, m=1, k=10, L=10, threshold from a
0.99 confidence interval over held-out training scores. Precedence when the
CLI builds a config is flags > --config JSON > these defaults (see `merge_layers`).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError

LABEL_COLUMN_CANDIDATES = ("is_anomaly", "anomaly")
TIMESTAMP_FALLBACK = "timestamps"
METHODS = ("radtd", "elmae", "rqa_rr", "rqa_det", "rqa_lam")
ACTIVATION_NAMES = ("sigmoid", "tanh", "sin", "relu")


class ColumnSchema(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    timestamp: str = "timestamp"
    values: Tuple[str, ...] = ("value",)
    label: Optional[str] = None

    @model_validator(mode="after")
    def _check(self) -> "ColumnSchema":
        if not self.values:
            raise ValueError("schema needs at least one value column")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"duplicate value columns: {list(self.values)}")
        return self


class RadtdConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    w: int = Field(15, description="subsequence length")
    m: int = Field(1, description="embedding dimension")
    tau: int = Field(1, description="embedding delay")
    k: int = Field(10, description="URPs per training batch")
    L: int = Field(10, description="hidden nodes")
    C: float = Field(1e3, description="ridge regularisation constant")
    hop: int = Field(1, description="window stride")
    epsilon: Optional[float] = Field(None, description="manual anomaly threshold")
    confidence: Optional[float] = Field(0.99, description="confidence level for auto threshold")
    merge_epsilon: Optional[float] = None
    seed: int = 0
    activation: Literal["sigmoid", "tanh", "sin", "relu"] = "sigmoid"
    joint: bool = False
    update_on_match: bool = False
    train_fraction: float = 0.3
    l_min: int = 2
    v_min: int = 2
    rqa_stride: int = 1
    rqa_score: Literal["diff", "median"] = "diff"
    median_window: int = 10

    @model_validator(mode="before")
    @classmethod
    def _epsilon_clears_confidence(cls, data: Any) -> Any:
        # A manual epsilon replaces the default confidence unless both were given explicitly.
        if isinstance(data, dict) and data.get("epsilon") is not None and "confidence" not in data:
            data = {**data, "confidence": None}
        return data

    @model_validator(mode="after")
    def _check(self) -> "RadtdConfig":
        if self.w < 3:
            raise ValueError(f"w must be >= 3 (got {self.w})")
        if self.m < 1 or self.tau < 1:
            raise ValueError(f"m and tau must be >= 1 (got m={self.m}, tau={self.tau})")
        if self.phase_count < 2:
            raise ValueError(
                f"window too short for embedding: w - 1 - (m-1)*tau = {self.phase_count} < 2"
            )
        if self.hop < 1:
            raise ValueError(f"hop must be >= 1 (got {self.hop})")
        if self.k < 1:
            raise ValueError(f"k must be >= 1 (got {self.k})")
        if self.C <= 0:
            raise ValueError(f"C must be > 0 (got {self.C})")
        if not 1 <= self.L <= self.urp_features:
            raise ValueError(f"L must be in [1, {self.urp_features}] for w={self.w} (got {self.L})")
        if (self.epsilon is None) == (self.confidence is None):
            raise ValueError("exactly one of epsilon / confidence must be set")
        if self.epsilon is not None and not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in [0, 1) (got {self.epsilon})")
        if self.merge_epsilon is not None and not 0.0 <= self.merge_epsilon < 1.0:
            raise ValueError(f"merge_epsilon must be in [0, 1) (got {self.merge_epsilon})")
        if self.confidence is not None and not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0, 1) (got {self.confidence})")
        if not 0.0 < self.train_fraction <= 1.0:
            raise ValueError(f"train_fraction must be in (0, 1] (got {self.train_fraction})")
        if self.l_min < 2 or self.v_min < 2:
            raise ValueError("l_min and v_min must be >= 2")
        if self.rqa_stride < 1 or self.median_window < 1:
            raise ValueError("rqa_stride and median_window must be >= 1")
        return self

    @property
    def phase_count(self) -> int:
        return self.w - 1 - (self.m - 1) * self.tau

    @property
    def urp_features(self) -> int:
        return self.phase_count ** 2

    def fingerprint(
        self,
        representation: str = "urp",
        channels: Tuple[str, ...] = ("value",),
        feature_length: Optional[int] = None,
    ) -> Dict[str, Any]:
        if feature_length is None:
            feature_length = self.urp_features if representation == "urp" else self.w * len(channels)
        return {
            "w": self.w,
            "m": self.m,
            "tau": self.tau,
            "k": self.k,
            "L": self.L,
            "C": self.C,
            "hop": self.hop,
            "activation": self.activation,
            "representation": representation,
            "channels": list(channels),
            "feature_length": int(feature_length),
        }


FINGERPRINT_GEOMETRY_KEYS = ("w", "m", "tau", "k", "L", "C", "hop", "activation")


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    radtd: RadtdConfig = RadtdConfig()
    schema_: ColumnSchema = Field(ColumnSchema(), alias="schema")
    methods: Tuple[str, ...] = METHODS
    seeds: Tuple[int, ...] = (0,)
    dataset_dir: Optional[str] = None
    exclude: Tuple[str, ...] = ("*_all.csv",)
    jobs: int = 1

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods: {unknown} (choose from {list(METHODS)})")
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1 (got {self.jobs})")
        return self


def merge_layers(*layers: Dict[str, Any]) -> Dict[str, Any]:
    """Later layers win; nested dicts merge key by key; None values never override."""
    merged: Dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if value is None:
                continue
            if isinstance(value, dict):
                base = merged.get(key)
                merged[key] = merge_layers(base if isinstance(base, dict) else {}, value)
            else:
                merged[key] = value
    return merged


def build_run_config(file_layer: Optional[Dict[str, Any]] = None, flag_layer: Optional[Dict[str, Any]] = None) -> RunConfig:
    file_layer = file_layer or {}
    flag_layer = flag_layer or {}
    data = merge_layers(file_layer, flag_layer)
    # epsilon and confidence are one choice: whichever the flags name drops the other.
    flag_radtd = flag_layer.get("radtd") or {}
    radtd = dict(data.get("radtd") or {})
    if flag_radtd.get("epsilon") is not None and flag_radtd.get("confidence") is None:
        radtd.pop("confidence", None)
    elif flag_radtd.get("confidence") is not None and flag_radtd.get("epsilon") is None:
        radtd.pop("epsilon", None)
    if radtd:
        data = {**data, "radtd": radtd}
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_first_error(exc)) from exc


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    p = Path(path).resolve()
    if not p.exists():
        raise FileNotFoundError(f"Missing config: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {p} ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a JSON object: {p}")
    return data


def make_config(**overrides: Any) -> RadtdConfig:
    try:
        return RadtdConfig(**overrides)
    except ValidationError as exc:
        raise ConfigError(_first_error(exc)) from exc


def _first_error(exc: ValidationError) -> str:
    errors = exc.errors()
    if not errors:
        return str(exc)
    first = errors[0]
    loc = ".".join(str(part) for part in first.get("loc", ()))
    msg = str(first.get("msg", "invalid value"))
    if msg.startswith("Value error, "):
        msg = msg[len("Value error, "):]
    return f"{loc}: {msg}" if loc else msg


def config_schema() -> Dict[str, Any]:
    return RunConfig.model_json_schema(by_alias=True)


def method_list(raw: Optional[str]) -> Optional[List[str]]:
    if raw is None:
        return None
    return [m.strip() for m in raw.split(",") if m.strip()]
