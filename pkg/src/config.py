"""
Run configuration - dataclasses mirroring the JSON config file.

Loading is strict: unknown keys at any level and values of the wrong type
are rejected with the dotted key path in the message.
"""

import dataclasses
import json
import logging
import os
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from src.cascade import CostModel
from src.errors import ConfigError, ParameterError

logger = logging.getLogger(__name__)

THREADS_ENV = "SKIMREAD_THREADS"
MAX_EPOCHS = 50
SELECTION_METRICS = ("accuracy", "auc")
NAIVE_MODES = ("analytic", "sampled")
DECISION_TRUNKS = ("model_train", "fine_tuned")
TREEBANK_FILES = ("train.txt", "dev.txt", "test.txt")


@dataclass
class SyntheticConfig:
    n_sentences: int = 2000
    vocab_size: int = 40
    max_len: int = 12
    contrast_rate: float = 0.5
    seed: int = 1


@dataclass
class DataConfig:
    data_dir: Optional[str] = None
    synthetic: Optional[SyntheticConfig] = None
    vectors_path: Optional[str] = None
    emb_dim: int = 16
    min_freq: int = 1
    use_subtrees: bool = True


@dataclass
class ModelConfig:
    bow_hidden: int = 64
    lstm_projection: int = 64
    lstm_hidden: int = 64
    lstm_mlp_hidden: int = 64
    decision_hidden: int = 32
    dropout: float = 0.5


@dataclass
class TrainConfig:
    lr: float = 5e-4
    max_epochs: int = MAX_EPOCHS
    batch_size: int = 64
    patience: int = 5
    seed: int = 0
    selection_metric: str = "accuracy"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not 1 <= self.max_epochs <= MAX_EPOCHS:
            raise ConfigError(f"max_epochs must be in [1, {MAX_EPOCHS}], got {self.max_epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.lr <= 0.0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.selection_metric not in SELECTION_METRICS:
            raise ConfigError(f"selection_metric must be one of {SELECTION_METRICS}")


@dataclass
class CostConfig:
    c_bow: float = 0.16
    c_lstm: float = 1.36
    c_decision: float = 0.0

    def to_model(self) -> CostModel:
        try:
            return CostModel(self.c_bow, self.c_lstm, self.c_decision)
        except ParameterError as e:
            raise ConfigError(str(e)) from e


@dataclass
class PipelineConfig:
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train_bow: TrainConfig = field(default_factory=TrainConfig)
    train_lstm: TrainConfig = field(default_factory=TrainConfig)
    train_decision: TrainConfig = field(default_factory=lambda: TrainConfig(selection_metric="auc"))
    cost_model: CostConfig = field(default_factory=CostConfig)
    grid_size: int = 201
    seed: int = 0
    out_dir: str = "runs/default"
    naive_mode: str = "analytic"
    decision_trunk: str = "model_train"
    charge_decision_cost: bool = False
    threads: Optional[int] = None

    @property
    def costs(self) -> CostModel:
        return self.cost_model.to_model()

    def validate(self) -> "PipelineConfig":
        """Check cross-field rules and that referenced paths exist."""
        data = self.data
        if (data.data_dir is None) == (data.synthetic is None):
            raise ConfigError("set exactly one of data.data_dir and data.synthetic")
        if data.data_dir is not None:
            for name in TREEBANK_FILES:
                if not (Path(data.data_dir) / name).is_file():
                    raise ConfigError(f"missing treebank file {Path(data.data_dir) / name}")
        if data.vectors_path is not None and not Path(data.vectors_path).is_file():
            raise ConfigError(f"missing vectors file {data.vectors_path}")
        if data.emb_dim < 1 or data.min_freq < 1:
            raise ConfigError("data.emb_dim and data.min_freq must be >= 1")
        if not 0.0 <= self.model.dropout < 1.0:
            raise ConfigError(f"model.dropout must be in [0, 1), got {self.model.dropout}")
        if self.grid_size < 2:
            raise ConfigError(f"grid_size must be >= 2, got {self.grid_size}")
        if self.naive_mode not in NAIVE_MODES:
            raise ConfigError(f"naive_mode must be one of {NAIVE_MODES}")
        if self.decision_trunk not in DECISION_TRUNKS:
            raise ConfigError(f"decision_trunk must be one of {DECISION_TRUNKS}")
        if self.train_decision.selection_metric != "auc":
            logger.warning("decision network selected by %s instead of AUC",
                           self.train_decision.selection_metric)
        self.costs
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _nested_dataclass(tp):
    if dataclasses.is_dataclass(tp):
        return tp
    for arg in typing.get_args(tp):
        if dataclasses.is_dataclass(arg):
            return arg
    return None


def _check_scalar(key: str, value, tp) -> None:
    allowed = typing.get_args(tp) or (tp,)
    if value is None:
        if type(None) in allowed:
            return
        raise ConfigError(f"{key} must not be null")
    for option in allowed:
        if option is bool and isinstance(value, bool):
            return
        if option is int and isinstance(value, int) and not isinstance(value, bool):
            return
        if option is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            return
        if option is str and isinstance(value, str):
            return
    names = "/".join(getattr(a, "__name__", str(a)) for a in allowed)
    raise ConfigError(f"{key} must be {names}, got {type(value).__name__}")


def from_dict(cls, data, prefix: str = ""):
    """Build dataclass `cls` from a dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or 'config'} must be an object")
    hints = typing.get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config key {prefix}{unknown[0]}")
    kwargs = {}
    for name, value in data.items():
        key = f"{prefix}{name}"
        nested = _nested_dataclass(hints[name])
        if nested is not None and value is not None:
            kwargs[name] = from_dict(nested, value, f"{key}.")
        else:
            _check_scalar(key, value, hints[name])
            kwargs[name] = float(value) if hints[name] is float else value
    try:
        return cls(**kwargs)
    except ParameterError as e:
        raise ConfigError(str(e)) from e


def load_config(path) -> PipelineConfig:
    """
    Load a PipelineConfig from JSON.

    Raises:
        ConfigError: missing file, malformed JSON, unknown keys or wrong value types.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    return from_dict(PipelineConfig, data)


def apply_overrides(config: PipelineConfig, seed: Optional[int] = None, out_dir: Optional[str] = None,
                    cost_bow: Optional[float] = None, cost_lstm: Optional[float] = None,
                    grid_size: Optional[int] = None, threads: Optional[int] = None) -> PipelineConfig:
    """Return a copy with command-line values taking precedence over the file."""
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if out_dir is not None:
        updates["out_dir"] = out_dir
    if grid_size is not None:
        updates["grid_size"] = grid_size
    if threads is not None:
        updates["threads"] = threads
    if cost_bow is not None or cost_lstm is not None:
        updates["cost_model"] = dataclasses.replace(
            config.cost_model,
            **{k: v for k, v in (("c_bow", cost_bow), ("c_lstm", cost_lstm)) if v is not None},
        )
    return dataclasses.replace(config, **updates)


def resolve_threads(config: PipelineConfig) -> int:
    """Worker cap: config value, else SKIMREAD_THREADS, else 1."""
    if config.threads is not None:
        return max(1, config.threads)
    raw = os.environ.get(THREADS_ENV, "")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
