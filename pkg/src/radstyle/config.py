"""Dataclass configuration for evaluation runs, loadable from YAML/JSON.

Unknown keys are rejected so typos fail loudly instead of silently
falling back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ConfigError, IoError
from .serialize import SerializerConfig

# Table column order: composite first, then clinical, then text overlap.
DEFAULT_METRICS = ("radcliq", "radgraph_f1", "chexbert", "bleu2", "bert_score")

# Placeholder composite: rewards every sub-metric equally and flips the
# sign so that lower is better. Real deployments should fit these weights
# on rated reports and override them here.
DEFAULT_RADCLIQ_WEIGHTS = {
    "radgraph_f1": -1.0,
    "chexbert": -1.0,
    "bleu2": -1.0,
    "bert_score": -1.0,
}
DEFAULT_RADCLIQ_BIAS = 4.0


@dataclass(frozen=True)
class MetricsConfig:
    names: tuple[str, ...] = DEFAULT_METRICS
    radcliq_weights: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_RADCLIQ_WEIGHTS))
    radcliq_bias: float = DEFAULT_RADCLIQ_BIAS


@dataclass(frozen=True)
class ClientSettings:
    """How generated reports are obtained.

    mode "http" talks to a real endpoint; "identity-mock" echoes each
    study's reference report (offline pipeline checks); "fixed-mock"
    returns ``fixed_text`` for everything (degenerate baseline).
    """

    mode: str = "identity-mock"
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_tokens: int = 512
    timeout: float = 30.0
    max_retries: int = 2
    api_key_env: str = "OPENAI_API_KEY"
    auth_header: str = "Authorization"
    fixed_text: str = "No acute cardiopulmonary process."
    parallelism: int = 4

    def __post_init__(self) -> None:
        if self.mode not in ("http", "identity-mock", "fixed-mock"):
            raise ConfigError(f"unknown client mode {self.mode!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    shots: tuple[int, ...] = (0, 1, 5, 10)
    seed: int = 0
    pool_split: str = "train"
    eval_split: str = "test"

    def __post_init__(self) -> None:
        if any(k < 0 for k in self.shots):
            raise ConfigError("shot counts must be non-negative")
        if self.pool_split == self.eval_split:
            raise ConfigError("pool and eval splits must differ")


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "results"
    prefix: str = "run"


@dataclass(frozen=True)
class HarnessConfig:
    dataset: str = "dataset.jsonl"
    graphs: str | None = None
    vectors: str | None = None
    embeddings: str | None = None
    baseline: str | None = None
    serializer: SerializerConfig = field(default_factory=SerializerConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    client: ClientSettings = field(default_factory=ClientSettings)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


def _build(cls, doc: dict, context: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{context}: expected a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(doc) - set(known))
    if unknown:
        raise ConfigError(f"{context}: unknown keys {unknown}")
    kwargs = {}
    for name, value in doc.items():
        if name == "serializer":
            value = _build(SerializerConfig, value, f"{context}.{name}")
        elif name == "metrics":
            value = _build(MetricsConfig, value, f"{context}.{name}")
        elif name == "client":
            value = _build(ClientSettings, value, f"{context}.{name}")
        elif name == "experiment":
            value = _build(ExperimentConfig, value, f"{context}.{name}")
        elif name == "output":
            value = _build(OutputConfig, value, f"{context}.{name}")
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def load_config(path: str | Path) -> HarnessConfig:
    """Read a harness configuration from a YAML (or JSON) file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML: {exc}") from exc
    if doc is None:
        doc = {}
    return _build(HarnessConfig, doc, str(path))
