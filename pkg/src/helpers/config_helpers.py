"""
Pipeline configuration: one JSON or TOML file with nested sections

{
  "netlist": "input/s27.bench",
  "campaign": {"cycles": 64, "fit": 1.0},
  "sampler": {"depth": 2, "fanouts": [10, 5]},
  "embed_train": {"epochs": 5},
  "train": {"epochs": 200, "train_fraction": 0.4},
  "report": {"fold": "test"}
}

Missing keys take their defaults. Command-line overrides are applied on top
as `section.field=value` pairs, then the global seed replaces every stage seed.
"""

import json
import os
import tomllib
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, Optional

from src.dnn import TrainConfig
from src.graphsage import EmbedTrainConfig, SamplerConfig
from src.helpers.constants import DEFAULT_CYCLES, DEFAULT_FIT, DEFAULT_SEED, RESULTS_FOLDER
from src.helpers.enums import Fold
from src.helpers.errors import ConfigError

SEEDED_SECTIONS = ("campaign", "sampler", "embed_train", "train")
EMBED_NODE_CHOICES = ("flip_flops", "all")


@dataclass(frozen=True)
class CampaignConfig:
    cycles: int = DEFAULT_CYCLES
    fit: float = DEFAULT_FIT
    seed: int = DEFAULT_SEED
    logical_derating: bool = False

    def __post_init__(self):
        if self.cycles < 1:
            raise ConfigError("campaign.cycles must be at least 1")
        if self.fit < 0:
            raise ConfigError("campaign.fit must be non-negative")


@dataclass(frozen=True)
class ReportConfig:
    fold: Fold = Fold.test

    def __post_init__(self):
        try:
            object.__setattr__(self, "fold", Fold(self.fold))
        except ValueError as err:
            raise ConfigError(f"report.fold must be train or test, got {self.fold!r}") from err


@dataclass(frozen=True)
class PipelineConfig:
    netlist: Optional[str] = None
    stimulus: Optional[str] = None
    embedder_params: Optional[str] = None  # saved embedder to reuse instead of training
    out_dir: str = RESULTS_FOLDER
    jobs: Optional[int] = None  # campaign workers, None uses every CPU
    embed_nodes: str = "flip_flops"
    campaign: CampaignConfig = field(default_factory=CampaignConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    embed_train: EmbedTrainConfig = field(default_factory=EmbedTrainConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    report: ReportConfig = field(default_factory=ReportConfig)

    def __post_init__(self):
        if self.embed_nodes not in EMBED_NODE_CHOICES:
            raise ConfigError(f"embed_nodes must be one of {EMBED_NODE_CHOICES}")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        for name in SEEDED_SECTIONS:
            seed = getattr(self, name).seed
            if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
                raise ConfigError(f"{name}.seed must be a non-negative integer, got {seed!r}")


_SECTIONS = {
    "campaign": CampaignConfig,
    "sampler": SamplerConfig,
    "embed_train": EmbedTrainConfig,
    "train": TrainConfig,
    "report": ReportConfig,
}


def default_config_dict() -> Dict[str, Any]:
    data = asdict(PipelineConfig())
    data["report"]["fold"] = Fold.test.value
    return data


def _merge(base: Dict[str, Any], update: Dict[str, Any], where: str = ""):
    for key, value in update.items():
        if key not in base:
            raise ConfigError(f"unknown configuration key {where}{key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"configuration key {where}{key!r} must be a table")
            _merge(base[key], value, f"{where}{key}.")
        else:
            base[key] = value


def read_config_file(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigError(f"configuration file {path} does not exist")
    try:
        if path.endswith(".toml"):
            with open(path, mode="rb") as conf_buffer:
                return tomllib.load(conf_buffer)
        with open(path, mode="r", encoding="utf-8") as conf_buffer:
            return json.load(conf_buffer)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as err:
        raise ConfigError(f"{path}: {err}") from err


def parse_override(item: str) -> tuple:
    """`section.field=value` -> (["section", "field"], value); value is JSON or a plain string."""
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {item!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_override(data: Dict[str, Any], path: list, value: Any):
    node = data
    for key in path[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError(f"unknown configuration section {'.'.join(path[:-1])!r}")
        node = node[key]
    if path[-1] not in node or isinstance(node[path[-1]], dict):
        raise ConfigError(f"unknown configuration key {'.'.join(path)!r}")
    node[path[-1]] = value


def apply_seed(data: Dict[str, Any], seed: int):
    for section in SEEDED_SECTIONS:
        data[section]["seed"] = seed


def build_pipeline_config(data: Dict[str, Any]) -> PipelineConfig:
    try:
        sections = {name: cls(**data[name]) for name, cls in _SECTIONS.items()}
        top = {key: value for key, value in data.items() if key not in _SECTIONS}
        return PipelineConfig(**top, **sections)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid configuration: {err}") from err


def load_pipeline_config(
    path: Optional[str] = None,
    overrides: Iterable[str] = (),
    values: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
) -> PipelineConfig:
    """
    Defaults, then the file at `path`, then `values` (dotted keys from the
    dedicated flags), then the `--set` overrides, then the global seed.
    """
    data = default_config_dict()
    if path is not None:
        _merge(data, read_config_file(path))
    for key, value in (values or {}).items():
        if value is not None:
            apply_override(data, key.split("."), value)
    for item in overrides:
        apply_override(data, *parse_override(item))
    if seed is not None:
        apply_seed(data, seed)
    return build_pipeline_config(data)
