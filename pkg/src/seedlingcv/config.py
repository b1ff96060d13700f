"""Run configuration: JSON file -> validated dataclasses.

The file may hold any subset of the known sections; unknown sections or
unknown keys inside a section are rejected so typos fail loudly instead
of silently running with defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .baselines import SvmConfig
from .dataset import SplitSpec
from .errors import ConfigError
from .nn import CnnConfig
from .segmentation import SegmentationConfig

DEFAULT_C_GRID = (0.1, 1.0, 5.0, 10.0)
DEFAULT_FOLDS = 3


@dataclass(frozen=True)
class KnnSearchConfig:
    """Grid-search settings for the neighbour count."""

    weighting: str = "uniform"
    max_k: int | None = None
    folds: int = DEFAULT_FOLDS

    def __post_init__(self):
        if self.weighting != "uniform":
            raise ValueError(f"only uniform weighting is supported, got {self.weighting!r}")
        if self.max_k is not None and self.max_k < 1:
            raise ValueError(f"max_k must be positive, got {self.max_k}")
        if self.folds < 2:
            raise ValueError(f"need at least 2 folds, got {self.folds}")


@dataclass(frozen=True)
class SvmSearchConfig:
    base: SvmConfig = field(default_factory=SvmConfig)
    c_grid: tuple[float, ...] = DEFAULT_C_GRID
    folds: int = DEFAULT_FOLDS

    def __post_init__(self):
        if not self.c_grid or any(c <= 0 for c in self.c_grid):
            raise ValueError(f"c_grid must hold positive values, got {self.c_grid}")
        if self.folds < 2:
            raise ValueError(f"need at least 2 folds, got {self.folds}")


@dataclass(frozen=True)
class RunConfig:
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    cnn: CnnConfig = field(default_factory=CnnConfig)
    svm: SvmSearchConfig = field(default_factory=SvmSearchConfig)
    knn: KnnSearchConfig = field(default_factory=KnnSearchConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    data_root: str | None = None
    output_dir: str | None = None


def _check_keys(section: str, data: dict, allowed: set[str]) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r} section: {', '.join(unknown)}")


def _dataclass_section(section: str, data: dict, cls):
    names = {f.name for f in fields(cls)}
    _check_keys(section, data, names)
    try:
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {section!r} section: {exc}") from exc


def _segmentation_section(data: dict) -> SegmentationConfig:
    _check_keys("segmentation", data, {"blur_size", "blur_sigma", "hsv_range", "erode_size"})
    if "hsv_range" in data and isinstance(data["hsv_range"], dict):
        _check_keys("segmentation.hsv_range", data["hsv_range"],
                    {"h_lo", "h_hi", "s_lo", "s_hi", "v_lo", "v_hi"})
    try:
        return SegmentationConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad 'segmentation' section: {exc}") from exc


def _svm_section(data: dict) -> SvmSearchConfig:
    _check_keys("svm", data, {"C", "kernel", "gamma", "epochs", "seed", "c_grid", "folds"})
    search = {k: data.pop(k) for k in ("c_grid", "folds") if k in data}
    try:
        base = SvmConfig(**data)
        return SvmSearchConfig(base=base,
                               c_grid=tuple(search.get("c_grid", DEFAULT_C_GRID)),
                               folds=search.get("folds", DEFAULT_FOLDS))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad 'svm' section: {exc}") from exc


def _paths_section(data: dict) -> dict:
    _check_keys("paths", data, {"data_root", "output_dir"})
    return data


def load_run_config(path=None) -> RunConfig:
    """Defaults when path is None; otherwise parse and validate the file."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a JSON object, got {type(raw).__name__}")
    _check_keys("config", raw, {"segmentation", "cnn", "svm", "knn", "split", "paths"})
    for section, value in raw.items():
        if not isinstance(value, dict):
            raise ConfigError(f"section {section!r} must be a JSON object")

    kwargs: dict = {}
    if "segmentation" in raw:
        kwargs["segmentation"] = _segmentation_section(raw["segmentation"])
    if "cnn" in raw:
        kwargs["cnn"] = _dataclass_section("cnn", raw["cnn"], CnnConfig)
    if "svm" in raw:
        kwargs["svm"] = _svm_section(dict(raw["svm"]))
    if "knn" in raw:
        kwargs["knn"] = _dataclass_section("knn", raw["knn"], KnnSearchConfig)
    if "split" in raw:
        kwargs["split"] = _dataclass_section("split", raw["split"], SplitSpec)
    if "paths" in raw:
        paths = _paths_section(raw["paths"])
        kwargs["data_root"] = paths.get("data_root")
        kwargs["output_dir"] = paths.get("output_dir")
    return RunConfig(**kwargs)
