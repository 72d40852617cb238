"""Run configuration: defaults, INI files and command-line overrides.

The file format is INI (``key = value`` under ``[section]`` headers). Sections
and keys::

    [grid]        nx, ny, pitch, wavelength
    [scenario]    kind, d_object_wall, d_wall_camera, d_wall_wall,
                  d_source_wall, object_size, wall_seed, wall_seed2,
                  rotation_seed, wall_shape, facet, observation_offset,
                  source_xy, lens_magnification, aperture_na, real_part_only
    [preprocess]  crop_size, anchor, noise_sigma, binarize_threshold
    [train]       batch_size, epochs, learning_rate, optimizer, init_seed,
                  shuffle_seed, split_ratio, split_seed
    [data]        mnist_images, mnist_labels, count, seed_stream, workers

Pairs are written ``a, b``; ``none`` clears an optional value.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

from .classifier import TrainConfig
from .dataset import PreprocessConfig
from .errors import ConfigurationError
from .optics import GridSpec
from .scenario import ScenarioConfig

_PAIRS = {"wall_shape", "observation_offset", "source_xy"}
_OPTIONAL = {"object_size", "aperture_na", "wall_shape", "observation_offset", "binarize_threshold"}


@dataclass(frozen=True)
class DataConfig:
    mnist_images: str = "data/mnist/train-images-idx3-ubyte"
    mnist_labels: str = "data/mnist/train-labels-idx1-ubyte"
    count: int = 2000
    seed_stream: int = 0
    workers: int = 1


@dataclass(frozen=True)
class SplitConfig:
    split_ratio: float = 0.95
    split_seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    data: DataConfig = field(default_factory=DataConfig)


def _convert(key, raw, like):
    text = raw.strip()
    if key in _OPTIONAL and text.lower() in ("none", ""):
        return None
    if key in _PAIRS:
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise ConfigurationError(f"{key} needs two comma-separated values")
        return tuple(float(p) if key == "source_xy" else int(p) for p in parts)
    if key == "anchor":
        if text.lower() == "center":
            return "center"
        return tuple(int(p) for p in text.split(","))
    if isinstance(like, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(like, int):
        return int(text)
    if isinstance(like, float) or like is None:
        return float(text)
    return text


def _apply(obj, values, section):
    """``dataclasses.replace`` with string values converted against current field types."""
    names = {f.name for f in dataclasses.fields(obj)}
    changes = {}
    for key, raw in values.items():
        if key not in names:
            raise ConfigurationError(f"unknown key [{section}] {key}")
        current = getattr(obj, key)
        try:
            changes[key] = _convert(key, raw, current) if isinstance(raw, str) else raw
        except ValueError as exc:
            raise ConfigurationError(f"[{section}] {key}: {exc}") from None
    return dataclasses.replace(obj, **changes)


def _section_values(parser, name):
    return dict(parser.items(name)) if parser.has_section(name) else {}


def load_config(path=None, base=None):
    """Defaults overlaid with the INI file at ``path`` (if any)."""
    cfg = base or RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as f:
            parser.read_file(f)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from None
    known = {"grid", "scenario", "preprocess", "train", "data"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigurationError(f"unknown config sections {sorted(unknown)}")
    return override(
        cfg,
        grid=_section_values(parser, "grid"),
        scenario=_section_values(parser, "scenario"),
        preprocess=_section_values(parser, "preprocess"),
        train=_section_values(parser, "train"),
        data=_section_values(parser, "data"),
    )


def override(cfg, grid=None, scenario=None, preprocess=None, train=None, data=None):
    """Apply per-section overrides (strings are parsed, other values used as is)."""
    sc = cfg.scenario
    if grid:
        sc = dataclasses.replace(sc, grid=_apply(sc.grid, grid, "grid"))
    train = dict(train or {})
    split_keys = {k: train.pop(k) for k in ("split_ratio", "split_seed") if k in train}
    try:
        if scenario:
            sc = _apply(sc, scenario, "scenario")
        return RunConfig(
            scenario=sc,
            preprocess=_apply(cfg.preprocess, preprocess or {}, "preprocess"),
            train=_apply(cfg.train, train, "train"),
            split=_apply(cfg.split, split_keys, "train"),
            data=_apply(cfg.data, data or {}, "data"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from None


__all__ = ["DataConfig", "GridSpec", "RunConfig", "SplitConfig", "load_config", "override"]
