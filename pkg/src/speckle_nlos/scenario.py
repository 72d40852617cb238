"""NLOS geometries composed from the optics operators.

Every geometry is unfolded onto a single optical axis: reflections off a
wall become transmission through a phase screen. A scenario run maps an
object mask to one camera intensity capture plus the provenance needed to
repeat it.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import optics
from .errors import ConfigurationError
from .optics import GridSpec


class ScenarioKind(str, enum.Enum):
    ONE_WALL = "one-wall"
    SAME_SIDE = "same-side"
    ROTATING_WALL = "rotating-wall"
    TWO_WALLS = "two-walls"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        aliases = {"onewall": "one-wall", "sameside": "same-side",
                   "rotatingwall": "rotating-wall", "twowalls": "two-walls"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ConfigurationError(f"unknown scenario {name!r}; expected one of {names}") from None


DEFAULT_GRID = GridSpec(512, 512, 10e-6, 632.8e-9)


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry, sampling and wall parameters for one NLOS layout.

    ``object_size`` defaults to half the grid's shorter side; the physical
    2.5 cm object needs a grid at least that wide (e.g. 512 px at 50 um).
    ``wall_shape`` of ``None`` picks a per-kind default: the field grid for
    one-wall and two-walls, two grids side by side for same-side (disjoint
    illumination and observation patches) and 4x4 grids for rotating-wall.
    """

    kind: ScenarioKind = ScenarioKind.ONE_WALL
    grid: GridSpec = DEFAULT_GRID
    d_object_wall: float = 0.20
    d_wall_camera: float = 0.20
    d_wall_wall: float = 0.20
    d_source_wall: float = 0.20
    object_size: float | None = None
    wall_seed: int = 1
    wall_seed2: int = 2
    rotation_seed: int = 0
    wall_shape: tuple | None = None
    facet: int = 1
    observation_offset: tuple | None = None
    source_xy: tuple = (0.0, 0.0)
    lens_magnification: float = 1.0
    aperture_na: float | None = None
    real_part_only: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind.parse(self.kind))
        if isinstance(self.grid, dict):
            object.__setattr__(self, "grid", GridSpec(**self.grid))
        for name in ("d_object_wall", "d_wall_camera", "d_wall_wall", "d_source_wall"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.object_size is not None and not self.object_size > 0:
            raise ConfigurationError("object_size must be positive")
        if self.facet < 1:
            raise ConfigurationError("facet must be >= 1")
        if self.lens_magnification == 0:
            raise ConfigurationError("lens_magnification must be non-zero")
        if self.aperture_na is not None and not self.aperture_na > 0:
            raise ConfigurationError("aperture_na must be positive when set")
        if self.kind is ScenarioKind.TWO_WALLS and self.wall_seed2 == self.wall_seed:
            raise ConfigurationError("two-walls needs a second, distinct wall seed")
        for name in ("wall_shape", "observation_offset", "source_xy"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(v))
        if self.kind is ScenarioKind.SAME_SIDE:
            _check_disjoint(self.grid, self.resolved_wall_shape, (0, 0), self.resolved_observation_offset)

    @property
    def resolved_object_size(self):
        if self.object_size is not None:
            return self.object_size
        return 0.5 * min(self.grid.side_x, self.grid.side_y)

    @property
    def resolved_wall_shape(self):
        if self.wall_shape is not None:
            return self.wall_shape
        nx, ny = self.grid.shape
        if self.kind is ScenarioKind.SAME_SIDE:
            return (2 * nx, ny)
        if self.kind is ScenarioKind.ROTATING_WALL:
            return (4 * nx, 4 * ny)
        return (nx, ny)

    @property
    def resolved_observation_offset(self):
        if self.observation_offset is not None:
            return self.observation_offset
        return (self.grid.nx, 0)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["kind"] = self.kind.value
        d["grid"] = self.grid.to_dict()
        for k in ("wall_shape", "observation_offset", "source_xy"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "grid" in d and isinstance(d["grid"], dict):
            d["grid"] = GridSpec(**d["grid"])
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**d)


def _check_disjoint(grid, wall_shape, a, b):
    """Raise if two field-sized windows on a cyclic wall overlap."""
    def overlaps(o1, o2, n, w):
        if n * 2 > w:
            return True
        d = (o2 - o1) % w
        return d < n or d > w - n

    if overlaps(a[0], b[0], grid.nx, wall_shape[0]) and overlaps(a[1], b[1], grid.ny, wall_shape[1]):
        raise ConfigurationError(
            f"illumination patch {tuple(a)} and observation patch {tuple(b)} overlap on wall {tuple(wall_shape)}"
        )


@dataclass(frozen=True)
class CaptureProvenance:
    kind: str
    wall_seeds: list
    patch_offsets: list
    capture_index: int
    config: dict
    object_id: int | None = None
    label: int | None = None
    version: str = __version__

    def to_dict(self):
        return {
            "kind": self.kind,
            "wall_seeds": [int(s) for s in self.wall_seeds],
            "patch_offsets": [[int(v) for v in o] for o in self.patch_offsets],
            "capture_index": int(self.capture_index),
            "object_id": self.object_id,
            "label": self.label,
            "version": self.version,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            kind=d["kind"],
            wall_seeds=list(d["wall_seeds"]),
            patch_offsets=[tuple(o) for o in d["patch_offsets"]],
            capture_index=int(d["capture_index"]),
            config=d["config"],
            object_id=d.get("object_id"),
            label=d.get("label"),
            version=d.get("version", __version__),
        )

    def with_object(self, object_id, label):
        return dataclasses.replace(self, object_id=object_id, label=label)


# --- pipeline pieces -----------------------------------------------------


def _check(cfg, obj, kind):
    if cfg.kind is not kind:
        raise ConfigurationError(f"config kind {cfg.kind.value} used with the {kind.value} runner")
    if obj.grid != cfg.grid:
        raise ConfigurationError("object mask grid does not match the scenario grid")


def _wall(cfg, seed, offset=(0, 0)):
    return optics.random_phase_screen(cfg.grid, seed, cfg.resolved_wall_shape, cfg.facet, offset)


def _camera(cfg, field_after_wall):
    at_camera = optics.propagate(field_after_wall, cfg.d_wall_camera)
    on_sensor = optics.ideal_lens_image(at_camera, cfg.lens_magnification, cfg.aperture_na)
    return optics.capture_intensity(on_sensor, real_part_only=cfg.real_part_only)


def _provenance(cfg, seeds, offsets, capture_index=0):
    return CaptureProvenance(
        kind=cfg.kind.value,
        wall_seeds=list(seeds),
        patch_offsets=[tuple(o) for o in offsets],
        capture_index=capture_index,
        config=cfg.to_dict(),
    )


def rotation_offset(cfg, capture_index):
    """Wall patch seen on capture ``capture_index`` of a rotating wall."""
    rng = np.random.default_rng([int(cfg.rotation_seed), int(capture_index)])
    wx, wy = cfg.resolved_wall_shape
    return (int(rng.integers(wx)), int(rng.integers(wy)))


# --- geometries ----------------------------------------------------------


def run_one_wall(cfg, obj):
    _check(cfg, obj, ScenarioKind.ONE_WALL)
    wall = _wall(cfg, cfg.wall_seed)
    f = optics.apply_mask(optics.plane_wave(cfg.grid), obj)
    f = optics.propagate(f, cfg.d_object_wall)
    f = optics.apply_phase_screen(f, wall)
    return _camera(cfg, f), _provenance(cfg, [cfg.wall_seed], [wall.patch_offset])


def run_same_side(cfg, obj):
    _check(cfg, obj, ScenarioKind.SAME_SIDE)
    wall = _wall(cfg, cfg.wall_seed)
    lit = wall.with_offset((0, 0))
    seen = wall.with_offset(cfg.resolved_observation_offset)
    sx, sy = cfg.source_xy
    # exact spherical wave evaluated on the wall plane stands in for the source leg
    f = optics.point_source_field(cfg.grid, (sx, sy, -cfg.d_source_wall), 0.0)
    f = f.scaled(cfg.d_source_wall)  # unit amplitude on axis
    f = optics.apply_phase_screen(f, lit)
    f = optics.propagate(f, cfg.d_object_wall)
    f = optics.apply_mask(f, obj)
    f = optics.propagate(f, cfg.d_object_wall)
    f = optics.apply_phase_screen(f, seen)
    return _camera(cfg, f), _provenance(cfg, [cfg.wall_seed], [lit.patch_offset, seen.patch_offset])


def run_rotating_wall(cfg, obj, capture_index=0):
    _check(cfg, obj, ScenarioKind.ROTATING_WALL)
    wall = _wall(cfg, cfg.wall_seed, rotation_offset(cfg, capture_index))
    f = optics.apply_mask(optics.plane_wave(cfg.grid), obj)
    f = optics.propagate(f, cfg.d_object_wall)
    f = optics.apply_phase_screen(f, wall)
    return _camera(cfg, f), _provenance(cfg, [cfg.wall_seed], [wall.patch_offset], capture_index)


def run_two_walls(cfg, obj):
    _check(cfg, obj, ScenarioKind.TWO_WALLS)
    wall1 = _wall(cfg, cfg.wall_seed)
    wall2 = _wall(cfg, cfg.wall_seed2)
    f = optics.apply_mask(optics.plane_wave(cfg.grid), obj)
    f = optics.propagate(f, cfg.d_object_wall)
    f = optics.apply_phase_screen(f, wall1)
    f = optics.propagate(f, cfg.d_wall_wall)
    f = optics.apply_phase_screen(f, wall2)
    prov = _provenance(cfg, [cfg.wall_seed, cfg.wall_seed2], [wall1.patch_offset, wall2.patch_offset])
    return _camera(cfg, f), prov


def run(cfg, obj, capture_index=0):
    """Dispatch to the runner for ``cfg.kind``."""
    kind = ScenarioKind.parse(cfg.kind)
    if kind is ScenarioKind.ROTATING_WALL:
        return run_rotating_wall(cfg, obj, capture_index)
    runners = {
        ScenarioKind.ONE_WALL: run_one_wall,
        ScenarioKind.SAME_SIDE: run_same_side,
        ScenarioKind.TWO_WALLS: run_two_walls,
    }
    if kind not in runners:
        raise ConfigurationError(f"unknown scenario kind {kind!r}")
    img, prov = runners[kind](cfg, obj)
    return img, dataclasses.replace(prov, capture_index=int(capture_index))


def replay(provenance, obj):
    """Re-run the capture described by ``provenance`` on the same object mask."""
    cfg = ScenarioConfig.from_dict(provenance.config)
    return run(cfg, obj, provenance.capture_index)
