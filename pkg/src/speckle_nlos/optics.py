"""Scalar coherent fields and the operators that act on them.

Arrays are indexed ``[ix, iy]`` with shape ``(nx, ny)``. Pixel ``i`` sits at
``(i - n // 2) * pitch`` so that the optical axis falls on pixel ``n // 2``.
All operators return new objects; inputs are never modified.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from .errors import (
    ConfigurationError,
    DegenerateGeometryError,
    DomainError,
    ShapeError,
    SamplingWarning,
)

TWO_PI = 2.0 * np.pi
HISTOGRAM_BINS = 64
HISTOGRAM_RANGE = (0.0, 8.0)


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    pitch: float
    wavelength: float

    def __post_init__(self):
        if int(self.nx) < 2 or int(self.ny) < 2:
            raise ConfigurationError(f"grid must be at least 2x2, got {self.nx}x{self.ny}")
        if not self.pitch > 0 or not self.wavelength > 0:
            raise ConfigurationError("pitch and wavelength must be positive")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        object.__setattr__(self, "pitch", float(self.pitch))
        object.__setattr__(self, "wavelength", float(self.wavelength))

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def side_x(self):
        return self.nx * self.pitch

    @property
    def side_y(self):
        return self.ny * self.pitch

    @property
    def k(self):
        return TWO_PI / self.wavelength

    def coords(self):
        """Meshgrid ``(X, Y)`` of pixel centre positions in metres."""
        x = (np.arange(self.nx) - self.nx // 2) * self.pitch
        y = (np.arange(self.ny) - self.ny // 2) * self.pitch
        return np.meshgrid(x, y, indexing="ij")

    def frequencies(self):
        """Meshgrid ``(FX, FY)`` of spatial frequencies in FFT order, cycles/m."""
        fx = np.fft.fftfreq(self.nx, self.pitch)
        fy = np.fft.fftfreq(self.ny, self.pitch)
        return np.meshgrid(fx, fy, indexing="ij")

    def with_pitch(self, pitch):
        return GridSpec(self.nx, self.ny, pitch, self.wavelength)

    def to_dict(self):
        return {"nx": self.nx, "ny": self.ny, "pitch": self.pitch, "wavelength": self.wavelength}


def _check_grid(grid, shape):
    if tuple(shape) != grid.shape:
        raise ShapeError(f"array shape {tuple(shape)} does not match grid {grid.shape}")


@dataclass(frozen=True)
class ComplexField:
    grid: GridSpec
    amplitude: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitude, dtype=np.complex128)
        _check_grid(self.grid, a.shape)
        object.__setattr__(self, "amplitude", a)

    @property
    def total_energy(self):
        a = self.amplitude
        return float(np.sum(a.real**2 + a.imag**2) * self.grid.pitch**2)

    def __add__(self, other):
        if other.grid != self.grid:
            raise ShapeError("cannot add fields on different grids")
        return ComplexField(self.grid, self.amplitude + other.amplitude)

    def scaled(self, factor):
        return ComplexField(self.grid, self.amplitude * factor)


@dataclass(frozen=True)
class PhaseScreen:
    """Pixelated random phase map of a diffusive wall.

    ``phases`` covers the whole wall, which may be larger than the field grid.
    The illuminated patch is the field-sized window starting at
    ``patch_offset``, wrapping cyclically at the wall edges.
    """

    grid: GridSpec
    phases: np.ndarray
    seed: int
    patch_offset: tuple = (0, 0)
    facet: int = 1

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=np.float64)
        if ph.ndim != 2:
            raise ShapeError("phase screen must be 2-D")
        if np.any(ph < 0) or np.any(ph >= TWO_PI):
            raise DomainError("phase entries must lie in [0, 2*pi)")
        object.__setattr__(self, "phases", ph)
        object.__setattr__(self, "patch_offset", (int(self.patch_offset[0]), int(self.patch_offset[1])))

    @property
    def wall_shape(self):
        return self.phases.shape

    def with_offset(self, offset):
        return PhaseScreen(self.grid, self.phases, self.seed, tuple(offset), self.facet)

    def patch(self):
        """Phases of the illuminated window, shaped like ``grid``."""
        dx, dy = self.patch_offset
        wx, wy = self.wall_shape
        rows = (np.arange(self.grid.nx) + dx) % wx
        cols = (np.arange(self.grid.ny) + dy) % wy
        return self.phases[np.ix_(rows, cols)]


@dataclass(frozen=True)
class AmplitudeMask:
    grid: GridSpec
    transmittance: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.transmittance, dtype=np.float64)
        _check_grid(self.grid, t.shape)
        if np.any(t < 0) or np.any(t > 1):
            raise DomainError("transmittance must lie in [0, 1]")
        object.__setattr__(self, "transmittance", t)


@dataclass(frozen=True)
class IntensityImage:
    grid: GridSpec
    intensity: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.intensity)
        if i.dtype.kind != "f":
            i = i.astype(np.float64)
        _check_grid(self.grid, i.shape)
        if np.any(i < 0):
            raise DomainError("intensity must be non-negative")
        object.__setattr__(self, "intensity", i)


@dataclass(frozen=True)
class SpeckleStats:
    mean_intensity: float
    std_intensity: float
    contrast: float
    histogram: np.ndarray
    bin_edges: np.ndarray = field(repr=False)

    @property
    def bin_centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def density(self):
        """Histogram counts normalised to a probability density over I/mean."""
        total = self.histogram.sum()
        if total == 0:
            return np.zeros(len(self.histogram))
        return self.histogram / (total * np.diff(self.bin_edges))


# --- sources -------------------------------------------------------------


def plane_wave(grid, amplitude=1.0):
    if not amplitude > 0:
        raise DomainError("plane-wave amplitude must be positive")
    return ComplexField(grid, np.full(grid.shape, amplitude, dtype=np.complex128))


def point_source_field(grid, source_position, plane_z):
    """Spherical wave ``exp(i k r) / r`` from a point source, sampled on a plane at ``z = plane_z``."""
    sx, sy, sz = (float(v) for v in source_position)
    if plane_z == sz:
        raise DegenerateGeometryError("point source lies in the sampling plane")
    X, Y = grid.coords()
    r = np.sqrt((X - sx) ** 2 + (Y - sy) ** 2 + (plane_z - sz) ** 2)
    return ComplexField(grid, np.exp(1j * grid.k * r) / r)


def gaussian_beam(grid, waist, amplitude=1.0):
    """Collimated Gaussian beam at its waist, intensity ``exp(-2 rho^2 / w0^2)``."""
    X, Y = grid.coords()
    return ComplexField(grid, amplitude * np.exp(-(X**2 + Y**2) / waist**2))


# --- propagation ---------------------------------------------------------


def max_unaliased_distance(grid):
    """Largest distance for which the transfer-function chirp is Nyquist sampled."""
    return min(grid.nx, grid.ny) * grid.pitch**2 / grid.wavelength


@lru_cache(maxsize=32)
def _cached_transfer(grid, distance):
    h = transfer_function(grid, distance)
    h.setflags(write=False)
    return h


def transfer_function(grid, distance):
    """Band-limited angular-spectrum transfer function in FFT order."""
    FX, FY = grid.frequencies()
    lam = grid.wavelength
    radicand = 1.0 - (lam * FX) ** 2 - (lam * FY) ** 2
    propagating = radicand >= 0
    kz_phase = TWO_PI * (distance / lam) * np.sqrt(np.where(propagating, radicand, 0.0))
    return np.where(propagating, np.exp(1j * kz_phase), 0.0)


def propagate(field, distance, warn=True):
    """Angular-spectrum propagation over ``distance`` metres.

    Evanescent spatial frequencies are dropped. Boundaries are periodic.
    """
    if not np.isfinite(distance):
        raise DomainError("distance must be finite")
    if distance == 0:
        return ComplexField(field.grid, field.amplitude.copy())
    grid = field.grid
    if warn and abs(distance) > max_unaliased_distance(grid):
        warnings.warn(
            f"propagation distance {distance:g} m exceeds the angular-spectrum "
            f"sampling limit {max_unaliased_distance(grid):g} m for this grid",
            SamplingWarning,
            stacklevel=2,
        )
    spectrum = np.fft.fft2(field.amplitude)
    return ComplexField(grid, np.fft.ifft2(spectrum * _cached_transfer(grid, float(distance))))


# --- thin elements -------------------------------------------------------


def apply_mask(field, mask):
    if mask.grid != field.grid:
        raise ShapeError("mask grid does not match field grid")
    return ComplexField(field.grid, field.amplitude * mask.transmittance)


def random_phase_screen(grid, seed, wall_shape=None, facet=1, patch_offset=(0, 0)):
    """Uniform i.i.d. phases on [0, 2 pi), one value per ``facet x facet`` block of wall pixels."""
    wall_shape = tuple(wall_shape or grid.shape)
    if facet < 1:
        raise ConfigurationError("facet must be a positive integer")
    if wall_shape[0] < grid.nx or wall_shape[1] < grid.ny:
        raise ConfigurationError(f"wall {wall_shape} is smaller than the field grid {grid.shape}")
    rng = np.random.default_rng(np.uint64(seed))
    coarse = (-(-wall_shape[0] // facet), -(-wall_shape[1] // facet))
    phases = rng.random(coarse) * TWO_PI
    if facet > 1:
        phases = np.repeat(np.repeat(phases, facet, axis=0), facet, axis=1)
        phases = phases[: wall_shape[0], : wall_shape[1]]
    # rounding of u * 2pi can land exactly on 2pi
    phases[phases >= TWO_PI] = 0.0
    return PhaseScreen(grid, phases, int(seed), patch_offset, facet)


def apply_phase_screen(field, screen):
    g, s = field.grid, screen.grid
    if g.shape != s.shape or g.pitch != s.pitch:
        raise ShapeError("phase screen grid does not match field grid")
    return ComplexField(g, field.amplitude * np.exp(1j * screen.patch()))


def ideal_lens_image(field_at_wall, magnification=1.0, aperture_na=None):
    """Perfect relay of a field onto the sensor.

    The sensor grid keeps the pixel count and gets pitch ``|m| * pitch``;
    amplitudes scale by ``1/|m|`` so energy is preserved. A negative
    magnification inverts the image. ``aperture_na`` applies a circular pupil
    with cutoff frequency ``NA / wavelength`` before the relay.
    """
    if magnification == 0:
        raise DomainError("magnification must be non-zero")
    grid = field_at_wall.grid
    a = field_at_wall.amplitude
    if aperture_na is not None:
        FX, FY = grid.frequencies()
        pupil = np.hypot(FX, FY) <= aperture_na / grid.wavelength
        a = np.fft.ifft2(np.fft.fft2(a) * pupil)
    m = abs(magnification)
    if magnification < 0:
        a = a[::-1, ::-1]
    out = a / m if m != 1 else a.copy()
    return ComplexField(grid.with_pitch(grid.pitch * m), out)


# --- detection -----------------------------------------------------------


def capture_intensity(field, real_part_only=False):
    """Detector response ``|a|^2``.

    ``real_part_only`` squares only the real part of the field instead, which
    drops the quadrature component.
    """
    a = field.amplitude
    if real_part_only:
        return IntensityImage(field.grid, a.real**2)
    return IntensityImage(field.grid, a.real**2 + a.imag**2)


def two_point_intensity(i1, i2, delta_phi, coherent=True):
    if i1 < 0 or i2 < 0:
        raise DomainError("intensities must be non-negative")
    if not coherent:
        return i1 + i2
    return i1 + i2 + 2.0 * math.sqrt(i1 * i2) * math.cos(delta_phi)


def speckle_statistics(image, bins=HISTOGRAM_BINS, value_range=HISTOGRAM_RANGE):
    """Mean, standard deviation, contrast and histogram of ``I / mean``.

    An all-zero image has undefined contrast, reported as NaN with an empty
    histogram.
    """
    I = np.asarray(image.intensity, dtype=np.float64)
    if I.size == 0:
        raise ShapeError("image is empty")
    mean = float(I.mean())
    std = float(I.std())
    edges = np.linspace(value_range[0], value_range[1], bins + 1)
    if mean == 0:
        return SpeckleStats(0.0, std, math.nan, np.zeros(bins, dtype=np.int64), edges)
    hist, _ = np.histogram(I / mean, bins=edges)
    return SpeckleStats(mean, std, std / mean, hist, edges)


def ks_exponential(image):
    """Kolmogorov-Smirnov distance between ``I / mean`` and the unit exponential."""
    I = np.asarray(image.intensity, dtype=np.float64).ravel()
    return float(stats.kstest(I / I.mean(), "expon").statistic)


def rms_width(intensity, grid, axis=0):
    """Second-moment beam radius ``2 * sqrt(<x^2>)`` along one axis."""
    X, Y = grid.coords()
    c = X if axis == 0 else Y
    p = intensity / intensity.sum()
    mu = np.sum(c * p)
    return 2.0 * math.sqrt(np.sum((c - mu) ** 2 * p))
