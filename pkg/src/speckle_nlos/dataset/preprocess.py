"""Object masks from digits, and the crop -> noise -> normalise chain."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigurationError, DegenerateInputError, DomainError, ShapeError
from ..optics import AmplitudeMask, GridSpec, IntensityImage
from .idx import LabeledImage


def binarize(img, threshold=0.5):
    """Pixels strictly above ``threshold`` become 1, the rest 0."""
    if not 0 < threshold < 1:
        raise DomainError("threshold must lie in (0, 1)")
    return LabeledImage((img.pixels > threshold).astype(np.float64), img.label)


def nearest_indices(n_out, n_in):
    """Source index for each of ``n_out`` output pixels (pixel-centre nearest neighbour)."""
    return np.minimum(((np.arange(n_out) + 0.5) * n_in / n_out).astype(np.intp), n_in - 1)


def embed_object(img, grid, object_size):
    """Resample a digit to ``object_size`` metres square, centred on an opaque board."""
    n = int(round(object_size / grid.pitch))
    if n > min(grid.nx, grid.ny):
        raise ConfigurationError(
            f"object of {object_size:g} m ({n} px) does not fit the {grid.nx}x{grid.ny} grid"
        )
    if n < 1:
        raise ConfigurationError("object is smaller than one pixel")
    rows = nearest_indices(n, img.pixels.shape[0])
    cols = nearest_indices(n, img.pixels.shape[1])
    t = np.zeros(grid.shape)
    ox, oy = (grid.nx - n) // 2, (grid.ny - n) // 2
    t[ox : ox + n, oy : oy + n] = img.pixels[np.ix_(rows, cols)]
    return AmplitudeMask(grid, t)


def crop(image, size, anchor="center"):
    """``size x size`` window; ``anchor`` is ``"center"`` or an ``(x, y)`` corner offset."""
    nx, ny = image.intensity.shape
    if size < 2 or size > min(nx, ny):
        raise ShapeError(f"crop size {size} does not fit a {nx}x{ny} image")
    if anchor == "center":
        ox, oy = (nx - size) // 2, (ny - size) // 2
    else:
        ox, oy = (int(v) for v in anchor)
        if ox < 0 or oy < 0 or ox + size > nx or oy + size > ny:
            raise ShapeError(f"crop window at {(ox, oy)} falls outside the image")
    g = image.grid
    return IntensityImage(
        GridSpec(size, size, g.pitch, g.wavelength),
        image.intensity[ox : ox + size, oy : oy + size].copy(),
    )


def add_noise(image, sigma, seed):
    """Additive Gaussian noise with std ``sigma * mean(I)``, clamped at zero."""
    if sigma < 0:
        raise DomainError("sigma must be non-negative")
    if sigma == 0:
        return IntensityImage(image.grid, image.intensity.copy())
    I = image.intensity
    rng = np.random.default_rng(np.uint64(seed))
    noisy = I + rng.normal(0.0, sigma * float(I.mean()), I.shape)
    return IntensityImage(image.grid, np.maximum(noisy, 0.0))


def normalize(image):
    """Affine map of the image onto [0, 1]."""
    I = image.intensity
    lo, hi = I.min(), I.max()
    if not hi > lo:
        raise DegenerateInputError("cannot normalise a constant image")
    out = (I - lo) / (hi - lo)
    return IntensityImage(image.grid, np.clip(out, 0.0, 1.0))


@dataclass(frozen=True)
class PreprocessConfig:
    crop_size: int = 64
    anchor: object = "center"
    noise_sigma: float = 0.05
    binarize_threshold: float | None = 0.5

    def __post_init__(self):
        if self.crop_size < 2:
            raise ConfigurationError("crop_size must be >= 2")
        if self.noise_sigma < 0:
            raise ConfigurationError("noise_sigma must be non-negative")
        if self.anchor != "center":
            object.__setattr__(self, "anchor", tuple(int(v) for v in self.anchor))

    def to_dict(self):
        d = asdict(self)
        if d["anchor"] != "center":
            d["anchor"] = list(d["anchor"])
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def preprocess(image, cfg, noise_seed):
    """crop -> add_noise -> normalize; the result is stored as float32."""
    out = normalize(add_noise(crop(image, cfg.crop_size, cfg.anchor), cfg.noise_sigma, noise_seed))
    return IntensityImage(out.grid, out.intensity.astype(np.float32))
