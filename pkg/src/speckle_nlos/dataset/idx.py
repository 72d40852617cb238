"""MNIST IDX reader.

Image files: magic 0x00000803, u32 count, u32 rows, u32 cols, then
count*rows*cols unsigned bytes. Label files: magic 0x00000801, u32 count,
then count bytes. All header integers are big-endian.
"""

import gzip
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, ParseError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
DEFAULT_LIMIT = 10_000


@dataclass(frozen=True)
class LabeledImage:
    pixels: np.ndarray
    label: int

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2:
            raise DomainError("pixels must be a 2-D array")
        if np.any(px < 0) or np.any(px > 1):
            raise DomainError("pixel values must lie in [0, 1]")
        if not 0 <= int(self.label) <= 9:
            raise DomainError(f"label {self.label} outside 0..9")
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "label", int(self.label))


def _read(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def _header(data, fmt, what):
    size = struct.calcsize(fmt)
    if len(data) < size:
        raise ParseError(f"{what} header truncated: {len(data)} of {size} bytes", len(data))
    return struct.unpack(fmt, data[:size])


def parse_images(data, limit=None):
    magic, count, rows, cols = _header(data, ">IIII", "image")
    if magic != IMAGE_MAGIC:
        raise ParseError(f"bad image magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}", 0)
    n = count if limit is None else min(count, limit)
    need = 16 + n * rows * cols
    if len(data) < need:
        raise ParseError(f"image payload truncated: need {need} bytes, file has {len(data)}", len(data))
    return np.frombuffer(data, np.uint8, n * rows * cols, 16).reshape(n, rows, cols), count


def parse_labels(data, limit=None):
    magic, count = _header(data, ">II", "label")
    if magic != LABEL_MAGIC:
        raise ParseError(f"bad label magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x}", 0)
    n = count if limit is None else min(count, limit)
    if len(data) < 8 + n:
        raise ParseError(f"label payload truncated: need {8 + n} bytes, file has {len(data)}", len(data))
    labels = np.frombuffer(data, np.uint8, n, 8)
    bad = np.flatnonzero(labels > 9)
    if bad.size:
        raise ParseError(f"label value {labels[bad[0]]} outside 0..9", 8 + int(bad[0]))
    return labels, count


def load_idx_arrays(path_images, path_labels, limit=DEFAULT_LIMIT):
    """Raw ``uint8`` images ``(n, rows, cols)`` and labels ``(n,)``."""
    images, n_img = parse_images(_read(path_images), limit)
    labels, n_lab = parse_labels(_read(path_labels), limit)
    if n_img != n_lab:
        raise ParseError(f"count mismatch: {n_img} images but {n_lab} labels", 4)
    return images, labels


def load_idx(path_images, path_labels, limit=DEFAULT_LIMIT):
    """First ``limit`` digits as ``LabeledImage`` with pixels scaled to [0, 1]."""
    images, labels = load_idx_arrays(path_images, path_labels, limit)
    return [LabeledImage(img / 255.0, int(lab)) for img, lab in zip(images, labels)]
