"""8-bit grayscale image files (binary PGM, PNG) and raw arrays."""

from pathlib import Path

import numpy as np

from .errors import ParseError


def to_bytes8(values):
    """Linear map of [0, 1] onto 0..255, clipped and rounded half to even."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.rint(v * 255.0).astype(np.uint8)


def pgm_bytes(values):
    px = to_bytes8(values)
    rows, cols = px.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + px.tobytes()


def write_image(path, values):
    """PGM unless ``path`` ends in ``.png``; array axis 0 becomes image rows."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(to_bytes8(values), mode="L").save(path, format="PNG", optimize=False)
        return
    path.write_bytes(pgm_bytes(values))


def read_pgm(data):
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos)
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError("truncated PGM header", pos)
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ParseError("not a binary PGM (P5)", 0)
    cols, rows, maxval = (int(t) for t in tokens[1:])
    pos += 1
    if maxval != 255:
        raise ParseError("only 8-bit PGM is supported", pos)
    if len(data) < pos + rows * cols:
        raise ParseError("truncated PGM payload", len(data))
    px = np.frombuffer(data, np.uint8, rows * cols, pos).reshape(rows, cols)
    return px / 255.0


def read_array(path):
    """Float image from ``.npy``, PGM or PNG (8-bit files scaled to [0, 1])."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".npy":
        return np.asarray(np.load(path), dtype=np.float64)
    if suffix == ".png":
        from PIL import Image

        return np.asarray(Image.open(path).convert("L"), dtype=np.float64) / 255.0
    return read_pgm(path.read_bytes())


def is_dataset(path):
    try:
        with open(path, "rb") as f:
            return f.read(6) == b"SPKL1\n"
    except OSError:
        return False
