"""SNET1 checkpoint files.

Layout (all integers little-endian)::

    b"SNET1"
    u32  input_size
    u32  layer_count
    per layer:  u16 name_len, name (utf-8), u8 dtype (1 = float32), u8 ndim, ndim x u32 dims
    payloads:   each layer's values as float32, C order, in table order
    u32  CRC-32 of every preceding byte
"""

import struct
import zlib

import numpy as np

from ..errors import CorruptCheckpointError, ParseError
from .net import LAYER_NAMES, SimpleNetParams

MAGIC = b"SNET1"
DTYPE_F32 = 1


def to_bytes(params):
    head = bytearray(MAGIC)
    head += struct.pack("<II", params.input_size, len(LAYER_NAMES))
    payload = bytearray()
    for name, arr in params.items():
        raw = name.encode("utf-8")
        head += struct.pack("<H", len(raw)) + raw
        head += struct.pack("<BB", DTYPE_F32, arr.ndim)
        head += struct.pack(f"<{arr.ndim}I", *arr.shape)
        payload += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    body = bytes(head + payload)
    return body + struct.pack("<I", zlib.crc32(body))


def save_params(params, path):
    with open(path, "wb") as f:
        f.write(to_bytes(params))


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.data):
            raise ParseError(f"truncated checkpoint while reading {what}", self.pos)
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def from_bytes(data):
    r = _Reader(data)
    if r.take(len(MAGIC), "magic") != MAGIC:
        raise CorruptCheckpointError("not an SNET1 checkpoint (bad magic)", 0)
    input_size, count = r.unpack("<II", "header")
    table = []
    for _ in range(count):
        at = r.pos
        (name_len,) = r.unpack("<H", "layer name length")
        name = r.take(name_len, "layer name").decode("utf-8", errors="replace")
        dtype, ndim = r.unpack("<BB", "layer dtype")
        if dtype != DTYPE_F32:
            raise CorruptCheckpointError(f"unsupported dtype code {dtype} for {name}", at)
        shape = r.unpack(f"<{ndim}I", "layer shape")
        table.append((name, shape))
    arrays = {}
    for name, shape in table:
        nbytes = 4 * int(np.prod(shape))
        arrays[name] = np.frombuffer(r.take(nbytes, f"payload of {name}"), dtype="<f4").reshape(shape).astype(np.float32)
    body_end = r.pos
    (crc,) = r.unpack("<I", "CRC-32")
    if r.pos != len(data):
        raise CorruptCheckpointError("trailing bytes after CRC", r.pos)
    if zlib.crc32(data[:body_end]) != crc:
        raise CorruptCheckpointError("CRC-32 mismatch", body_end)
    missing = set(LAYER_NAMES) - set(arrays)
    if missing:
        raise CorruptCheckpointError(f"checkpoint lacks layers {sorted(missing)}")
    return SimpleNetParams(input_size, arrays)


def load_params(path):
    with open(path, "rb") as f:
        return from_bytes(f.read())
