"""SPKL1 dataset container.

Layout::

    b"SPKL1\\n"
    header line     JSON object: format, version, count, height, width,
                    dtype ("<f4"), pitch, wavelength, scenario, preprocess,
                    seed_stream
    count lines     JSON object per record: id, label, noise_seed, provenance
                    (the scenario config is stored once, in the header)
    payload         count * height * width little-endian float32, C order

Every JSON line is compact, key-sorted UTF-8 terminated by ``\\n``, so equal
datasets serialise to equal bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .. import __version__
from ..errors import ParseError
from ..optics import GridSpec, IntensityImage
from ..scenario import CaptureProvenance, ScenarioConfig
from .generate import SpeckleRecord
from .preprocess import PreprocessConfig

MAGIC = b"SPKL1\n"


def _line(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8") + b"\n"


@dataclass
class Dataset:
    records: list
    scenario: ScenarioConfig
    preprocess: PreprocessConfig
    seed_stream: int

    @property
    def images(self):
        if not self.records:
            return np.zeros((0, 0, 0), dtype=np.float32)
        return np.stack([r.image.intensity for r in self.records]).astype(np.float32, copy=False)

    @property
    def labels(self):
        return np.array([r.label for r in self.records], dtype=np.int64)

    def __len__(self):
        return len(self.records)


def to_bytes(ds):
    recs = ds.records
    h, w = recs[0].image.intensity.shape if recs else (0, 0)
    g = recs[0].image.grid if recs else ds.scenario.grid
    header = {
        "format": "SPKL1",
        "version": __version__,
        "count": len(recs),
        "height": h,
        "width": w,
        "dtype": "<f4",
        "pitch": g.pitch,
        "wavelength": g.wavelength,
        "scenario": ds.scenario.to_dict(),
        "preprocess": ds.preprocess.to_dict(),
        "seed_stream": int(ds.seed_stream),
    }
    out = bytearray(MAGIC)
    out += _line(header)
    for i, r in enumerate(recs):
        prov = r.provenance.to_dict()
        prov.pop("config")
        out += _line({"id": i, "label": int(r.label), "noise_seed": int(r.noise_seed), "provenance": prov})
    for r in recs:
        if r.image.intensity.shape != (h, w):
            raise ValueError("all records must share one image size")
        out += np.ascontiguousarray(r.image.intensity, dtype="<f4").tobytes()
    return bytes(out)


def write_dataset(path, ds):
    with open(path, "wb") as f:
        f.write(to_bytes(ds))


def _read_line(data, pos):
    end = data.find(b"\n", pos)
    if end < 0:
        raise ParseError("unterminated JSON line", pos)
    try:
        return json.loads(data[pos:end].decode("utf-8")), end + 1
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid JSON line: {exc}", pos) from None


def from_bytes(data):
    if not data.startswith(MAGIC):
        raise ParseError("not an SPKL1 dataset (bad magic)", 0)
    header, pos = _read_line(data, len(MAGIC))
    try:
        count, h, w = int(header["count"]), int(header["height"]), int(header["width"])
        scenario = ScenarioConfig.from_dict(header["scenario"])
        prep = PreprocessConfig.from_dict(header["preprocess"])
        grid = GridSpec(h, w, header["pitch"], header["wavelength"]) if count else None
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad SPKL1 header: {exc}", len(MAGIC)) from None
    metas = []
    for _ in range(count):
        at = pos
        meta, pos = _read_line(data, pos)
        if not isinstance(meta, dict) or "provenance" not in meta:
            raise ParseError("record line lacks provenance", at)
        metas.append(meta)
    need = pos + count * h * w * 4
    if len(data) < need:
        raise ParseError(f"payload truncated: need {need} bytes, file has {len(data)}", len(data))
    if len(data) > need:
        raise ParseError("trailing bytes after payload", need)
    payload = np.frombuffer(data, dtype="<f4", count=count * h * w, offset=pos).reshape(count, h, w)
    config = scenario.to_dict()
    records = []
    for meta, img in zip(metas, payload):
        prov = dict(meta["provenance"], config=config)
        records.append(
            SpeckleRecord(
                image=IntensityImage(grid, img.astype(np.float32)),
                label=int(meta["label"]),
                provenance=CaptureProvenance.from_dict(prov),
                noise_seed=int(meta["noise_seed"]),
            )
        )
    return Dataset(records, scenario, prep, int(header.get("seed_stream", 0)))


def read_dataset(path):
    with open(path, "rb") as f:
        return from_bytes(f.read())
