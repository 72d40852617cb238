"""Mass generation of preprocessed speckle records, and train/test splits."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import scenario as scn
from ..errors import ConfigurationError, GenerationError, SpeckleError
from ..optics import IntensityImage
from ..scenario import CaptureProvenance
from .preprocess import PreprocessConfig, binarize, embed_object, preprocess


@dataclass(frozen=True)
class SpeckleRecord:
    image: IntensityImage
    label: int
    provenance: CaptureProvenance
    noise_seed: int


def derive_seed(seed_stream, index):
    """64-bit per-record seed from a stream seed and the record index."""
    ss = np.random.SeedSequence([int(seed_stream), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def object_mask(cfg, image, prep):
    if prep.binarize_threshold is not None:
        image = binarize(image, prep.binarize_threshold)
    return embed_object(image, cfg.grid, cfg.resolved_object_size)


def capture_raw(cfg, image, index, prep=PreprocessConfig()):
    """Camera intensity before preprocessing, and its provenance."""
    raw, prov = scn.run(cfg, object_mask(cfg, image, prep), capture_index=index)
    return raw, prov.with_object(index, image.label)


def _one(args):
    cfg, image, index, object_id, seed_stream, prep = args
    try:
        raw, prov = scn.run(cfg, object_mask(cfg, image, prep), capture_index=index)
        noise_seed = derive_seed(seed_stream, index)
        img = preprocess(raw, prep, noise_seed)
    except SpeckleError as exc:
        raise GenerationError(str(exc), index) from exc
    return SpeckleRecord(img, image.label, prov.with_object(object_id, image.label), noise_seed)


def generate_dataset(cfg, images, seed_stream, prep=PreprocessConfig(), object_ids=None, workers=1,
                     progress=None):
    """One scenario capture per input image, preprocessed.

    ``object_ids`` default to the image positions. Records come back in input
    order whatever the worker count.
    """
    if len(images) == 0:
        raise ConfigurationError("no input images")
    ids = list(range(len(images))) if object_ids is None else list(object_ids)
    jobs = [(cfg, img, i, ids[i], seed_stream, prep) for i, img in enumerate(images)]
    if workers <= 1:
        out = []
        for job in jobs:
            out.append(_one(job))
            if progress is not None:
                progress(len(out))
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one, jobs, chunksize=16))


def regenerate_raw(record, image, prep=PreprocessConfig()):
    """Re-run the capture behind ``record`` from its provenance."""
    cfg = scn.ScenarioConfig.from_dict(record.provenance.config)
    raw, _ = scn.replay(record.provenance, object_mask(cfg, image, prep))
    return raw


@dataclass(frozen=True)
class DatasetSplit:
    train: list
    test: list
    split_seed: int


def split_train_test(records, ratio=0.95, split_seed=0):
    """Seeded shuffle, then the first ``round(ratio * n)`` ids train, the rest test.

    ``records`` may be a sequence of records or a record count.
    """
    n = records if isinstance(records, (int, np.integer)) else len(records)
    if n < 20:
        raise ConfigurationError(f"need at least 20 records to split, got {n}")
    if not 0 < ratio < 1:
        raise ConfigurationError("ratio must lie in (0, 1)")
    order = np.random.default_rng(np.uint64(split_seed)).permutation(n)
    k = int(round(ratio * n))
    return DatasetSplit(sorted(order[:k].tolist()), sorted(order[k:].tolist()), int(split_seed))
