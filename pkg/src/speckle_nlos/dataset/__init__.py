"""MNIST ingestion, speckle dataset generation, preprocessing and storage."""

from .container import Dataset, read_dataset, write_dataset
from .generate import (
    DatasetSplit,
    SpeckleRecord,
    capture_raw,
    derive_seed,
    generate_dataset,
    object_mask,
    regenerate_raw,
    split_train_test,
)
from .idx import LabeledImage, load_idx, load_idx_arrays
from .preprocess import (
    PreprocessConfig,
    add_noise,
    binarize,
    crop,
    embed_object,
    normalize,
    preprocess,
)

__all__ = [
    "Dataset",
    "DatasetSplit",
    "LabeledImage",
    "PreprocessConfig",
    "SpeckleRecord",
    "add_noise",
    "binarize",
    "capture_raw",
    "crop",
    "derive_seed",
    "embed_object",
    "generate_dataset",
    "load_idx",
    "load_idx_arrays",
    "normalize",
    "object_mask",
    "preprocess",
    "read_dataset",
    "regenerate_raw",
    "split_train_test",
    "write_dataset",
]
