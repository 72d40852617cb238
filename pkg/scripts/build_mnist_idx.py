"""Build MNIST IDX files for offline use.

Canonical MNIST mirrors are tried first. When none is reachable, the digits
are taken from the ``nb-tfjs-mnist`` wheel on PyPI, which bundles the TF.js
MNIST sprite (65,000 real MNIST digits, shuffled order, one-hot labels).

Usage:
    python scripts/build_mnist_idx.py [--out data/mnist] [--count 10000]
"""

import argparse
import gzip
import io
import struct
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

import numpy as np

MIRRORS = [
    "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "https://storage.googleapis.com/cvdf-datasets/mnist/",
]
IMAGES = "train-images-idx3-ubyte"
LABELS = "train-labels-idx1-ubyte"


def write_idx(out_dir, images, labels):
    out_dir.mkdir(parents=True, exist_ok=True)
    n, rows, cols = images.shape
    with open(out_dir / IMAGES, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())
    with open(out_dir / LABELS, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(labels.astype(np.uint8).tobytes())


def from_mirrors(count):
    for base in MIRRORS:
        try:
            raw = {}
            for name in (IMAGES, LABELS):
                with urllib.request.urlopen(base + name + ".gz", timeout=20) as r:
                    raw[name] = gzip.decompress(r.read())
        except OSError:
            continue
        n = min(count, struct.unpack(">I", raw[IMAGES][4:8])[0])
        images = np.frombuffer(raw[IMAGES], np.uint8, offset=16)[: n * 784]
        labels = np.frombuffer(raw[LABELS], np.uint8, offset=8)[:n]
        return images.reshape(n, 28, 28), labels, base
    return None


def from_tfjs_wheel(count):
    from PIL import Image

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "nb-tfjs-mnist==0.0.1",
             "--no-deps", "-q", "-d", tmp],
            check=True,
        )
        wheel = next(Path(tmp).glob("*.whl"))
        with zipfile.ZipFile(wheel) as zf:
            sprite = zf.read("tfjs_mnist/static/mnist_images.png")
            onehot = zf.read("tfjs_mnist/static/mnist_labels_uint8")
    # sprite is 65000 rows x 784 columns, one digit per row
    pixels = np.asarray(Image.open(io.BytesIO(sprite)).convert("L"))
    labels = np.frombuffer(onehot, np.uint8).reshape(-1, 10).argmax(axis=1)
    n = min(count, pixels.shape[0])
    return pixels[:n].reshape(n, 28, 28), labels[:n], "nb-tfjs-mnist wheel"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("data/mnist"))
    parser.add_argument("--count", type=int, default=10_000)
    args = parser.parse_args(argv)

    got = from_mirrors(args.count) or from_tfjs_wheel(args.count)
    images, labels, source = got
    write_idx(args.out, images, labels)
    print(f"wrote {len(labels)} digits from {source} to {args.out}")


if __name__ == "__main__":
    main()
